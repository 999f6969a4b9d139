use std::f64::consts::PI;

use proptest::prelude::*;

use semflow::mesh::generate;
use semflow::mesh::{BoundaryTag, ReferenceBasis};
use semflow::postproc::{
    convergence_time, force_coefficients, histogram, psd, q_criterion_field, running_average, surface_coefficients,
    Convergence, FlowReference,
};
use semflow::sem_ops::Discretization;

fn uniform_times(n: usize, t_end: f64) -> Vec<f64> {
    (0..n).map(|k| k as f64 * t_end / n as f64).collect()
}

/// Earliest sample after which every running mean lies in the band, by direct scan.
fn brute_force_convergence(t: &[f64], x: &[f64], band: f64) -> Convergence {
    let avg = running_average(t, x).unwrap();
    let mean = *avg.last().unwrap();
    let last = avg.len() - 1;
    for k in 0..last {
        if avg[k..].iter().all(|a| (a - mean).abs() <= band * mean.abs()) {
            return Convergence::At(t[k]);
        }
    }
    Convergence::NotConverged
}

fn decaying_signal(t: &[f64], offset: f64, amp: f64, decay: f64, freq: f64) -> Vec<f64> {
    t.iter()
        .map(|t| offset + amp * (-decay * t).exp() * (2.0 * PI * freq * t).sin())
        .collect()
}

#[test]
fn convergence_time_matches_scan_on_decaying_oscillation() {
    let t = uniform_times(4000, 400.0);
    let x = decaying_signal(&t, 1.1, 0.5, 0.02, 0.19);
    let fast = convergence_time(&t, &x, 0.002).unwrap();
    assert_eq!(fast, brute_force_convergence(&t, &x, 0.002));
    assert!(fast.time().is_some());
}

#[test]
fn strouhal_peak_and_parseval() {
    let n = 1 << 14;
    let t = uniform_times(n, 400.0);
    let x: Vec<f64> = t.iter().map(|t| 0.8 * (2.0 * PI * 0.19 * t).sin()).collect();
    let s = psd(&t, &x, 2).unwrap();
    assert!((s.peak_frequency() - 0.19).abs() <= s.bin_width);
    let variance = x.iter().map(|v| v * v).sum::<f64>() / n as f64;
    assert!((s.integrated_power() - variance).abs() <= 0.05 * variance);
}

fn cylinder() -> Discretization {
    let b = ReferenceBasis::new(6).unwrap();
    let m = generate::annulus(&b, 16, 2, 1.0, 4.0, BoundaryTag::Wall, BoundaryTag::InflowOutflow).unwrap();
    Discretization::new(m, b).unwrap()
}

/// Velocity and pressure of a fixed analytic field, rotated by `phi`.
fn rotated_fields(d: &Discretization, phi: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (c, s) = (phi.cos(), phi.sin());
    let back = |x: f64, y: f64| (c * x + s * y, -s * x + c * y);
    let vel = |x: f64, y: f64| {
        let r = x.hypot(y);
        [(r - 1.0) * (1.0 + 0.3 * y), (r - 1.0) * 0.2 * x]
    };
    let u = d.sample(|x, y| {
        let (a, b) = back(x, y);
        let w = vel(a, b);
        c * w[0] - s * w[1]
    });
    let v = d.sample(|x, y| {
        let (a, b) = back(x, y);
        let w = vel(a, b);
        s * w[0] + c * w[1]
    });
    let p = d.sample(|x, y| {
        let (a, b) = back(x, y);
        0.4 * a - 0.7 * b + 0.1 * a * b
    });
    (u, v, p)
}

#[test]
fn force_coefficients_are_frame_invariant() {
    let d = cylinder();
    let base = FlowReference::new(0.01, 7.0, 2.0);
    let (u, v, p) = rotated_fields(&d, 0.0);
    let f0 = force_coefficients(&surface_coefficients(&d, &u, &v, &p, &base), &base).unwrap();
    for k in 1..4 {
        let phi = 2.0 * PI * k as f64 / 16.0;
        let r = FlowReference::new(0.01, 7.0 + phi.to_degrees(), 2.0);
        let (u, v, p) = rotated_fields(&d, phi);
        let f = force_coefficients(&surface_coefficients(&d, &u, &v, &p, &r), &r).unwrap();
        assert!((f.cl - f0.cl).abs() < 1e-10, "{} vs {}", f.cl, f0.cl);
        assert!((f.cd - f0.cd).abs() < 1e-10, "{} vs {}", f.cd, f0.cd);
    }
}

#[test]
fn q_criterion_is_galilean_invariant() {
    let d = cylinder();
    let u = d.sample(|x, y| (0.7 * x).sin() * y);
    let v = d.sample(|x, y| x * x - (0.3 * y).cos());
    let q0 = q_criterion_field(&d, &u, &v);
    let shift = |f: &[f64], c: f64| f.iter().map(|a| a + c).collect::<Vec<_>>();
    let q1 = q_criterion_field(&d, &shift(&u, 3.5), &shift(&v, -1.25));
    let scale = q0.iter().fold(0.0_f64, |m, q| m.max(q.abs()));
    let worst = q0.iter().zip(&q1).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-11 * scale, "{worst}");
}

fn series() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (64usize..400, prop::collection::vec(-1.0..1.0f64, 8), 0.5..5.0f64).prop_map(|(n, coef, t_end)| {
        let t = uniform_times(n, t_end);
        let x = t
            .iter()
            .map(|t| {
                coef.iter()
                    .enumerate()
                    .map(|(k, c)| c * (2.0 * PI * (k + 1) as f64 * t / t_end * 3.0).sin())
                    .sum::<f64>()
            })
            .collect();
        (t, x)
    })
}

proptest! {
    #[test]
    fn psd_scales_quadratically((t, x) in series(), a in -5.0..5.0f64) {
        prop_assume!(a.abs() > 1e-3);
        let s = psd(&t, &x, 2).unwrap();
        let xa: Vec<f64> = x.iter().map(|v| a * v).collect();
        let sa = psd(&t, &xa, 2).unwrap();
        let top = s.density.iter().fold(0.0_f64, |m, d| m.max(*d));
        for (p, q) in s.density.iter().zip(&sa.density) {
            prop_assert!((q - a * a * p).abs() <= 1e-10 * a * a * top);
        }
    }

    #[test]
    fn psd_ignores_offset_outside_zero_bin((t, x) in series(), c in -10.0..10.0f64) {
        let s = psd(&t, &x, 2).unwrap();
        let xc: Vec<f64> = x.iter().map(|v| v + c).collect();
        let sc = psd(&t, &xc, 2).unwrap();
        let top = s.density.iter().fold(0.0_f64, |m, d| m.max(*d)).max(1e-300);
        for (p, q) in s.density[1..].iter().zip(&sc.density[1..]) {
            prop_assert!((p - q).abs() <= 1e-9 * top.max(c * c));
        }
    }

    #[test]
    fn convergence_time_is_monotone_in_band(
        offset in 0.5..3.0f64,
        amp in 0.01..1.0f64,
        decay in 0.0..0.1f64,
        b1 in 1e-4..0.05f64,
        b2 in 1e-4..0.05f64,
    ) {
        let t = uniform_times(600, 120.0);
        let x = decaying_signal(&t, offset, amp, decay, 0.19);
        let (lo, hi) = if b1 < b2 { (b1, b2) } else { (b2, b1) };
        let tl = convergence_time(&t, &x, lo).unwrap();
        let th = convergence_time(&t, &x, hi).unwrap();
        prop_assert_eq!(tl, brute_force_convergence(&t, &x, lo));
        match (tl.time(), th.time()) {
            (Some(a), Some(b)) => prop_assert!(b <= a),
            (None, _) => {}
            (Some(_), None) => prop_assert!(false, "wider band did not converge"),
        }
    }

    #[test]
    fn histogram_percentages_sum_to_hundred(x in prop::collection::vec(-1e3..1e3f64, 1..300), bins in 1usize..64) {
        let h = histogram(&x, bins).unwrap();
        prop_assert_eq!(h.percent.len(), bins);
        prop_assert!((h.percent.iter().sum::<f64>() - 100.0).abs() < 1e-9);
    }
}
