use proptest::prelude::*;

use semflow::flow_solver::{solve_channel, ChannelClosure, ChannelSetup};
use semflow::turbulence::{
    benton_factor, ddes_length_scale, delay_function, evaluate_closure, DdesConstants, LocalClosureState,
    SstConstants,
};

#[test]
fn delay_function_shields_attached_boundary_layer() {
    let setup = ChannelSetup {
        intervals: 160,
        ..Default::default()
    };
    let prof = solve_channel(&setup, ChannelClosure::KTau).unwrap();
    assert!(prof.converged);
    let nu = 1.0 / prof.re_tau;
    let u_edge = 0.99 * prof.u.last().unwrap();
    let delta = prof.y[prof.u.iter().position(|&u| u >= u_edge).unwrap()];
    let (sst, ddes) = (SstConstants::default(), DdesConstants::default());
    let n = prof.y.len();
    let mut checked = 0;
    for i in 1..n - 1 {
        let y = prof.y[i];
        if y >= 0.5 * delta {
            break;
        }
        let shear = ((prof.u[i + 1] - prof.u[i - 1]) / (prof.y[i + 1] - prof.y[i - 1])).abs();
        let (f_d, _) = delay_function(prof.nu_t[i], nu, y, shear, shear, &sst, &ddes).unwrap();
        assert!(f_d < 0.1, "f_d = {f_d} at y/delta = {}", y / delta);
        checked += 1;
    }
    assert!(checked > 50);
}

#[test]
fn delay_function_releases_outside_shear_layer() {
    let (sst, ddes) = (SstConstants::default(), DdesConstants::default());
    // weak shear far from the wall: r_d ≪ 1
    let (f_d, r_d) = delay_function(1e-4, 1e-5, 2.0, 1.0, 1.0, &sst, &ddes).unwrap();
    assert!(r_d < 1e-3);
    assert!(f_d > 0.99);
}

fn closure_state() -> impl Strategy<Value = LocalClosureState> {
    (
        -8.0..1.0f64,
        -5.0..2.0f64,
        prop::array::uniform4(-10.0..10.0f64),
        -3.0..3.0f64,
        -4.0..0.0f64,
        -7.0..-2.0f64,
    )
        .prop_map(|(lk, lt, g, ls, ld, ln)| LocalClosureState {
            k: 10f64.powf(lk),
            tau: 10f64.powf(lt),
            grad_k: [g[0], g[1]],
            grad_tau: [g[2], g[3]],
            strain: 10f64.powf(ls),
            vorticity: 10f64.powf(ls),
            wall_distance: 10f64.powf(ld),
            nu: 10f64.powf(ln),
            rho: 1.0,
        })
}

proptest! {
    #[test]
    fn benton_factor_is_a_fraction(mu in 1e-8..1e-2f64, ratio in 1e-6..1e3f64) {
        let b = benton_factor(mu, ratio * mu);
        prop_assert!(b > 0.0 && b <= 1.0);
        prop_assert_eq!(b == 1.0, ratio >= 10.0);
    }

    #[test]
    fn ddes_length_is_bounded_and_monotone(
        k in 1e-8..10.0f64,
        tau in 1e-5..1e2f64,
        f1 in 0.0..1.0f64,
        f_d in 0.0..1.0f64,
        df in 0.0..1.0f64,
        h in 1e-5..1.0f64,
        dh in 1.0..4.0f64,
    ) {
        let (c, d) = (SstConstants::default(), DdesConstants::default());
        let a = ddes_length_scale(k, tau, f1, f_d, h, 1.0, &c, &d).unwrap();
        let slack = 4.0 * f64::EPSILON * a.l_rans;
        prop_assert!(a.l_ddes >= a.l_rans.min(a.l_les) - slack);
        prop_assert!(a.l_ddes <= a.l_rans + slack);
        let more_fd = ddes_length_scale(k, tau, f1, (f_d + df).min(1.0), h, 1.0, &c, &d).unwrap();
        prop_assert!(more_fd.l_ddes <= a.l_ddes + slack);
        let coarser = ddes_length_scale(k, tau, f1, f_d, h * dh, 1.0, &c, &d).unwrap();
        prop_assert!(coarser.l_ddes >= a.l_ddes - slack);
    }

    #[test]
    fn closure_outputs_are_finite_and_bounded(st in closure_state()) {
        let ev = evaluate_closure(&st, &SstConstants::default(), &DdesConstants::default()).unwrap();
        prop_assert!((0.0..=1.0).contains(&ev.blending.f1));
        prop_assert!((0.0..=1.0).contains(&ev.blending.f2));
        prop_assert!(ev.mu_t >= 0.0 && ev.mu_t <= st.k * st.tau * (1.0 + 1e-12));
        prop_assert!(ev.p_k >= 0.0);
        prop_assert!(ev.benton > 0.0 && ev.benton <= 1.0);
        prop_assert!(ev.source_k.is_finite() && ev.source_tau.is_finite());
    }

    #[test]
    fn eddy_viscosity_directional_derivative(st in closure_state(), dir in 0.1..1.0f64) {
        let (c, d) = (SstConstants::default(), DdesConstants::default());
        let f = |s: f64| {
            let mut x = st;
            x.k *= 1.0 + s;
            x.tau *= 1.0 + dir * s;
            evaluate_closure(&x, &c, &d).unwrap().mu_t
        };
        let h = 1e-7;
        let (m, p) = (f(-h), f(h));
        let central = (p - m) / (2.0 * h);
        let right = (p - f(0.0)) / h;
        let left = (f(0.0) - m) / h;
        // away from the limiter switch both one-sided slopes agree
        if (right - left).abs() <= 1e-3 * right.abs().max(left.abs()) {
            prop_assert!((central - right).abs() <= 1e-5 * central.abs().max(1e-300));
        }
    }
}
