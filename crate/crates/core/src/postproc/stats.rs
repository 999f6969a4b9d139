//! Running averages, convergence time, spectra and histograms of scalar
//! time series.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_series(t: &[f64], x: &[f64], min_len: usize) -> Result<()> {
    if t.len() != x.len() {
        return Err(Error::Parameter(format!(
            "time and value lengths differ ({} vs {})",
            t.len(),
            x.len()
        )));
    }
    if t.len() < min_len {
        return Err(Error::Parameter(format!("series needs at least {min_len} samples, got {}", t.len())));
    }
    if t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parameter("sample times must be strictly increasing".into()));
    }
    Ok(())
}

/// Time-weighted cumulative mean (trapezoidal rule); the first entry is `x[0]`.
pub fn running_average(t: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    check_series(t, x, 2)?;
    let mut out = Vec::with_capacity(x.len());
    out.push(x[0]);
    let mut integral = 0.0;
    for k in 1..x.len() {
        integral += 0.5 * (x[k] + x[k - 1]) * (t[k] - t[k - 1]);
        out.push(integral / (t[k] - t[0]));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Convergence {
    /// Earliest time after which the running mean stays in the band.
    At(f64),
    /// The running mean only enters the band at the last sample.
    NotConverged,
}

impl Convergence {
    pub fn time(self) -> Option<f64> {
        match self {
            Convergence::At(t) => Some(t),
            Convergence::NotConverged => None,
        }
    }
}

/// Earliest sample time after which the running mean stays within
/// `±band·|mean|` of the final mean.
pub fn convergence_time(t: &[f64], x: &[f64], band: f64) -> Result<Convergence> {
    if !(band >= 0.0) {
        return Err(Error::Parameter(format!("band must be nonnegative, got {band}")));
    }
    let avg = running_average(t, x)?;
    let last = avg.len() - 1;
    let mean = avg[last];
    let tol = band * mean.abs();
    let mut first_inside = last;
    for k in (0..last).rev() {
        if (avg[k] - mean).abs() <= tol {
            first_inside = k;
        } else {
            break;
        }
    }
    if first_inside == last {
        Ok(Convergence::NotConverged)
    } else {
        Ok(Convergence::At(t[first_inside]))
    }
}

/// Linear interpolation onto `n` uniformly spaced samples spanning the
/// original interval (mean sampling rate).
pub fn resample_uniform(t: &[f64], x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_series(t, x, 2)?;
    let n = t.len();
    let dt = (t[n - 1] - t[0]) / (n - 1) as f64;
    let mut ts = Vec::with_capacity(n);
    let mut xs = Vec::with_capacity(n);
    let mut seg = 0;
    for k in 0..n {
        let tk = if k == n - 1 { t[n - 1] } else { t[0] + k as f64 * dt };
        while seg + 2 < n && t[seg + 1] < tk {
            seg += 1;
        }
        let a = (tk - t[seg]) / (t[seg + 1] - t[seg]);
        ts.push(tk);
        xs.push(x[seg] + a.clamp(0.0, 1.0) * (x[seg + 1] - x[seg]));
    }
    Ok((ts, xs))
}

/// Whether sample spacing is uniform to a relative tolerance.
pub fn is_uniform(t: &[f64], rel_tol: f64) -> bool {
    if t.len() < 2 {
        return true;
    }
    let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    t.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= rel_tol * dt)
}

/// One-sided power spectral density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Frequency (a Strouhal number for unit chord and speed).
    pub frequency: Vec<f64>,
    pub density: Vec<f64>,
    pub bin_width: f64,
}

impl Spectrum {
    pub fn integrated_power(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.bin_width
    }

    pub fn peak_frequency(&self) -> f64 {
        let k = (1..self.density.len())
            .max_by(|&a, &b| self.density[a].total_cmp(&self.density[b]))
            .unwrap_or(0);
        self.frequency[k]
    }
}

/// Welch estimate from `segments` equal parts with 50% overlap: windows of
/// length `⌊n/segments⌋`, hop of half a window, periodic Hann weights.
///
/// Each window has its mean removed; the squared window means go to the zero
/// bin, so the density integrates to the mean square of the signal.
pub fn psd(t: &[f64], x: &[f64], segments: usize) -> Result<Spectrum> {
    check_series(t, x, 4)?;
    if segments < 2 {
        return Err(Error::Parameter(format!("need at least 2 segments, got {segments}")));
    }
    if !is_uniform(t, 1e-6) {
        return Err(Error::Parameter("non-uniform sampling; resample first".into()));
    }
    let n = x.len();
    let len = n / segments;
    if len < 2 {
        return Err(Error::Parameter(format!("{n} samples are too few for {segments} segments")));
    }
    let hop = (len / 2).max(1);
    let fs = (n - 1) as f64 / (t[n - 1] - t[0]);
    let window: Vec<f64> = (0..len)
        .map(|i| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / len as f64).cos()))
        .collect();
    let wpow: f64 = window.iter().map(|w| w * w).sum();
    let nbins = len / 2 + 1;
    let mut density = vec![0.0; nbins];
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(len);
    let mut count = 0usize;
    let mut start = 0;
    let df = fs / len as f64;
    while start + len <= n {
        let seg = &x[start..start + len];
        let mean = seg.iter().sum::<f64>() / len as f64;
        let mut buf: Vec<Complex<f64>> = seg
            .iter()
            .zip(&window)
            .map(|(v, w)| Complex::new((v - mean) * w, 0.0))
            .collect();
        fft.process(&mut buf);
        density[0] += mean * mean / df;
        for k in 1..nbins {
            let scale = if 2 * k == len { 1.0 } else { 2.0 };
            density[k] += scale * buf[k].norm_sqr() / (fs * wpow);
        }
        count += 1;
        start += hop;
    }
    for d in density.iter_mut() {
        *d /= count as f64;
    }
    Ok(Spectrum {
        frequency: (0..nbins).map(|k| k as f64 * df).collect(),
        density,
        bin_width: df,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` equally spaced edges.
    pub edges: Vec<f64>,
    /// Percent of samples per bin.
    pub percent: Vec<f64>,
}

/// Equal-width histogram over `[min, max]`; the top edge is inclusive.
pub fn histogram(x: &[f64], bins: usize) -> Result<Histogram> {
    if x.is_empty() {
        return Err(Error::Parameter("histogram needs at least one sample".into()));
    }
    if bins == 0 {
        return Err(Error::Parameter("histogram needs at least one bin".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("histogram input contains non-finite values".into()));
    }
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
    let width = (hi - lo) / bins as f64;
    let edges = (0..=bins)
        .map(|k| if k == bins { hi } else { lo + k as f64 * width })
        .collect();
    let mut counts = vec![0usize; bins];
    for &v in x {
        let k = (((v - lo) / width).floor() as usize).min(bins - 1);
        counts[k] += 1;
    }
    let total = x.len() as f64;
    Ok(Histogram {
        edges,
        percent: counts.iter().map(|&c| 100.0 * c as f64 / total).collect(),
    })
}
