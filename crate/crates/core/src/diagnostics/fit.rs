use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Minimum number of samples a fit accepts.
pub const MIN_SAMPLES: usize = 8;

/// Least-squares power law `value ~ A (t + shift)^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    /// `ln A`.
    pub intercept: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
    /// Standard error of the exponent.
    pub stderr: f64,
    pub samples: usize,
    pub window: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Time offset inside the logarithm.
    pub shift: f64,
    /// Samples at or below `floor * max` are dropped instead of rejected.
    pub floor: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { shift: 1.0, floor: 0.0 }
    }
}

/// Slope of `ln value` against `ln(t + 1)` over `window`.
pub fn fit_decay(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    fit_decay_with(series, window, FitOptions::default())
}

pub fn fit_decay_with(series: &[(f64, f64)], window: (f64, f64), opts: FitOptions) -> Result<DecayFit> {
    let inside: Vec<(f64, f64)> =
        series.iter().copied().filter(|&(t, _)| t >= window.0 && t <= window.1).collect();
    let vmax = inside.iter().map(|s| s.1).fold(0.0, f64::max);
    let kept: Vec<(f64, f64)> = if opts.floor > 0.0 {
        inside.into_iter().filter(|&(_, v)| v > opts.floor * vmax).collect()
    } else {
        if let Some(&(t, v)) = inside.iter().find(|s| !(s.1 > 0.0)) {
            return Err(Error::NonPositiveSamples(format!("value {v} at t = {t}")));
        }
        inside
    };
    if kept.len() < MIN_SAMPLES {
        return Err(Error::NonPositiveSamples(format!(
            "{} usable samples in [{}, {}], need {MIN_SAMPLES}",
            kept.len(),
            window.0,
            window.1
        )));
    }
    let xs: Vec<f64> = kept.iter().map(|&(t, _)| (t + opts.shift).ln()).collect();
    let ys: Vec<f64> = kept.iter().map(|&(_, v)| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::NonPositiveSamples("all samples at one time".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = if kept.len() > 2 { (ss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(DecayFit {
        exponent: slope,
        intercept,
        residual: (ss / n).sqrt(),
        stderr,
        samples: kept.len(),
        window,
    })
}

/// Least squares `value ~ a (t+1)^p1 + b (t+1)^p2` over `window`; returns `(a, b, rms)`.
pub fn fit_two_term(series: &[(f64, f64)], window: (f64, f64), p1: f64, p2: f64) -> Result<(f64, f64, f64)> {
    let kept: Vec<(f64, f64)> =
        series.iter().copied().filter(|&(t, _)| t >= window.0 && t <= window.1).collect();
    if kept.len() < MIN_SAMPLES {
        return Err(Error::NonPositiveSamples(format!("{} samples in window", kept.len())));
    }
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(t, v) in &kept {
        let (f1, f2) = ((t + 1.0).powf(p1), (t + 1.0).powf(p2));
        s11 += f1 * f1;
        s12 += f1 * f2;
        s22 += f2 * f2;
        r1 += f1 * v;
        r2 += f2 * v;
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() <= f64::EPSILON * s11 * s22 {
        return Err(Error::NonPositiveSamples("degenerate two-term basis".into()));
    }
    let a = (r1 * s22 - r2 * s12) / det;
    let b = (s11 * r2 - s12 * r1) / det;
    let rms = (kept
        .iter()
        .map(|&(t, v)| (v - a * (t + 1.0).powf(p1) - b * (t + 1.0).powf(p2)).powi(2))
        .sum::<f64>()
        / kept.len() as f64)
        .sqrt();
    Ok((a, b, rms))
}
