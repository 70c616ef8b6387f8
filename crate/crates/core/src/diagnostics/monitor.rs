use super::energy::EnergyReport;
use serde::{Deserialize, Serialize};

/// Which running constant scales a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scale {
    Nu,
    M,
    /// `M^{3/4} nu^{1/4}`.
    Mixed,
    One,
}

/// One inequality `quantity <= C scale (t+1)^rate`, or the minimum of two such branches.
#[derive(Debug, Clone, Copy)]
pub struct Bound {
    pub name: &'static str,
    pub quantity: fn(&EnergyReport) -> f64,
    pub branches: &'static [(Scale, f64)],
}

macro_rules! bound {
    ($name:expr, $q:expr, [$(($s:ident, $r:expr)),+]) => {
        Bound { name: $name, quantity: $q, branches: &[$((Scale::$s, $r)),+] }
    };
}

/// The monitored subset of the catalogue.
pub const CATALOGUE: &[Bound] = &[
    bound!("anti-l2-j0", |r| r.anti0.sqrt(), [(Nu, 0.25)]),
    bound!("anti-l2-j1", |r| r.anti1.sqrt(), [(Nu, -0.25)]),
    bound!("anti-l2-j2", |r| r.anti2.sqrt(), [(Nu, -0.75)]),
    bound!("zperp-l2-j0", |r| r.zp0.sqrt(), [(M, 0.25)]),
    bound!("zperp-l2-j1", |r| r.zp1.sqrt(), [(M, -0.25)]),
    bound!("zperp-l2-j2", |r| r.zp2.sqrt(), [(M, -0.75)]),
    bound!("md-h1", |r| r.md_h1, [(Nu, -0.25), (M, -0.75)]),
    bound!("pert-l2", |r| r.pert_l2, [(Nu, -0.25)]),
    bound!("anti-linf", |r| r.anti_linf, [(Nu, 0.0)]),
    bound!("anti-linf-d1", |r| r.d_anti_linf, [(Nu, -0.5)]),
    bound!("pert-linf", |r| r.pert_linf, [(Mixed, -0.5)]),
    bound!("perp-linf", |r| r.perp_linf, [(M, -0.5)]),
    bound!("zperp-linf-d1", |r| r.dzp_linf, [(One, -0.75), (One, -0.5)]),
];

fn scale_value(s: Scale, r: &EnergyReport) -> f64 {
    match s {
        Scale::Nu => r.nu,
        Scale::M => r.m,
        Scale::Mixed => r.m.powf(0.75) * r.nu.powf(0.25),
        Scale::One => 1.0,
    }
}

fn rate_factor(b: &Bound, r: &EnergyReport) -> f64 {
    b.branches
        .iter()
        .map(|&(s, rate)| scale_value(s, r) * (r.t + 1.0).powf(rate))
        .fold(f64::INFINITY, f64::min)
}

/// Fitted constant of one bound over a report stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundConstant {
    pub name: String,
    /// Running maximum of `quantity / rate factor`.
    pub constant: f64,
    /// Maximum over the first half of the samples.
    pub first_half: f64,
    /// `constant / first_half`; one when the first half already holds the maximum.
    pub growth: f64,
    /// `growth <= GROWTH_LIMIT` and the constant is finite.
    pub bounded: bool,
}

/// Allowed growth of a fitted constant over the second half of a run.
pub const GROWTH_LIMIT: f64 = 1.25;

/// Scale factors below this count as zero.
const TINY: f64 = 1e-300;

fn ratio(q: f64, f: f64) -> f64 {
    if q == 0.0 {
        0.0
    } else if f <= TINY {
        f64::INFINITY
    } else {
        q / f
    }
}

/// Fitted constants for every catalogue entry.
pub fn apriori_monitor(reports: &[EnergyReport]) -> Vec<BoundConstant> {
    CATALOGUE.iter().map(|b| monitor_one(b, reports)).collect()
}

pub fn monitor_one(b: &Bound, reports: &[EnergyReport]) -> BoundConstant {
    let ratios: Vec<f64> = reports.iter().map(|r| ratio((b.quantity)(r), rate_factor(b, r))).collect();
    let half = ratios.len().div_ceil(2);
    let first_half = ratios[..half].iter().copied().fold(0.0, f64::max);
    let constant = ratios.iter().copied().fold(0.0, f64::max);
    let growth = if constant == 0.0 { 1.0 } else { constant / first_half };
    BoundConstant {
        name: b.name.to_string(),
        constant,
        first_half,
        growth,
        bounded: constant.is_finite() && growth <= GROWTH_LIMIT,
    }
}

/// Relative spread `|a - b| / max(|a|, |b|)` of two fitted constants.
pub fn relative_spread(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m == 0.0 {
        0.0
    } else {
        (a - b).abs() / m
    }
}
