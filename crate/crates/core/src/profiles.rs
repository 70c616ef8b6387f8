//! Closed-form background objects.
//!
//! ```text
//!   Theta(xi)        = erf( (1/2) sqrt(rho_bar/mu) xi )
//!   u_vs(x3, t)      = Theta( x3 / sqrt(t + age) ) u_bar          age = t0 (layer) or Lambda (auxiliary)
//!   omega(x3, t)     = sqrt(rho_bar / (pi mu s)) exp(-rho_bar x3^2 / (4 mu s)) (e3 x u_bar),   s = t + age
//!   theta(x3, t)     = sqrt(rho_bar) / (2 sqrt(pi mu s)) exp(-rho_bar x3^2 / (4 mu s)),        s = t + Lambda
//!   theta_pm(x3, t)  = theta(x3 -+ (a_bar/eps) s, t)
//! ```
//!
//! `theta` solves `d_t theta = (mu/rho_bar) d_3^2 theta`; the shifted waves add transport at
//! speed `+-a_bar/eps`. All three carry unit mass on the line.

use crate::domain::PhysParams;
use crate::jet::Jet;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Which age the self-similar layer is evaluated with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayerAge {
    /// The physical vortex layer, age `t0` at `t = 0`.
    Layer,
    /// The auxiliary layer, age `Lambda` at `t = 0`.
    Auxiliary,
}

impl LayerAge {
    pub fn value(self, p: &PhysParams) -> f64 {
        match self {
            LayerAge::Layer => p.t0,
            LayerAge::Auxiliary => p.big_lambda,
        }
    }
}

/// The error-function shear profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShearProfile {
    pub rho_bar: f64,
    pub mu: f64,
}

impl ShearProfile {
    pub fn new(p: &PhysParams) -> Self {
        ShearProfile { rho_bar: p.rho_bar, mu: p.mu }
    }

    fn scale(&self) -> f64 {
        0.5 * (self.rho_bar / self.mu).sqrt()
    }

    pub fn eval(&self, xi: f64) -> f64 {
        libm::erf(self.scale() * xi)
    }

    /// `Theta(x3 / sqrt(s))` as a jet in `x3`.
    pub fn jet(&self, x3: f64, s: f64) -> Jet {
        Jet::variable(x3).scale(self.scale() / s.sqrt()).erf()
    }
}

/// Branch of the diffusion-wave family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Center,
    /// Travels at `+a_bar/eps`.
    Plus,
    /// Travels at `-a_bar/eps`.
    Minus,
}

/// Unit-mass Gaussian, stationary or carried at the acoustic speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionWave {
    pub rho_bar: f64,
    pub mu: f64,
    pub big_lambda: f64,
    pub speed: f64,
}

impl DiffusionWave {
    pub fn new(p: &PhysParams, branch: Branch) -> Self {
        let speed = match branch {
            Branch::Center => 0.0,
            Branch::Plus => p.sound_speed(),
            Branch::Minus => -p.sound_speed(),
        };
        DiffusionWave { rho_bar: p.rho_bar, mu: p.mu, big_lambda: p.big_lambda, speed }
    }

    pub fn center(&self, t: f64) -> f64 {
        self.speed * (t + self.big_lambda)
    }

    /// Gaussian rate `rho_bar / (4 mu s)`.
    fn rate(&self, t: f64) -> f64 {
        self.rho_bar / (4.0 * self.mu * (t + self.big_lambda))
    }

    fn amplitude(&self, t: f64) -> f64 {
        self.rho_bar.sqrt() / (2.0 * (PI * self.mu * (t + self.big_lambda)).sqrt())
    }

    /// Standard deviation of the Gaussian.
    pub fn width(&self, t: f64) -> f64 {
        (2.0 * self.mu * (t + self.big_lambda) / self.rho_bar).sqrt()
    }

    pub fn eval(&self, x3: f64, t: f64) -> f64 {
        let y = x3 - self.center(t);
        self.amplitude(t) * (-self.rate(t) * y * y).exp()
    }

    pub fn jet(&self, x3: f64, t: f64) -> Jet {
        let y = Jet::variable(x3 - self.center(t));
        (y * y).scale(-self.rate(t)).exp().scale(self.amplitude(t))
    }

    pub fn peak(&self, t: f64) -> f64 {
        self.amplitude(t)
    }

    /// Exact mass inside `[-l, l]`.
    pub fn box_mass(&self, t: f64, l: f64) -> f64 {
        let a = self.rate(t).sqrt();
        let c = self.center(t);
        0.5 * (libm::erf(a * (l - c)) - libm::erf(a * (-l - c)))
    }
}

pub fn theta(xi: f64, p: &PhysParams) -> f64 {
    ShearProfile::new(p).eval(xi)
}

/// Tangential velocity of the self-similar layer; one entry per tangential direction.
pub fn vortex_layer_velocity(x3: f64, t: f64, p: &PhysParams, age: LayerAge) -> Vec<f64> {
    let s = t + age.value(p);
    let th = theta(x3 / s.sqrt(), p);
    p.u_bar.iter().map(|u| th * u).collect()
}

/// Vorticity of the layer: `Theta'`-weighted `e3 x u_bar`.
///
/// For `d = 1` the single entry is `d_3 u_1`; for `d = 2` the entries are the two tangential
/// components `(-d_3 u_2, d_3 u_1)` of the curl.
pub fn vortex_layer_vorticity(x3: f64, t: f64, p: &PhysParams, age: LayerAge) -> Vec<f64> {
    let s = t + age.value(p);
    let g = (p.rho_bar / (PI * p.mu * s)).sqrt() * (-p.rho_bar * x3 * x3 / (4.0 * p.mu * s)).exp();
    match p.u_bar.len() {
        1 => vec![g * p.u_bar[0]],
        _ => vec![-g * p.u_bar[1], g * p.u_bar[0]],
    }
}

pub fn diffusion_wave(x3: f64, t: f64, p: &PhysParams, branch: Branch) -> f64 {
    DiffusionWave::new(p, branch).eval(x3, t)
}
