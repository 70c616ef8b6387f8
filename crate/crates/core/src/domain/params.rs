use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Physical and scaling constants.
///
/// ```text
///   p(rho)        = rho^gamma
///   a_bar         = sqrt(p'(rho_bar)) = sqrt(gamma rho_bar^(gamma-1))
///   varpi(r1, r2) = p(r1) - p(r2) - p'(r2) (r1 - r2)
///   mu_tilde      = 2 mu + lambda
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysParams {
    pub rho_bar: f64,
    /// Tangential far-field velocity, one entry per tangential direction.
    pub u_bar: Vec<f64>,
    pub mu: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub eps: f64,
    /// Age of the vortex layer at `t = 0`.
    pub t0: f64,
    /// Age of the auxiliary layer at `t = 0`.
    #[serde(rename = "Lambda")]
    pub big_lambda: f64,
}

impl Default for PhysParams {
    fn default() -> Self {
        PhysParams {
            rho_bar: 1.0,
            u_bar: vec![1.0],
            mu: 0.01,
            lambda: 0.0,
            gamma: 1.4,
            eps: 0.1,
            t0: 1.0,
            big_lambda: 10.0,
        }
    }
}

impl PhysParams {
    pub fn validate(&self, d: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.u_bar.len() != d {
            return bad(format!("u_bar has {} components, grid has d = {d}", self.u_bar.len()));
        }
        if !(self.rho_bar > 0.0) {
            return bad(format!("rho_bar must be positive, got {}", self.rho_bar));
        }
        if !(self.mu > 0.0) {
            return bad(format!("mu must be positive, got {}", self.mu));
        }
        if !(self.mu + self.lambda >= 0.0) {
            return bad(format!("mu + lambda must be nonnegative, got {}", self.mu + self.lambda));
        }
        if !(self.gamma > 1.0) {
            return bad(format!("gamma must exceed 1, got {}", self.gamma));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return bad(format!("eps must lie in (0, 1], got {}", self.eps));
        }
        if !(self.t0 > 0.0) {
            return bad(format!("t0 must be positive, got {}", self.t0));
        }
        if !(self.big_lambda >= 1.0) {
            return bad(format!("Lambda must be >= 1, got {}", self.big_lambda));
        }
        if self.u_bar.iter().any(|u| !u.is_finite()) {
            return bad("u_bar must be finite".into());
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.u_bar.len()
    }

    pub fn u_bar_norm(&self) -> f64 {
        self.u_bar.iter().map(|u| u * u).sum::<f64>().sqrt()
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        rho.powf(self.gamma)
    }

    pub fn pressure_prime(&self, rho: f64) -> f64 {
        self.gamma * rho.powf(self.gamma - 1.0)
    }

    pub fn a_bar(&self) -> f64 {
        self.pressure_prime(self.rho_bar).sqrt()
    }

    /// Acoustic speed `a_bar / eps` of the scaled system.
    pub fn sound_speed(&self) -> f64 {
        self.a_bar() / self.eps
    }

    pub fn varpi(&self, r1: f64, r2: f64) -> f64 {
        self.pressure(r1) - self.pressure(r2) - self.pressure_prime(r2) * (r1 - r2)
    }

    pub fn mu_tilde(&self) -> f64 {
        2.0 * self.mu + self.lambda
    }

    /// `Lambda = max(c1 (|u_bar|^2 + m0), 1)`.
    pub fn lambda_rule(c1: f64, u_bar_norm: f64, m0: f64) -> f64 {
        (c1 * (u_bar_norm * u_bar_norm + m0)).max(1.0)
    }
}
