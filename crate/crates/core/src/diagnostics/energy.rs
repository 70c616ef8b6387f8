use super::perturbation::{build_antiderivatives, extract_perturbations, AntiDerivativeSet, PerturbationSet};
use super::{mach_metrics, MachMetrics};
use crate::ansatz::AnsatzSpec;
use crate::domain::{d_normal, derivative_norm_sq, nonzero_mode, Field, Profile};
use crate::error::Result;
use crate::profiles::{vortex_layer_velocity, LayerAge};
use crate::solver::State;
use serde::{Deserialize, Serialize};

/// Unweighted squared norms entering the two functionals.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyTerms {
    /// `|| d3^j (Phi, Z3) ||^2`, `j = 0, 1, 2`.
    pub anti: [f64; 3],
    /// `|| grad^j (phi_sharp, w_sharp) ||^2`, `j = 0, 1`.
    pub nonzero: [f64; 2],
    /// `|| d3^j Z_perp ||^2`, `j = 0, 1, 2`.
    pub z_perp: [f64; 3],
    /// `|| grad^2 (phi, w) ||_{H^1}^2`.
    pub high: f64,
}

fn profile_dnorm_sq(p: &Profile, j: usize) -> Result<f64> {
    Ok(d_normal(p, j)?.l2_norm().powi(2))
}

impl EnergyTerms {
    pub fn compute(ads: &AntiDerivativeSet, p: &PerturbationSet) -> Result<Self> {
        let d = p.d();
        let mut t = EnergyTerms::default();
        for j in 0..3 {
            t.anti[j] = profile_dnorm_sq(&ads.phi, j)? + profile_dnorm_sq(&ads.z[d], j)?;
            for z in &ads.z[..d] {
                t.z_perp[j] += profile_dnorm_sq(z, j)?;
            }
        }
        let mut sharp = vec![nonzero_mode(&p.phi)];
        sharp.extend(p.w.iter().map(nonzero_mode));
        for j in 0..2 {
            for f in &sharp {
                t.nonzero[j] += derivative_norm_sq(f, j)?;
            }
        }
        for f in std::iter::once(&p.phi).chain(&p.w) {
            t.high += derivative_norm_sq(f, 2)? + derivative_norm_sq(f, 3)?;
        }
        Ok(t)
    }

    pub fn star(&self, t: f64) -> f64 {
        let s = t + 1.0;
        self.anti[0] + s * self.anti[1] + s * s * self.anti[2] + self.nonzero[0] + s * self.nonzero[1]
    }

    pub fn full(&self, t: f64) -> f64 {
        let s = t + 1.0;
        self.star(t) + self.z_perp[0] + s * self.z_perp[1] + s * s * self.z_perp[2] + s * s * self.high
    }
}

pub fn energy_star(ads: &AntiDerivativeSet, p: &PerturbationSet, t: f64) -> Result<(f64, EnergyTerms)> {
    let terms = EnergyTerms::compute(ads, p)?;
    Ok((terms.star(t), terms))
}

pub fn energy_full(ads: &AntiDerivativeSet, p: &PerturbationSet, t: f64) -> Result<(f64, EnergyTerms)> {
    let terms = EnergyTerms::compute(ads, p)?;
    Ok((terms.full(t), terms))
}

/// Running suprema of `(t+1)^{-1/2} E*` and `(t+1)^{-1/2} E`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RunningMonitors {
    pub sup_star: f64,
    pub sup_full: f64,
}

impl RunningMonitors {
    pub fn update(&mut self, t: f64, e_star: f64, e_full: f64) {
        let w = (t + 1.0).powf(-0.5);
        self.sup_star = self.sup_star.max(w * e_star);
        self.sup_full = self.sup_full.max(w * e_full);
    }

    /// Running `nu`.
    pub fn nu(&self) -> f64 {
        self.sup_star.sqrt()
    }

    /// Running `M`, never below one.
    pub fn m(&self) -> f64 {
        self.sup_full.sqrt().max(1.0)
    }
}

/// One row of the diagnostics series. Field order is the CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyReport {
    pub t: f64,
    pub e_star: f64,
    pub e_full: f64,
    pub anti0: f64,
    pub anti1: f64,
    pub anti2: f64,
    pub md0: f64,
    pub md1: f64,
    pub zp0: f64,
    pub zp1: f64,
    pub zp2: f64,
    pub high: f64,
    /// Running `nu`.
    pub nu: f64,
    /// Running `M`.
    pub m: f64,
    /// `|| (b, v) ||_{L^inf}` against the layer.
    pub linf_bv: f64,
    /// `|| (phi_sharp, w_sharp) ||_{H^1}`.
    pub md_h1: f64,
    /// `|| (phi, psi3, w3) ||_{L^2}`.
    pub pert_l2: f64,
    /// `|| (phi, psi3, w3) ||_{L^inf}`.
    pub pert_linf: f64,
    /// `|| (psi_perp, w_perp) ||_{L^inf}`.
    pub perp_linf: f64,
    /// `|| (Phi, Psi3, Z3) ||_{L^inf}`.
    pub anti_linf: f64,
    /// `|| d3 (Phi, Psi3, Z3) ||_{L^inf}`.
    pub d_anti_linf: f64,
    /// `|| d3 Z_perp ||_{L^inf}`.
    pub dzp_linf: f64,
    /// `|| d3^2 Z_perp ||_{L^inf}`.
    pub d2zp_linf: f64,
    /// Largest anti-derivative endpoint, in mass units.
    pub mass_defect: f64,
    pub q_l2: f64,
    pub div_l2: f64,
}

/// CSV header in column order.
pub const REPORT_COLUMNS: [&str; 26] = [
    "t", "e_star", "e_full", "anti0", "anti1", "anti2", "md0", "md1", "zp0", "zp1", "zp2", "high", "nu",
    "m", "linf_bv", "md_h1", "pert_l2", "pert_linf", "perp_linf", "anti_linf", "d_anti_linf",
    "dzp_linf", "d2zp_linf", "mass_defect", "q_l2", "div_l2",
];

/// `|| (b, v) ||_{L^inf}` with `b = (rho - rho_bar)/eps` and `v = u - u_layer(t)`.
pub fn linf_bv(s: &State, spec: &AnsatzSpec) -> f64 {
    let p = &spec.params;
    let grid = *s.grid();
    let d = grid.d;
    let b = s.rho.map(|r| (r - p.rho_bar) / p.eps).max_abs();
    let u = s.velocity();
    let layer: Vec<Profile> = (0..d)
        .map(|i| Profile::from_fn(grid, |x3| vortex_layer_velocity(x3, s.t, p, LayerAge::Layer)[i]))
        .collect();
    let mut m = b.max(u[d].max_abs());
    for (ui, li) in u.iter().zip(&layer) {
        m = m.max(ui.zip_map(&Field::broadcast(li), |a, b| a - b).max_abs());
    }
    m
}

fn linf_of(fs: &[&Field]) -> f64 {
    fs.iter().map(|f| f.max_abs()).fold(0.0, f64::max)
}

fn plinf(ps: &[&Profile]) -> f64 {
    ps.iter().map(|p| p.max_abs()).fold(0.0, f64::max)
}

/// Stateful sampler accumulating the running monitors.
#[derive(Debug, Clone)]
pub struct Sampler {
    pub spec: AnsatzSpec,
    pub monitors: RunningMonitors,
}

impl Sampler {
    pub fn new(spec: AnsatzSpec) -> Self {
        Sampler { spec, monitors: RunningMonitors::default() }
    }

    pub fn sample(&mut self, s: &State) -> Result<EnergyReport> {
        let p = extract_perturbations(s, &self.spec);
        let ads = build_antiderivatives(&p);
        let terms = EnergyTerms::compute(&ads, &p)?;
        let t = s.t;
        let (e_star, e_full) = (terms.star(t), terms.full(t));
        self.monitors.update(t, e_star, e_full);
        let d = p.d();
        let MachMetrics { q_l2, div_l2 } = mach_metrics(s, &self.spec.params)?;

        let pert: [&Field; 3] = [&p.phi, &p.psi[d], &p.w[d]];
        let pert_l2 = pert.iter().map(|f| f.l2_norm_sq()).sum::<f64>().sqrt();
        let perp: Vec<&Field> = p.psi[..d].iter().chain(&p.w[..d]).collect();
        let anti = [&ads.phi, &ads.psi[d], &ads.z[d]];
        let d_anti: Vec<Profile> = anti.iter().map(|a| d_normal(*a, 1)).collect::<Result<_>>()?;
        let dzp: Vec<Profile> = ads.z[..d].iter().map(|z| d_normal(z, 1)).collect::<Result<_>>()?;
        let d2zp: Vec<Profile> = ads.z[..d].iter().map(|z| d_normal(z, 2)).collect::<Result<_>>()?;

        Ok(EnergyReport {
            t,
            e_star,
            e_full,
            anti0: terms.anti[0],
            anti1: terms.anti[1],
            anti2: terms.anti[2],
            md0: terms.nonzero[0],
            md1: terms.nonzero[1],
            zp0: terms.z_perp[0],
            zp1: terms.z_perp[1],
            zp2: terms.z_perp[2],
            high: terms.high,
            nu: self.monitors.nu(),
            m: self.monitors.m(),
            linf_bv: linf_bv(s, &self.spec),
            md_h1: (terms.nonzero[0] + terms.nonzero[1]).sqrt(),
            pert_l2,
            pert_linf: linf_of(&pert),
            perp_linf: linf_of(&perp),
            anti_linf: plinf(&anti),
            d_anti_linf: plinf(&d_anti.iter().collect::<Vec<_>>()),
            dzp_linf: plinf(&dzp.iter().collect::<Vec<_>>()),
            d2zp_linf: plinf(&d2zp.iter().collect::<Vec<_>>()),
            mass_defect: ads.endpoint_defect(p.eps),
            q_l2,
            div_l2,
        })
    }
}

pub fn write_reports_csv(w: impl std::io::Write, reports: &[EnergyReport]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in reports {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_reports_csv(r: impl std::io::Read) -> Result<Vec<EnergyReport>> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers()?.clone();
    if headers.iter().ne(REPORT_COLUMNS.iter().copied()) {
        return Err(crate::error::Error::Format(format!("unexpected series columns: {headers:?}")));
    }
    rd.deserialize().map(|r| r.map_err(Into::into)).collect()
}
