use crate::ansatz::{AnsatzProfiles, AnsatzSpec};
use crate::domain::{antiderivative, d_normal, nonzero_mode, zero_mode, Field, Grid, Profile};
use crate::error::{Error, Result};
use crate::solver::State;

/// Perturbations of a state about the ansatz at the state's time.
#[derive(Debug, Clone)]
pub struct PerturbationSet {
    pub t: f64,
    pub eps: f64,
    /// `(rho - rho_tilde) / eps`.
    pub phi: Field,
    /// `m - m_tilde`, normal component last.
    pub psi: Vec<Field>,
    /// `u - u_tilde`.
    pub zeta: Vec<Field>,
    /// `psi - eps u_tilde phi`.
    pub w: Vec<Field>,
    pub reference: AnsatzProfiles,
}

pub fn extract_perturbations(s: &State, spec: &AnsatzSpec) -> PerturbationSet {
    let grid = *s.grid();
    let eps = spec.params.eps;
    let reference = spec.profiles(&grid, s.t);
    let rho_t = Field::broadcast(&reference.rho);
    let phi = s.rho.zip_map(&rho_t, |r, rt| (r - rt) / eps);
    let psi: Vec<Field> = s
        .m
        .iter()
        .zip(&reference.m)
        .map(|(m, mt)| m.zip_map(&Field::broadcast(mt), |a, b| a - b))
        .collect();
    let u = s.velocity();
    let zeta: Vec<Field> = u
        .iter()
        .zip(&reference.u)
        .map(|(ui, ut)| ui.zip_map(&Field::broadcast(ut), |a, b| a - b))
        .collect();
    let w: Vec<Field> = psi
        .iter()
        .zip(&reference.u)
        .map(|(p, ut)| {
            let mut out = p.clone();
            out.axpy(-eps, &phi.mul_profile(ut));
            out
        })
        .collect();
    PerturbationSet { t: s.t, eps, phi, psi, zeta, w, reference }
}

impl PerturbationSet {
    pub fn grid(&self) -> &Grid {
        self.phi.grid()
    }

    /// Number of tangential components.
    pub fn d(&self) -> usize {
        self.psi.len() - 1
    }

    /// `max |zeta - w / rho|` with `rho = rho_tilde + eps phi`.
    pub fn zeta_defect(&self) -> f64 {
        let rho = self.density();
        self.zeta
            .iter()
            .zip(&self.w)
            .map(|(z, w)| {
                let wr = w.zip_map(&rho, |a, r| a / r);
                z.zip_map(&wr, |a, b| a - b).max_abs()
            })
            .fold(0.0, f64::max)
    }

    fn density(&self) -> Field {
        let mut rho = Field::broadcast(&self.reference.rho);
        rho.axpy(self.eps, &self.phi);
        rho
    }

    /// Defects of the zero-mode and non-zero-mode splittings of `w`, per component.
    ///
    /// ```text
    ///   w_flat  = rho_t zeta_flat  + eps phi_flat zeta_flat + eps (phi_sharp zeta_sharp)_flat
    ///   w_sharp = rho_t zeta_sharp + eps [phi_flat zeta_sharp + phi_sharp zeta_flat + (phi_sharp zeta_sharp)_sharp]
    /// ```
    pub fn splitting_defects(&self) -> (f64, f64) {
        let eps = self.eps;
        let rt = &self.reference.rho;
        let phi_f = zero_mode(&self.phi);
        let phi_s = nonzero_mode(&self.phi);
        let mut od: f64 = 0.0;
        let mut md: f64 = 0.0;
        for (w, z) in self.w.iter().zip(&self.zeta) {
            let z_f = zero_mode(z);
            let z_s = nonzero_mode(z);
            let cross = phi_s.zip_map(&z_s, |a, b| a * b);
            let cross_f = zero_mode(&cross);
            let cross_s = nonzero_mode(&cross);

            let lhs = zero_mode(w);
            let coef = rt.zip_map(&phi_f, |r, p| r + eps * p);
            let rhs = coef.zip_map(&z_f, |c, z| c * z).zip_map(&cross_f, |a, b| a + eps * b);
            od = od.max(lhs.zip_map(&rhs, |a, b| a - b).max_abs());

            let lhs = nonzero_mode(w);
            let mut rhs = z_s.mul_profile(rt);
            rhs.axpy(eps, &z_s.mul_profile(&phi_f));
            rhs.axpy(eps, &phi_s.mul_profile(&z_f));
            rhs.axpy(eps, &cross_s);
            md = md.max(lhs.zip_map(&rhs, |a, b| a - b).max_abs());
        }
        (od, md)
    }

    /// True when every perturbation field vanishes to `tol`.
    pub fn is_negligible(&self, tol: f64) -> bool {
        self.phi.max_abs() <= tol && self.psi.iter().all(|f| f.max_abs() <= tol)
    }
}

/// Cumulative normal integrals of the zero-mode perturbations.
#[derive(Debug, Clone)]
pub struct AntiDerivativeSet {
    pub phi: Profile,
    pub psi: Vec<Profile>,
    /// `Psi - eps u_tilde Phi`.
    pub z: Vec<Profile>,
    /// Values at the right end of the box: `Phi(L)` then `Psi_i(L)`.
    pub endpoints: Vec<f64>,
}

impl AntiDerivativeSet {
    /// Largest endpoint value, in units of `eps Phi` for the density so all entries are masses.
    pub fn endpoint_defect(&self, eps: f64) -> f64 {
        let mut m = (eps * self.endpoints[0]).abs();
        for v in &self.endpoints[1..] {
            m = m.max(v.abs());
        }
        m
    }

    /// `ZeroMassViolated` when the endpoint drift exceeds `threshold`.
    pub fn check_zero_mass(&self, eps: f64, threshold: f64) -> Result<()> {
        let defect = self.endpoint_defect(eps);
        if defect > threshold {
            Err(Error::ZeroMassViolated { defect, threshold })
        } else {
            Ok(())
        }
    }

    /// `Z` rebuilt from `w_flat` as `int (w_flat - eps d3 u_tilde Phi)`.
    pub fn z_from_w(&self, p: &PerturbationSet) -> Result<Vec<Profile>> {
        let eps = p.eps;
        p.w.iter()
            .zip(&p.reference.u)
            .map(|(w, ut)| {
                let du = d_normal(ut, 1)?;
                let integrand = zero_mode(w).zip_map(&du.zip_map(&self.phi, |a, b| a * b), |a, b| a - eps * b);
                Ok(antiderivative(&integrand))
            })
            .collect()
    }
}

pub fn build_antiderivatives(p: &PerturbationSet) -> AntiDerivativeSet {
    let phi = antiderivative(&zero_mode(&p.phi));
    let psi: Vec<Profile> = p.psi.iter().map(|f| antiderivative(&zero_mode(f))).collect();
    let z = psi
        .iter()
        .zip(&p.reference.u)
        .map(|(ps, ut)| ps.zip_map(&ut.zip_map(&phi, |u, f| u * f), |a, b| a - p.eps * b))
        .collect();
    let last = p.grid().n_normal() - 1;
    let mut endpoints = vec![phi.values()[last]];
    endpoints.extend(psi.iter().map(|f| f.values()[last]));
    AntiDerivativeSet { phi, psi, z, endpoints }
}
