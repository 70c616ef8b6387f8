//! Mass-matched planar ansatz built from the auxiliary layer and three diffusion waves.
//!
//! ```text
//!   rho~ = rho_bar + eps (a0 th_- + a3 th_+)
//!   m~3  = a_bar (a3 th_+ - a0 th_-)
//!   m~i  = rho_bar u~vs_i + ai th + eps u_bar_i (a3 th_+ - a0 th_-)
//! ```
//!
//! The amplitudes are fixed once, at `t = 0`, by requiring the perturbation to carry zero mass;
//! conservation then keeps it zero for all time. Vector components are ordered tangential
//! first, normal last.

use crate::domain::{
    d_normal, hs_alpha_norm_vec, hs_norm_sq, nonzero_mode, weighted_l2_norm, zero_mode, Field, Grid,
    PhysParams, Profile,
};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::profiles::{vortex_layer_velocity, Branch, DiffusionWave, LayerAge, ShearProfile};
use crate::solver::State;
use serde::{Deserialize, Serialize};

/// Initial perturbation `(b0, v0)` of the vortex layer aged `t0`.
#[derive(Debug, Clone)]
pub struct InitialPerturbation {
    pub b0: Field,
    /// `d + 1` components, normal last.
    pub v0: Vec<Field>,
}

impl InitialPerturbation {
    pub fn new(b0: Field, v0: Vec<Field>) -> Result<Self> {
        let grid = *b0.grid();
        if v0.len() != grid.d + 1 {
            return Err(Error::InvalidParams(format!(
                "velocity perturbation needs {} components, got {}",
                grid.d + 1,
                v0.len()
            )));
        }
        if v0.iter().any(|v| *v.grid() != grid) {
            return Err(Error::GridMismatch);
        }
        Ok(InitialPerturbation { b0, v0 })
    }

    pub fn zero(grid: Grid) -> Self {
        InitialPerturbation {
            b0: Field::zeros(grid),
            v0: (0..=grid.d).map(|_| Field::zeros(grid)).collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.b0.grid()
    }

    fn layer_shift(&self, p: &PhysParams, i: usize, age: LayerAge) -> Profile {
        Profile::from_fn(*self.grid(), |x3| vortex_layer_velocity(x3, 0.0, p, age)[i])
    }

    /// Full initial velocity `u^vs(., 0) + v0`.
    pub fn u0(&self, p: &PhysParams) -> Vec<Field> {
        let d = self.grid().d;
        (0..=d)
            .map(|i| {
                if i < d {
                    let mut f = Field::broadcast(&self.layer_shift(p, i, LayerAge::Layer));
                    f.axpy(1.0, &self.v0[i]);
                    f
                } else {
                    self.v0[i].clone()
                }
            })
            .collect()
    }

    /// Initial density `rho_bar + eps b0`.
    pub fn rho0(&self, p: &PhysParams) -> Field {
        self.b0.map(|b| p.rho_bar + p.eps * b)
    }

    /// Velocity perturbation relative to the auxiliary layer.
    pub fn v_tilde(&self, p: &PhysParams) -> Vec<Field> {
        let d = self.grid().d;
        (0..=d)
            .map(|i| {
                if i < d {
                    let shift = self
                        .layer_shift(p, i, LayerAge::Layer)
                        .zip_map(&self.layer_shift(p, i, LayerAge::Auxiliary), |a, b| a - b);
                    let mut f = Field::broadcast(&shift);
                    f.axpy(1.0, &self.v0[i]);
                    f
                } else {
                    self.v0[i].clone()
                }
            })
            .collect()
    }

    /// Momentum perturbation `rho_bar v~0 + eps b0 u0`.
    pub fn w_tilde(&self, p: &PhysParams) -> Vec<Field> {
        let u0 = self.u0(p);
        self.v_tilde(p)
            .iter()
            .zip(&u0)
            .map(|(v, u)| {
                let bu = self.b0.zip_map(u, |b, u| b * u);
                let mut w = v.scaled(p.rho_bar);
                w.axpy(p.eps, &bu);
                w
            })
            .collect()
    }

    /// `|| (b0, v0) ||_{H^3_{3/4}}`.
    pub fn m0(&self) -> Result<f64> {
        let mut all: Vec<&Field> = vec![&self.b0];
        all.extend(self.v0.iter());
        Ok(hs_alpha_norm_vec(&all, 3, 0.75)?.total)
    }

    /// `|| (b0, v03)_flat ||_{H^1_{3/4}} + || (b0, v0)_sharp ||_{H^1}`.
    pub fn chi(&self) -> Result<f64> {
        let v03 = self.v0.last().expect("at least one component");
        let flats = [zero_mode(&self.b0), zero_mode(v03)];
        let mut weighted = 0.0;
        let mut h1_flat = 0.0;
        for f in &flats {
            weighted += weighted_l2_norm(f, 0.75).powi(2);
            h1_flat += hs_norm_sq(&Field::broadcast(f), 1)?;
        }
        let mut sharp = hs_norm_sq(&nonzero_mode(&self.b0), 1)?;
        for v in &self.v0 {
            sharp += hs_norm_sq(&nonzero_mode(v), 1)?;
        }
        Ok(weighted.sqrt() + h1_flat.sqrt() + sharp.sqrt())
    }
}

/// Wave amplitudes: `alpha0` on the left-going branch, one per tangential direction on the
/// stationary wave, `alpha3` on the right-going branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alphas {
    pub alpha0: f64,
    pub tangential: Vec<f64>,
    pub alpha3: f64,
}

impl Alphas {
    pub fn zero(d: usize) -> Self {
        Alphas { alpha0: 0.0, tangential: vec![0.0; d], alpha3: 0.0 }
    }
}

/// Amplitudes that make `(eps b0, w~0)` and the ansatz perturbation carry equal mass.
pub fn compute_alphas(ip: &InitialPerturbation, p: &PhysParams) -> Alphas {
    let d = ip.grid().d;
    let a_bar = p.a_bar();
    let w = ip.w_tilde(p);
    let b_mass = zero_mode(&ip.b0).integral();
    let w_mass: Vec<f64> = w.iter().map(|f| zero_mode(f).integral()).collect();
    let w3 = w_mass[d];
    Alphas {
        alpha0: 0.5 * (b_mass - w3 / a_bar),
        tangential: (0..d).map(|i| w_mass[i] - p.eps * p.u_bar[i] * w3 / a_bar).collect(),
        alpha3: 0.5 * (b_mass + w3 / a_bar),
    }
}

/// Ansatz state at one point as jets in `x3`.
#[derive(Debug, Clone)]
pub struct AnsatzPoint {
    pub rho: Jet,
    pub m: Vec<Jet>,
    pub u: Vec<Jet>,
}

/// Error terms `F0` and `F` as jets in `x3`; valid through third derivatives.
#[derive(Debug, Clone)]
pub struct ErrorTerms {
    pub f0: Jet,
    pub f: Vec<Jet>,
}

impl ErrorTerms {
    /// `(d^j F0, d^j F)` at the expansion point.
    pub fn derivative(&self, j: usize) -> (f64, Vec<f64>) {
        (self.f0.derivative(j), self.f.iter().map(|f| f.derivative(j)).collect())
    }

    /// `|d^j F0| + |d^j F|`, Euclidean over the components of `F`.
    pub fn magnitude(&self, j: usize) -> f64 {
        let (f0, f) = self.derivative(j);
        f0.abs() + f.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Sampled ansatz on a grid at one time.
#[derive(Debug, Clone)]
pub struct AnsatzProfiles {
    pub rho: Profile,
    pub m: Vec<Profile>,
    pub u: Vec<Profile>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzSpec {
    pub alphas: Alphas,
    pub params: PhysParams,
}

#[derive(Serialize, Deserialize)]
struct AnsatzRecord {
    version: u32,
    alphas: Alphas,
    params: PhysParams,
}

/// Validates amplitudes against the density floor `rho~ >= rho_bar / 2`.
pub fn build_ansatz(alphas: Alphas, params: &PhysParams) -> Result<AnsatzSpec> {
    params.validate(params.d())?;
    if alphas.tangential.len() != params.d() {
        return Err(Error::InvalidParams(format!(
            "{} tangential amplitudes for d = {}",
            alphas.tangential.len(),
            params.d()
        )));
    }
    let peak = DiffusionWave::new(params, Branch::Center).peak(0.0);
    let dip = params.eps * (alphas.alpha0.abs() + alphas.alpha3.abs()) * peak;
    if dip > params.rho_bar / 2.0 {
        return Err(Error::DensityFloorViolation {
            min: params.rho_bar - dip,
            floor: params.rho_bar / 2.0,
        });
    }
    Ok(AnsatzSpec { alphas, params: params.clone() })
}

impl AnsatzSpec {
    pub fn d(&self) -> usize {
        self.params.d()
    }

    fn waves(&self) -> [DiffusionWave; 3] {
        let p = &self.params;
        [
            DiffusionWave::new(p, Branch::Minus),
            DiffusionWave::new(p, Branch::Center),
            DiffusionWave::new(p, Branch::Plus),
        ]
    }

    /// Auxiliary layer velocity `u~vs_i` as a jet.
    fn layer_jet(&self, x3: f64, t: f64) -> Jet {
        ShearProfile::new(&self.params).jet(x3, t + self.params.big_lambda)
    }

    pub fn eval(&self, x3: f64, t: f64) -> AnsatzPoint {
        let p = &self.params;
        let a = &self.alphas;
        let [wm, wc, wp] = self.waves();
        let (tm, tc, tp) = (wm.jet(x3, t), wc.jet(x3, t), wp.jet(x3, t));
        let theta = self.layer_jet(x3, t);
        let rho = (tm * a.alpha0 + tp * a.alpha3) * p.eps + p.rho_bar;
        let odd = tp * a.alpha3 - tm * a.alpha0;
        let mut m: Vec<Jet> = (0..self.d())
            .map(|i| theta * (p.rho_bar * p.u_bar[i]) + tc * a.tangential[i] + odd * (p.eps * p.u_bar[i]))
            .collect();
        m.push(odd * p.a_bar());
        let u = m.iter().map(|mi| *mi / rho).collect();
        AnsatzPoint { rho, m, u }
    }

    pub fn error_terms(&self, x3: f64, t: f64) -> ErrorTerms {
        let p = &self.params;
        let a = &self.alphas;
        let d = self.d();
        let nu = p.mu / p.rho_bar;
        let a_bar = p.a_bar();
        let [wm, wc, wp] = self.waves();
        let (tm, tc, tp) = (wm.jet(x3, t), wc.jet(x3, t), wp.jet(x3, t));
        let pt = self.eval(x3, t);
        let theta = self.layer_jet(x3, t);
        let d_odd = (tp * a.alpha3 - tm * a.alpha0).deriv();
        let even = tm * a.alpha0 + tp * a.alpha3;

        let f0 = even.deriv() * nu;
        let m3 = pt.m[d];
        let mut f: Vec<Jet> = (0..d)
            .map(|i| {
                let dev = pt.u[i] - theta * p.u_bar[i];
                (tc.deriv() * (a.tangential[i] / p.rho_bar) - dev.deriv()) * p.mu
                    + (m3 * pt.m[i] / pt.rho - even * (a_bar * p.u_bar[i]))
                    + d_odd * (p.eps * nu * p.u_bar[i])
            })
            .collect();
        let varpi = self.varpi_jet(pt.rho);
        f.push(
            m3 * m3 / pt.rho + varpi * (p.eps * p.eps).recip() + d_odd * (nu * a_bar)
                - pt.u[d].deriv() * p.mu_tilde(),
        );
        ErrorTerms { f0, f }
    }

    fn varpi_jet(&self, rho: Jet) -> Jet {
        let p = &self.params;
        let rb = p.rho_bar;
        rho.powf(p.gamma) - (rho + (-rb)) * p.pressure_prime(rb) + (-p.pressure(rb))
    }

    pub fn profiles(&self, grid: &Grid, t: f64) -> AnsatzProfiles {
        let d = self.d();
        let pts: Vec<AnsatzPoint> = grid.x3_nodes().iter().map(|&x| self.eval(x, t)).collect();
        let mk = |f: &dyn Fn(&AnsatzPoint) -> f64| {
            Profile::from_values(*grid, pts.iter().map(f).collect())
                .expect("ansatz values are finite")
        };
        AnsatzProfiles {
            rho: mk(&|q| q.rho.value()),
            m: (0..=d).map(|i| mk(&|q| q.m[i].value())).collect(),
            u: (0..=d).map(|i| mk(&|q| q.u[i].value())).collect(),
        }
    }

    /// Acoustic branches are well separated from the layer: each travelling centre sits at
    /// least five combined widths away from the origin.
    pub fn branches_separated(&self, t: f64) -> bool {
        let w = DiffusionWave::new(&self.params, Branch::Plus);
        let s = t + self.params.big_lambda;
        let layer = 2.0 * (self.params.mu * s / self.params.rho_bar).sqrt();
        w.center(t).abs() > 5.0 * (w.width(t) + layer)
    }

    /// Mass of the two acoustic waves inside `[-l, l]`.
    pub fn acoustic_box_mass(&self, t: f64, l: f64) -> [f64; 2] {
        let [wm, _, wp] = self.waves();
        [wm.box_mass(t, l), wp.box_mass(t, l)]
    }

    pub fn to_toml(&self) -> String {
        let rec = AnsatzRecord { version: 1, alphas: self.alphas.clone(), params: self.params.clone() };
        toml::to_string(&rec).expect("ansatz record serializes")
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        let rec: AnsatzRecord = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        if rec.version != 1 {
            return Err(Error::Config(format!("unsupported ansatz record version {}", rec.version)));
        }
        build_ansatz(rec.alphas, &rec.params)
    }
}

/// Step of the fourth-order central difference in time used by [`residual_defect`].
pub const RESIDUAL_DT: f64 = 1e-3;

/// Largest interior gap between the finite-difference residual of the compressible system
/// evaluated on the ansatz and the closed forms `(eps d3 F0, d3 F)`.
///
/// Time derivatives use a five-point central difference with step [`RESIDUAL_DT`]; normal
/// derivatives use the grid operators. Only nodes at least `margin` cells from either edge count.
pub fn residual_defect(spec: &AnsatzSpec, grid: &Grid, t: f64, margin: usize) -> Result<f64> {
    let p = &spec.params;
    let d = spec.d();
    let n = grid.n_normal();
    let dt = RESIDUAL_DT;
    let at = |s: f64| spec.profiles(grid, s);
    let (pm2, pm1, pp1, pp2) = (at(t - 2.0 * dt), at(t - dt), at(t + dt), at(t + 2.0 * dt));
    let ddt = |f: &dyn Fn(&AnsatzProfiles) -> &Profile| {
        let (a, b, c, e) = (f(&pm2).values(), f(&pm1).values(), f(&pp1).values(), f(&pp2).values());
        (0..n).map(|j| (a[j] - 8.0 * b[j] + 8.0 * c[j] - e[j]) / (12.0 * dt)).collect::<Vec<f64>>()
    };
    let now = at(t);
    let x = grid.x3_nodes();
    let terms: Vec<ErrorTerms> = x.iter().map(|&x3| spec.error_terms(x3, t)).collect();
    let u3 = &now.u[d];
    let dmu3 = |f: &Profile| d_normal(&u3.zip_map(f, |a, b| a * b), 1);

    let mut res: Vec<Vec<f64>> = Vec::with_capacity(d + 2);
    let dm3 = d_normal(&now.m[d], 1)?;
    let r0 = ddt(&|q| &q.rho);
    res.push((0..n).map(|j| r0[j] + dm3.values()[j] - p.eps * terms[j].f0.derivative(1)).collect());
    for i in 0..d {
        let conv = dmu3(&now.m[i])?;
        let visc = d_normal(&now.u[i], 2)?;
        let rt = ddt(&|q| &q.m[i]);
        res.push(
            (0..n)
                .map(|j| rt[j] + conv.values()[j] - p.mu * visc.values()[j] - terms[j].f[i].derivative(1))
                .collect(),
        );
    }
    let conv = dmu3(&now.m[d])?;
    let visc = d_normal(u3, 2)?;
    let dp = d_normal(&now.rho.map(|r| p.pressure(r)), 1)?;
    let r3 = ddt(&|q| &q.m[d]);
    let inv_eps2 = (p.eps * p.eps).recip();
    res.push(
        (0..n)
            .map(|j| {
                r3[j] + conv.values()[j] + inv_eps2 * dp.values()[j] - p.mu_tilde() * visc.values()[j]
                    - terms[j].f[d].derivative(1)
            })
            .collect(),
    );
    let inner = margin.min(n / 2)..n - margin.min(n / 2);
    Ok(res.iter().flat_map(|r| r[inner.clone()].iter()).fold(0.0, |m: f64, v| m.max(v.abs())))
}

pub fn ansatz_error_terms(spec: &AnsatzSpec, x3: f64, t: f64) -> ErrorTerms {
    spec.error_terms(x3, t)
}

/// Box integrals of the zero-mode perturbation and the accounting flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassDefect {
    /// `int (rho_flat - rho~)`, then `int (m_flat - m~)` per component, normal last.
    pub components: Vec<f64>,
    /// One of the acoustic waves has lost mass through the box edge.
    pub acoustic_exited: bool,
    /// The perturbation is non-negligible within five cells of either edge.
    pub signal_at_boundary: bool,
}

impl MassDefect {
    pub fn max_abs(&self) -> f64 {
        self.components.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Mass accounting is meaningful: nothing has reached or left the box.
    pub fn trustworthy(&self) -> bool {
        !self.acoustic_exited && !self.signal_at_boundary
    }
}

const EDGE_CELLS: usize = 5;
const EDGE_TOL: f64 = 1e-8;
const EXIT_TOL: f64 = 1e-10;

pub fn zero_mass_check(state: &State, spec: &AnsatzSpec, t: f64) -> MassDefect {
    let grid = *state.rho.grid();
    let ap = spec.profiles(&grid, t);
    let mut diffs = vec![zero_mode(&state.rho).zip_map(&ap.rho, |a, b| a - b)];
    for (m, mt) in state.m.iter().zip(&ap.m) {
        diffs.push(zero_mode(m).zip_map(mt, |a, b| a - b));
    }
    let components = diffs.iter().map(|p| p.integral()).collect();

    let n = grid.n_normal();
    let scale = diffs.iter().map(|p| p.max_abs()).fold(0.0, f64::max);
    let edge = diffs
        .iter()
        .flat_map(|p| {
            let v = p.values();
            v[..EDGE_CELLS].iter().chain(&v[n - EDGE_CELLS..]).copied().collect::<Vec<_>>()
        })
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let signal_at_boundary = edge > EDGE_TOL * scale.max(1e-300) && edge > 1e-14;

    let [left, right] = spec.acoustic_box_mass(t, grid.l);
    let a = &spec.alphas;
    let acoustic_exited = (a.alpha0 != 0.0 && left < 1.0 - EXIT_TOL)
        || (a.alpha3 != 0.0 && right < 1.0 - EXIT_TOL);
    MassDefect { components, acoustic_exited, signal_at_boundary }
}

/// `exp(-c y^2/s)` summed over the stationary and the two acoustic centres.
pub fn envelope(spec: &AnsatzSpec, x3: f64, t: f64, c: f64) -> f64 {
    let s = t + spec.params.big_lambda;
    let cs = spec.params.sound_speed() * s;
    [x3, x3 + cs, x3 - cs].iter().map(|y| (-c * y * y / s).exp()).sum()
}

/// Squared scaled distance to the nearest of the three centres.
fn nearest_scaled_distance(spec: &AnsatzSpec, x3: f64, t: f64) -> f64 {
    let s = t + spec.params.big_lambda;
    let cs = spec.params.sound_speed() * s;
    [x3, x3 + cs, x3 - cs].iter().map(|y| y * y / s).fold(f64::INFINITY, f64::min)
}

/// Which inequality an envelope constant belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnvelopeBound {
    /// `|d^j F0| + |d^j F| <= K (t+Lambda)^{-(2+j)/2} E`.
    ErrorTerms,
    /// `|d^j (rho~ - rho_bar)|/eps + |d^j m~3| + |d^j u~3| <= K (t+Lambda)^{-(1+j)/2} E`.
    Acoustic,
    /// `|d^j (m~perp - rho_bar u~vs)| + |d^j (u~perp - u~vs)| <= K (t+Lambda)^{-(1+j)/2} E`.
    TangentialDeviation,
    /// `|d^{j+1} m~perp| + |d^{j+1} u~perp| <= K (t+Lambda)^{-(1+j)/2} E`.
    TangentialGradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeConstant {
    pub bound: EnvelopeBound,
    pub j: usize,
    /// Smallest `K` for which the inequality holds on every sample.
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    /// Gaussian rate used in the envelope.
    pub c: f64,
    /// Rate read off the error-term tails before the safety halving.
    pub c_empirical: f64,
    pub constants: Vec<EnvelopeConstant>,
}

impl EnvelopeFit {
    pub fn constant(&self, bound: EnvelopeBound, j: usize) -> Option<f64> {
        self.constants.iter().find(|k| k.bound == bound && k.j == j).map(|k| k.constant)
    }
}

/// Tail rate of `|F|` in the scaled distance `y^2/(t+Lambda)`: the smallest
/// `-log(|F|/max|F|) / y2` over tail samples. Falls back to the heat-kernel rate when `F = 0`.
pub fn empirical_envelope_rate(spec: &AnsatzSpec, x3: &[f64], t_samples: &[f64]) -> f64 {
    let heat = spec.params.rho_bar / (4.0 * spec.params.mu);
    let mut c_emp = f64::INFINITY;
    for &t in t_samples {
        let vals: Vec<f64> = x3.iter().map(|&x| spec.error_terms(x, t).magnitude(0)).collect();
        let peak = vals.iter().copied().fold(0.0, f64::max);
        if peak == 0.0 {
            continue;
        }
        for (&x, &v) in x3.iter().zip(&vals) {
            let y2 = nearest_scaled_distance(spec, x, t);
            if y2 < 4.0 || v < 1e-250 {
                continue;
            }
            c_emp = c_emp.min(-(v / peak).ln() / y2);
        }
    }
    if c_emp.is_finite() && c_emp > 0.0 {
        c_emp
    } else {
        heat
    }
}

/// Fitted constants of the pointwise ansatz bounds for `j in 0..=2`.
///
/// `c` overrides the envelope rate; by default it is half the empirical tail rate.
pub fn envelope_bound_monitor(
    spec: &AnsatzSpec,
    x3: &[f64],
    t_samples: &[f64],
    c: Option<f64>,
) -> EnvelopeFit {
    let c_empirical = empirical_envelope_rate(spec, x3, t_samples);
    let c = c.unwrap_or(0.5 * c_empirical);
    let p = &spec.params;
    let d = spec.d();
    let bounds = [
        EnvelopeBound::ErrorTerms,
        EnvelopeBound::Acoustic,
        EnvelopeBound::TangentialDeviation,
        EnvelopeBound::TangentialGradient,
    ];
    let mut constants = Vec::new();
    for bound in bounds {
        for j in 0..=2 {
            let mut k: f64 = 0.0;
            for &t in t_samples {
                let s = t + p.big_lambda;
                let rate = match bound {
                    EnvelopeBound::ErrorTerms => s.powf(-(2.0 + j as f64) / 2.0),
                    _ => s.powf(-(1.0 + j as f64) / 2.0),
                };
                for &x in x3 {
                    let env = envelope(spec, x, t, c);
                    if env < 1e-280 {
                        continue;
                    }
                    let q = bound_quantity(spec, bound, j, x, t, d);
                    k = k.max(q / (rate * env));
                }
            }
            constants.push(EnvelopeConstant { bound, j, constant: k });
        }
    }
    EnvelopeFit { c, c_empirical, constants }
}

fn bound_quantity(spec: &AnsatzSpec, bound: EnvelopeBound, j: usize, x: f64, t: f64, d: usize) -> f64 {
    let p = &spec.params;
    match bound {
        EnvelopeBound::ErrorTerms => spec.error_terms(x, t).magnitude(j),
        EnvelopeBound::Acoustic => {
            let pt = spec.eval(x, t);
            (pt.rho + (-p.rho_bar)).derivative(j).abs() / p.eps
                + pt.m[d].derivative(j).abs()
                + pt.u[d].derivative(j).abs()
        }
        EnvelopeBound::TangentialDeviation => {
            let pt = spec.eval(x, t);
            let theta = spec.layer_jet(x, t);
            let (mut dm, mut du) = (0.0, 0.0);
            for i in 0..d {
                let vs = theta * p.u_bar[i];
                dm += (pt.m[i] - vs * p.rho_bar).derivative(j).powi(2);
                du += (pt.u[i] - vs).derivative(j).powi(2);
            }
            dm.sqrt() + du.sqrt()
        }
        EnvelopeBound::TangentialGradient => {
            let pt = spec.eval(x, t);
            let (mut dm, mut du) = (0.0, 0.0);
            for i in 0..d {
                dm += pt.m[i].derivative(j + 1).powi(2);
                du += pt.u[i].derivative(j + 1).powi(2);
            }
            dm.sqrt() + du.sqrt()
        }
    }
}
