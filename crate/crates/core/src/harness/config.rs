use crate::domain::{Grid, PhysParams};
use crate::error::{Error, Result};
use crate::solver::SolverConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// Schema version written into every config and record.
pub const CONFIG_VERSION: u32 = 1;

/// Shape of the initial perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Tangentially modulated bumps; density carries a small zero mode.
    NonzeroBump,
    /// Small modulated density plus the tangential zero-mode channel.
    TangentialZeromode,
    /// Right-going acoustic Gaussian in `(b0, v03)`.
    AcousticPulse,
    /// `nonzero-bump` plus `acoustic-pulse`.
    Mixed,
}

impl Family {
    pub const ALL: [Family; 4] =
        [Family::NonzeroBump, Family::TangentialZeromode, Family::AcousticPulse, Family::Mixed];

    pub fn name(self) -> &'static str {
        match self {
            Family::NonzeroBump => "nonzero-bump",
            Family::TangentialZeromode => "tangential-zeromode",
            Family::AcousticPulse => "acoustic-pulse",
            Family::Mixed => "mixed",
        }
    }
}

/// Initial-data selector. The two amplitudes feed the small and the large channel separately.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialConfig {
    pub family: Family,
    /// Amplitude of `b0`, `v03` and every non-zero mode.
    pub chi_amplitude: f64,
    /// Amplitude of the tangential zero mode of `v0`.
    pub zero_mode_amplitude: f64,
    /// Gaussian width in `x3`.
    pub width: f64,
    /// Gaussian centre in `x3`.
    pub center: f64,
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig {
            family: Family::NonzeroBump,
            chi_amplitude: 0.05,
            zero_mode_amplitude: 0.0,
            width: 1.0,
            center: 0.0,
        }
    }
}

/// How `Lambda` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum LambdaChoice {
    /// `max(c1 (|u_bar|^2 + M0), 1)`.
    Scaled { c1: f64 },
    /// Use `params.Lambda` as given.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub t_end: f64,
    /// Time between diagnostic samples.
    pub sample_every: f64,
    /// Samples between checkpoints; zero disables them.
    pub checkpoint_every: usize,
    /// Window for the decay fits.
    pub fit_window: [f64; 2],
    pub lambda: LambdaChoice,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            t_end: 200.0,
            sample_every: 1.0,
            checkpoint_every: 50,
            fit_window: [10.0, 200.0],
            lambda: LambdaChoice::Scaled { c1: 10.0 },
        }
    }
}

/// Exact solution used by convergence studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvergenceProblem {
    Layer,
    Manufactured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub eps_list: Vec<f64>,
    /// Normal point counts, coarse to fine.
    pub refine_list: Vec<usize>,
    pub problem: ConvergenceProblem,
    /// Horizon of each convergence run.
    pub converge_t_end: f64,
    /// Step on the coarsest grid; halves with `h3`.
    pub converge_dt: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            eps_list: vec![0.4, 0.2, 0.1, 0.05],
            refine_list: vec![256, 512, 1024],
            problem: ConvergenceProblem::Layer,
            converge_t_end: 1.0,
            converge_dt: 0.02,
        }
    }
}

/// Full description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub name: String,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub params: PhysParams,
    pub grid: Grid,
    pub solver: SolverConfig,
    pub initial: InitialConfig,
    pub run: RunConfig,
    pub sweep: SweepConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            version: CONFIG_VERSION,
            name: "default".into(),
            seed: 0,
            output_dir: PathBuf::from("runs"),
            params: PhysParams::default(),
            grid: Grid::default(),
            solver: SolverConfig::default(),
            initial: InitialConfig::default(),
            run: RunConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "config version {} unsupported, expected {CONFIG_VERSION}",
                self.version
            )));
        }
        self.grid.validate()?;
        self.params.validate(self.grid.d)?;
        self.solver.validate()?;
        let r = &self.run;
        if !(r.t_end > 0.0 && r.sample_every > 0.0 && r.sample_every <= r.t_end) {
            return Err(Error::Config(format!(
                "need 0 < sample_every <= t_end, got {} and {}",
                r.sample_every, r.t_end
            )));
        }
        if r.fit_window[0] >= r.fit_window[1] {
            return Err(Error::Config("fit_window must be increasing".into()));
        }
        if let LambdaChoice::Scaled { c1 } = r.lambda {
            if !(c1 > 0.0) {
                return Err(Error::Config(format!("lambda c1 must be positive, got {c1}")));
            }
        }
        let i = &self.initial;
        if !(i.width > 0.0) || !i.chi_amplitude.is_finite() || !i.zero_mode_amplitude.is_finite() {
            return Err(Error::Config("initial amplitudes must be finite and width positive".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical TOML rendering.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Mach-sweep axis, rejected unless it has at least three distinct positive values.
    pub fn eps_axis(&self) -> Result<Vec<f64>> {
        let e = &self.sweep.eps_list;
        if e.len() < 3 {
            return Err(Error::Config(format!("Mach sweep needs at least 3 eps values, got {}", e.len())));
        }
        if e.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Config("eps values must be positive".into()));
        }
        if e.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("eps list must be strictly decreasing".into()));
        }
        Ok(e.clone())
    }

    /// Refinement axis, rejected unless it has at least three increasing entries.
    pub fn refine_axis(&self) -> Result<Vec<usize>> {
        let r = &self.sweep.refine_list;
        if r.len() < 3 {
            return Err(Error::Config(format!("convergence needs at least 3 refinements, got {}", r.len())));
        }
        if r.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("refine list must be strictly increasing".into()));
        }
        Ok(r.clone())
    }
}
