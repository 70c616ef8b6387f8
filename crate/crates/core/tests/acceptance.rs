//! Acceptance run: one line per criterion, non-zero exit if any fails.

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use std::f64::consts::TAU;
use std::time::Instant;
use vortexlab::ansatz::{build_ansatz, envelope_bound_monitor, residual_defect, zero_mass_check, Alphas, EnvelopeBound};
use vortexlab::diagnostics::{fit_decay_with, EnergyReport, FitOptions};
use vortexlab::domain::{
    antiderivative, d_normal, d_tangential, grad_perp_norm, nonzero_mode, zero_mode, Field, Grid, PhysParams, Profile,
};
use vortexlab::harness::{evolve, prepare, run_convergence, run_mach_sweep, series_of, ExperimentConfig};
use vortexlab::profiles::theta;
use vortexlab::solver::{CompressibleSolver, LerayProjector, NormalOp};

const LAYER: &str = include_str!("../../../configs/converge-layer.toml");
const ZERO_MASS: &str = include_str!("../../../configs/zero-mass.toml");
const BUMP: &str = include_str!("../../../configs/decay-bump.toml");
const ZEROMODE: &str = include_str!("../../../configs/zeromode.toml");
const MACH: &str = include_str!("../../../configs/mach-sweep.toml");

type Outcome = (bool, String);

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn cfg(s: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(s).expect("shipped config parses")
}

fn fit(reports: &[EnergyReport], column: &str, window: (f64, f64)) -> Result<f64, String> {
    fit_decay_with(&series_of(reports, column), window, FitOptions { shift: 1.0, floor: 1e-10 })
        .map(|f| f.exponent)
        .map_err(|e| e.to_string())
}

fn background_layer() -> Outcome {
    let c = cfg(LAYER);
    let start = Instant::now();
    let table = run_convergence(&c, None, true).expect("convergence run");
    let per_level = start.elapsed().as_secs_f64() / table.levels.len() as f64;
    let ratios: Vec<f64> = table.levels.windows(2).map(|w| w[0].total / w[1].total).collect();
    let ok = ratios.iter().all(|&r| r >= 3.6) && per_level <= 120.0;
    (ok, format!("error ratios {ratios:.2?} (need >= 3.6), {per_level:.1} s per resolution"))
}

fn zero_mass() -> Outcome {
    let c = cfg(ZERO_MASS);
    let prep = prepare(&c).expect("prepare");
    let mut solver = CompressibleSolver::new(c.grid, prep.params.clone(), c.solver.clone()).expect("solver");
    let mut s = prep.state.clone();
    let initial = zero_mass_check(&s, &prep.spec, 0.0);
    let (mut drift, mut trusted) = (0.0f64, 0usize);
    let steps = (c.run.t_end / c.run.sample_every).round() as usize;
    for k in 1..=steps {
        let t = k as f64 * c.run.sample_every;
        s = solver.advance_to(&s, t).expect("evolution");
        let md = zero_mass_check(&s, &prep.spec, t);
        if !md.trustworthy() {
            break;
        }
        trusted += 1;
        let rate = md
            .components
            .iter()
            .zip(&initial.components)
            .map(|(a, b)| (a - b).abs() / t)
            .fold(0.0, f64::max);
        drift = drift.max(rate);
    }
    let ok = initial.max_abs() <= 1e-6 && drift <= 1e-6 && trusted >= steps / 2;
    (ok, format!("defect at t=0 {:.2e}, drift {drift:.2e} per unit time over {trusted} samples", initial.max_abs()))
}

fn residual_equivalence() -> Outcome {
    let p = PhysParams { eps: 0.5, big_lambda: 1.0, ..PhysParams::default() };
    let spec = build_ansatz(Alphas { alpha0: 0.05, tangential: vec![0.03], alpha3: -0.04 }, &p).expect("ansatz");
    let errs: Vec<f64> = [512, 1024, 2048]
        .iter()
        .map(|&n| residual_defect(&spec, &Grid::new(1, 2, n, 40.0).unwrap(), 2.0, 8).expect("residual"))
        .collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    (orders.iter().all(|&o| o >= 3.0), format!("defects {}, observed orders {orders:.2?}", sci(&errs)))
}

fn envelope_constants() -> Outcome {
    let p = PhysParams { eps: 0.5, big_lambda: 10.0, ..PhysParams::default() };
    let spec = build_ansatz(Alphas { alpha0: 0.05, tangential: vec![0.03], alpha3: -0.04 }, &p).expect("ansatz");
    let ts: Vec<f64> = (0..=20).map(|k| 5.0 * k as f64).collect();
    let half = 1.1 * p.sound_speed() * (100.0 + p.big_lambda);
    let nodes = |n: usize| Grid::new(1, 2, n, half).unwrap().x3_nodes();
    let finest = envelope_bound_monitor(&spec, &nodes(16384), &ts, None);
    let fits: Vec<_> = [4096, 8192]
        .iter()
        .map(|&n| envelope_bound_monitor(&spec, &nodes(n), &ts, Some(finest.c)))
        .chain(std::iter::once(finest.clone()))
        .collect();
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for j in 0..=1 {
        let ks: Vec<f64> = fits.iter().map(|f| f.constant(EnvelopeBound::ErrorTerms, j).unwrap()).collect();
        let (lo, hi) = ks.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &k| (a.min(k), b.max(k)));
        let spread = (hi - lo) / hi;
        worst = worst.max(spread);
        detail.push(format!("j={j}: C {}", sci(&ks)));
    }
    (worst <= 0.10, format!("{}; max spread {:.2}% (c = {:.3})", detail.join(", "), 100.0 * worst, finest.c))
}

struct LongRuns {
    bump: Vec<EnergyReport>,
    half: Vec<EnergyReport>,
    zeromode: Vec<EnergyReport>,
}

fn long_runs() -> LongRuns {
    let run = |c: &ExperimentConfig| {
        let prep = prepare(c).expect("prepare");
        evolve(c, &prep, None).expect("evolution").0
    };
    let bump = cfg(BUMP);
    let mut half = bump.clone();
    half.initial.chi_amplitude *= 0.5;
    LongRuns { bump: run(&bump), half: run(&half), zeromode: run(&cfg(ZEROMODE)) }
}

fn main_decay(r: &LongRuns) -> Outcome {
    match fit(&r.bump, "linf_bv", (10.0, 200.0)) {
        Ok(e) => ((-0.70..=-0.35).contains(&e), format!("L^inf exponent {e:.3} over [10, 200] (need [-0.70, -0.35])")),
        Err(e) => (false, e),
    }
}

/// Running `sup (t+1)^{-1/2} E` up to each sample.
fn running_sup(reports: &[EnergyReport], value: fn(&EnergyReport) -> f64) -> Vec<f64> {
    let mut sup = 0.0f64;
    reports
        .iter()
        .map(|r| {
            sup = sup.max((r.t + 1.0).powf(-0.5) * value(r));
            sup
        })
        .collect()
}

fn energy_boundedness(r: &LongRuns) -> Outcome {
    let m2 = running_sup(&r.bump, |r| r.e_full);
    let mid = r.bump.iter().position(|s| s.t >= 100.0).unwrap_or(m2.len() / 2);
    let growth = m2[m2.len() - 1] / m2[mid] - 1.0;
    let nu_full = r.bump.last().unwrap().nu;
    let nu_half = r.half.last().unwrap().nu;
    let ratio = nu_half / nu_full;
    let ok = growth <= 0.05 && (0.4..=0.6).contains(&ratio);
    (ok, format!("M^2 growth over second half {:.2}%, nu ratio under halved chi {ratio:.4}", 100.0 * growth))
}

fn nonzero_mode_decay(r: &LongRuns) -> Outcome {
    match fit(&r.bump, "md_h1", (20.0, 200.0)) {
        Ok(e) => (e <= -0.6, format!("H^1 non-zero-mode exponent {e:.3} over [20, 200] (need <= -0.6)")),
        Err(e) => (false, e),
    }
}

fn tangential_bound(r: &LongRuns) -> Outcome {
    let ratio = r.zeromode[0].e_full / r.zeromode[0].e_star.max(1e-300);
    match fit(&r.zeromode, "dzp_linf", (20.0, 200.0)) {
        Ok(e) => (e <= -0.6, format!("d3 Z_perp L^inf exponent {e:.3} over [20, 200], E/E* at t=0 {ratio:.1}")),
        Err(e) => (false, e),
    }
}

fn incompressible_limit() -> Outcome {
    let start = Instant::now();
    let rep = run_mach_sweep(&cfg(MACH), None, true).expect("sweep");
    let (fq, fu) = (rep.max_factor(0), rep.max_factor(2));
    let ok = rep.monotone && fq <= 0.8 && fu <= 0.8;
    let secs = start.elapsed().as_secs_f64();
    (ok, format!("max factors q {fq:.3}, u {fu:.3}, monotone {}, {secs:.0} s", rep.monotone))
}

fn field(grid: Grid) -> impl Strategy<Value = Field> {
    proptest::collection::vec(-1.0f64..1.0, grid.len()).prop_map(move |v| Field::from_values(grid, v).unwrap())
}

fn property_suites() -> Outcome {
    let start = Instant::now();
    let mut runner = TestRunner::new(Config { cases: 256, failure_persistence: None, ..Config::default() });
    let g = Grid::new(1, 16, 32, 2.0).unwrap();
    let mut failures = Vec::new();
    let mut check = |name: &str, r: Result<(), String>| {
        if let Err(e) = r {
            failures.push(format!("{name}: {e}"));
        }
    };

    check(
        "mode decomposition",
        runner
            .run(&field(g), |f| {
                let mut sum = Field::broadcast(&zero_mode(&f));
                sum.axpy(1.0, &nonzero_mode(&f));
                prop_assert!(sum.zip_map(&f, |a, b| a - b).max_abs() <= 1e-14 * f.max_abs().max(1e-300) * 4.0);
                prop_assert!(zero_mode(&nonzero_mode(&f)).max_abs() <= 1e-13);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    check(
        "Poincare",
        runner
            .run(&field(g), |f| {
                prop_assert!(nonzero_mode(&f).l2_norm() <= grad_perp_norm(&f) / TAU * (1.0 + 1e-10));
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    let proj = LerayProjector::new(&g, 1e-8).unwrap();
    check(
        "Leray",
        runner
            .run(&(field(g), field(g)), |(a, b)| {
                let once = proj.project(&[a, b]).unwrap();
                let twice = proj.project(&once).unwrap();
                let scale = once.iter().map(|f| f.max_abs()).fold(1.0, f64::max);
                for (x, y) in once.iter().zip(&twice) {
                    prop_assert!(x.zip_map(y, |p, q| p - q).max_abs() <= 1e-10 * scale);
                }
                let n = g.n_normal();
                let nt = g.n_tan();
                let mut chi = once[0].values().to_vec();
                chi[..nt].fill(0.0);
                chi[(n - 1) * nt..].fill(0.0);
                let chi = Field::from_values(g, chi).unwrap();
                let g3 = NormalOp::d1(n).apply_vec(chi.values(), nt, g.h3());
                let grad = [d_tangential(&chi, 0, 1), Field::from_values(g, g3).unwrap()];
                let gscale = grad.iter().map(|f| f.max_abs()).fold(1.0, f64::max);
                let out = proj.project(&grad).unwrap();
                prop_assert!(out.iter().all(|f| f.max_abs() <= 1e-9 * gscale));
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    let bumps = proptest::collection::vec((-1.0f64..1.0, -3.0f64..3.0, 0.5f64..2.0), 1..4);
    check(
        "anti-derivative",
        runner
            .run(&bumps, |bs| {
                let pg = Grid::new(1, 2, 512, 8.0).unwrap();
                let f = Profile::from_fn(pg, |x| bs.iter().map(|&(a, c, w)| a * (-((x - c) / w).powi(2)).exp()).sum());
                let gap = d_normal(&antiderivative(&f), 1).unwrap().zip_map(&f, |a, b| a - b).l2_norm();
                let tol = 0.25 * pg.h3().powi(2) * d_normal(&f, 2).unwrap().l2_norm() + 1e-12;
                prop_assert!(gap <= tol, "{} > {}", gap, tol);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    check(
        "theta oddness",
        runner
            .run(&(-50.0f64..50.0, 1e-3f64..2.0), |(xi, mu)| {
                let p = PhysParams { mu, ..PhysParams::default() };
                prop_assert!((theta(xi, &p) + theta(-xi, &p)).abs() <= 1e-14);
                Ok(())
            })
            .map_err(|e| e.to_string()),
    );
    let secs = start.elapsed().as_secs_f64();
    let ok = failures.is_empty() && secs <= 300.0;
    let detail = if failures.is_empty() { "5 suites x 256 cases".to_string() } else { failures.join("; ") };
    (ok, format!("{detail}, {secs:.1} s"))
}

/// `ACCEPTANCE_ONLY=1,3,9` restricts the run to the listed criteria.
fn selected() -> Vec<usize> {
    match std::env::var("ACCEPTANCE_ONLY") {
        Ok(list) => list.split(',').filter_map(|s| s.trim().parse().ok()).collect(),
        Err(_) => (1..=10).collect(),
    }
}

fn main() {
    let only = selected();
    let mut all = true;
    let mut report = |n: usize, (ok, detail): Outcome| {
        all &= ok;
        println!("criterion {n}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    };
    let quick: [(usize, fn() -> Outcome); 4] =
        [(1, background_layer), (2, zero_mass), (3, residual_equivalence), (4, envelope_constants)];
    for (n, f) in quick {
        if only.contains(&n) {
            report(n, f());
        }
    }
    if (5..=8).any(|n| only.contains(&n)) {
        let runs = long_runs();
        let long: [(usize, fn(&LongRuns) -> Outcome); 4] =
            [(5, main_decay), (6, energy_boundedness), (7, nonzero_mode_decay), (8, tangential_bound)];
        for (n, f) in long {
            if only.contains(&n) {
                report(n, f(&runs));
            }
        }
    }
    if only.contains(&9) {
        report(9, incompressible_limit());
    }
    if only.contains(&10) {
        report(10, property_suites());
    }
    if !all {
        std::process::exit(1);
    }
}
