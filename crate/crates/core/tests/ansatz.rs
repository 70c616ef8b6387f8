use proptest::prelude::*;
use std::f64::consts::PI;
use vortexlab::ansatz::{
    build_ansatz, compute_alphas, envelope_bound_monitor, residual_defect, zero_mass_check, Alphas, AnsatzSpec,
    EnvelopeBound, InitialPerturbation,
};
use vortexlab::diagnostics::{fit_decay_with, FitOptions};
use vortexlab::domain::{Field, Grid, PhysParams};
use vortexlab::profiles::{diffusion_wave, vortex_layer_velocity, Branch, DiffusionWave, LayerAge};
use vortexlab::solver::State;
use vortexlab::Error;

fn grid() -> Grid {
    Grid::new(1, 4, 2048, 20.0).unwrap()
}

fn spec(alphas: Alphas, p: &PhysParams) -> AnsatzSpec {
    build_ansatz(alphas, p).unwrap()
}

#[test]
fn zero_perturbation_has_zero_amplitudes() {
    let p = PhysParams::default();
    let a = compute_alphas(&InitialPerturbation::zero(grid()), &p);
    // the layer shift u^vs(t0) - u^vs(Lambda) is odd, so its mass vanishes too
    assert!(a.alpha0.abs() < 1e-12 && a.alpha3.abs() < 1e-12 && a.tangential[0].abs() < 1e-12, "{a:?}");
}

#[test]
fn unit_density_bump_splits_evenly() {
    let g = grid();
    let p = PhysParams { u_bar: vec![0.0], ..PhysParams::default() };
    let b0 = Field::from_fn(g, |_, x3| (-x3 * x3).exp() / PI.sqrt());
    let ip = InitialPerturbation::new(b0, vec![Field::zeros(g), Field::zeros(g)]).unwrap();
    let a = compute_alphas(&ip, &p);
    assert!((a.alpha0 - 0.5).abs() < 1e-10 && (a.alpha3 - 0.5).abs() < 1e-10, "{a:?}");
}

#[test]
fn right_going_wave_data_selects_alpha3() {
    let g = grid();
    let p = PhysParams::default();
    let wave = |x3: f64| diffusion_wave(x3, 0.0, &p, Branch::Center);
    let b0 = Field::from_fn(g, |_, x3| wave(x3));
    let v3 = Field::from_fn(g, |_, x3| p.a_bar() * wave(x3) / (p.rho_bar + p.eps * wave(x3)));
    let ip = InitialPerturbation::new(b0, vec![Field::zeros(g), v3]).unwrap();
    let a = compute_alphas(&ip, &p);
    assert!(a.alpha0.abs() < 1e-9, "{a:?}");
    assert!((a.alpha3 - 1.0).abs() < 1e-9, "{a:?}");
}

#[test]
fn zero_amplitudes_give_the_auxiliary_layer() {
    let p = PhysParams::default();
    let s = spec(Alphas::zero(1), &p);
    for &(x, t) in &[(-3.0, 0.0), (0.0, 4.0), (0.4, 50.0)] {
        let pt = s.eval(x, t);
        let layer = vortex_layer_velocity(x, t, &p, LayerAge::Auxiliary)[0];
        assert_eq!(pt.rho.value(), p.rho_bar);
        assert!((pt.m[0].value() - p.rho_bar * layer).abs() < 1e-15);
        assert_eq!(pt.m[1].value(), 0.0);
        let f = s.error_terms(x, t);
        for j in 0..=3 {
            assert!(f.magnitude(j) < 1e-14, "j = {j}: {}", f.magnitude(j));
        }
    }
}

#[test]
fn still_far_field_without_tangential_waves_is_purely_acoustic() {
    let p = PhysParams { u_bar: vec![0.0], eps: 0.5, big_lambda: 1.0, ..PhysParams::default() };
    let s = spec(Alphas { alpha0: 0.03, tangential: vec![0.0], alpha3: -0.02 }, &p);
    for x in [-3.0, -1.0, 0.0, 1.2, 2.5] {
        assert_eq!(s.eval(x, 1.0).m[0].value(), 0.0);
    }
}

#[test]
fn density_floor_is_enforced() {
    let p = PhysParams { eps: 1.0, big_lambda: 1.0, ..PhysParams::default() };
    let r = build_ansatz(Alphas { alpha0: 2.0, tangential: vec![0.0], alpha3: 2.0 }, &p);
    assert!(matches!(r, Err(Error::DensityFloorViolation { .. })));
    let r = build_ansatz(Alphas { alpha0: 0.0, tangential: vec![0.0, 0.0], alpha3: 0.0 }, &p);
    assert!(r.is_err());
}

#[test]
fn low_mach_mass_error_term_is_the_acoustic_diffusion() {
    let a = Alphas { alpha0: 0.4, tangential: vec![0.1], alpha3: 0.7 };
    let p = PhysParams { eps: 1e-3, ..PhysParams::default() };
    let s = spec(a.clone(), &p);
    let nu = p.mu / p.rho_bar;
    let t = 2.0;
    let c = DiffusionWave::new(&p, Branch::Plus).center(t);
    for x in [c - 0.5, c, c + 0.3, -c + 0.2] {
        let want = nu
            * (a.alpha0 * DiffusionWave::new(&p, Branch::Minus).jet(x, t).derivative(1)
                + a.alpha3 * DiffusionWave::new(&p, Branch::Plus).jet(x, t).derivative(1));
        assert!((s.error_terms(x, t).f0.value() - want).abs() <= 1e-12 * want.abs().max(1e-300));
    }
}

#[test]
fn centre_wave_only_has_no_mass_error_term() {
    let p = PhysParams::default();
    let s = spec(Alphas { alpha0: 0.0, tangential: vec![0.2], alpha3: 0.0 }, &p);
    for x in [-1.0, 0.0, 0.3] {
        assert_eq!(s.error_terms(x, 3.0).f0.value(), 0.0);
    }
}

#[test]
fn residual_agrees_with_the_closed_form_error_terms() {
    let p = PhysParams { eps: 0.5, big_lambda: 1.0, ..PhysParams::default() };
    let s = spec(Alphas { alpha0: 0.05, tangential: vec![0.03], alpha3: -0.04 }, &p);
    let defect = |n3: usize| residual_defect(&s, &Grid::new(1, 2, n3, 40.0).unwrap(), 2.0, 8).unwrap();
    let errs = [defect(512), defect(1024), defect(2048)];
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    assert!(orders.iter().all(|&o| o >= 3.0), "{errs:?} {orders:?}");
}

#[test]
fn zero_mass_at_the_initial_time() {
    let g = grid();
    let p = PhysParams { eps: 0.5, big_lambda: 1.0, ..PhysParams::default() };
    let b0 = Field::from_fn(g, |x, x3| 0.05 * (-x3 * x3).exp() * (1.0 + (2.0 * PI * x[0]).cos()));
    let v1 = Field::from_fn(g, |_, x3| 0.1 * (-(x3 - 1.0).powi(2)).exp());
    let v3 = Field::from_fn(g, |_, x3| 0.02 * (-(x3 + 0.5).powi(2)).exp());
    let ip = InitialPerturbation::new(b0, vec![v1, v3]).unwrap();
    let a = compute_alphas(&ip, &p);
    let s = spec(a.clone(), &p);
    let state = State::from_primitive(ip.rho0(&p), &ip.u0(&p), 0.0).unwrap();
    let md = zero_mass_check(&state, &s, 0.0);
    assert!(md.max_abs() < 1e-8, "{md:?}");
    assert!(md.trustworthy());

    let nudged = spec(Alphas { tangential: vec![a.tangential[0] + 0.1], ..a }, &p);
    let md = zero_mass_check(&state, &nudged, 0.0);
    assert!((md.components[1] + 0.1).abs() < 1e-8, "{md:?}");
    assert!(md.components[0].abs() < 1e-8 && md.components[2].abs() < 1e-8);
}

#[test]
fn tangential_momentum_deviation_decays_like_the_heat_kernel() {
    let p = PhysParams::default();
    let s = spec(Alphas { alpha0: 0.02, tangential: vec![0.05], alpha3: 0.01 }, &p);
    let xs: Vec<f64> = (0..=4000).map(|k| -20.0 + k as f64 * 0.01).collect();
    let series: Vec<(f64, f64)> = (0..=40)
        .map(|k| {
            let t = 10.0 * k as f64;
            let dev = xs
                .iter()
                .map(|&x| {
                    let layer = vortex_layer_velocity(x, t, &p, LayerAge::Auxiliary)[0];
                    (s.eval(x, t).m[0].value() - p.rho_bar * layer).abs()
                })
                .fold(0.0, f64::max);
            (t, dev)
        })
        .collect();
    let fit = fit_decay_with(&series, (0.0, 400.0), FitOptions { shift: p.big_lambda, floor: 0.0 }).unwrap();
    assert!((fit.exponent + 0.5).abs() <= 0.05, "{fit:?}");
}

#[test]
fn envelope_constants_vanish_without_waves() {
    let p = PhysParams::default();
    let s = spec(Alphas::zero(1), &p);
    let xs: Vec<f64> = (0..=200).map(|k| -10.0 + 0.1 * k as f64).collect();
    let fit = envelope_bound_monitor(&s, &xs, &[0.0, 5.0, 20.0], None);
    for j in 0..=2 {
        assert_eq!(fit.constant(EnvelopeBound::ErrorTerms, j), Some(0.0));
    }
}

#[test]
fn centre_wave_alone_is_an_exact_solution() {
    // with rho~ = rho_bar the stationary wave is absorbed by the viscous term
    let p = PhysParams::default();
    let s = spec(Alphas { alpha0: 0.0, tangential: vec![0.1], alpha3: 0.0 }, &p);
    let xs: Vec<f64> = (0..=400).map(|k| -4.0 + 0.02 * k as f64).collect();
    for t in [0.0, 10.0, 200.0] {
        let peak = xs.iter().map(|&x| s.error_terms(x, t).magnitude(0)).fold(0.0, f64::max);
        assert!(peak < 1e-15, "t = {t}: {peak}");
    }
}

#[test]
fn acoustic_error_peak_follows_the_wave() {
    let p = PhysParams { eps: 0.5, big_lambda: 1.0, ..PhysParams::default() };
    let s = spec(Alphas { alpha0: 0.0, tangential: vec![0.0], alpha3: 0.05 }, &p);
    let g = Grid::new(1, 2, 2048, 20.0).unwrap();
    let t = 3.0;
    let centre = DiffusionWave::new(&p, Branch::Plus).center(t);
    let xs = g.x3_nodes();
    let argmax = xs
        .iter()
        .copied()
        .max_by(|&a, &b| {
            let fa = s.error_terms(a, t).f[1].value().abs();
            let fb = s.error_terms(b, t).f[1].value().abs();
            fa.total_cmp(&fb)
        })
        .unwrap();
    // |F3| is quadratic in the wave, so its maximum is within a width of the centre
    let width = DiffusionWave::new(&p, Branch::Plus).width(t);
    assert!((argmax - centre).abs() <= width + g.h3(), "{argmax} vs {centre}");
}

#[test]
fn spec_round_trips_through_toml() {
    let p = PhysParams { eps: 0.2, ..PhysParams::default() };
    let s = spec(Alphas { alpha0: 0.1, tangential: vec![-0.2], alpha3: 0.3 }, &p);
    assert_eq!(AnsatzSpec::from_toml(&s.to_toml()).unwrap(), s);
    assert!(AnsatzSpec::from_toml("version = 2").is_err());
}

proptest! {
    #[test]
    fn amplitudes_are_linear_in_the_data(c in -2.0f64..2.0, s1 in 0.2f64..1.5, s2 in 0.2f64..1.5) {
        let g = Grid::new(1, 4, 512, 20.0).unwrap();
        let p = PhysParams { u_bar: vec![0.0], ..PhysParams::default() };
        let mk = |k: f64| {
            let b0 = Field::from_fn(g, |_, x3| k * (-x3 * x3 / s1).exp());
            let v1 = Field::from_fn(g, |_, x3| k * (-(x3 - 0.5).powi(2) / s2).exp());
            let v3 = Field::from_fn(g, |_, x3| k * x3 * (-x3 * x3).exp() + 0.1 * k * (-x3 * x3).exp());
            compute_alphas(&InitialPerturbation::new(b0, vec![v1, v3]).unwrap(), &PhysParams { eps: 1e-8, ..p.clone() })
        };
        let (one, scaled) = (mk(1.0), mk(c));
        prop_assert!((scaled.alpha0 - c * one.alpha0).abs() < 1e-6);
        prop_assert!((scaled.alpha3 - c * one.alpha3).abs() < 1e-6);
        prop_assert!((scaled.tangential[0] - c * one.tangential[0]).abs() < 1e-6);
    }

    #[test]
    fn mass_of_a_odd_momentum_splits_antisymmetrically(amp in -1.0f64..1.0) {
        let g = Grid::new(1, 4, 512, 20.0).unwrap();
        let p = PhysParams { u_bar: vec![0.0], ..PhysParams::default() };
        let v3 = Field::from_fn(g, |_, x3| amp * (-x3 * x3).exp());
        let ip = InitialPerturbation::new(Field::zeros(g), vec![Field::zeros(g), v3]).unwrap();
        let a = compute_alphas(&ip, &p);
        prop_assert!((a.alpha0 + a.alpha3).abs() < 1e-12);
        prop_assert!((a.alpha3 - 0.5 * amp * PI.sqrt() / p.a_bar()).abs() < 1e-8);
    }
}
