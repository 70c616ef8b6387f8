use std::sync::Arc;
use vortexlab::domain::{zero_mode, Field, Grid, PhysParams};
use vortexlab::profiles::{vortex_layer_velocity, LayerAge};
use vortexlab::solver::mms::ManufacturedSolution;
use vortexlab::solver::{
    leray_project, read_checkpoint, write_checkpoint, BoundaryKind, CompressibleSolver, DtPolicy,
    IncState, IncompressibleSolver, LerayProjector, SolverConfig, State,
};

fn layer_state(grid: Grid, p: &PhysParams, t: f64) -> State {
    let rho = Field::constant(grid, p.rho_bar);
    let u1 = Field::from_fn(grid, |_, x3| vortex_layer_velocity(x3, t, p, LayerAge::Layer)[0]);
    State::from_primitive(rho, &[u1, Field::zeros(grid)], t).unwrap()
}

fn fixed(dt: f64) -> SolverConfig {
    SolverConfig { dt: DtPolicy::Fixed { dt }, ..SolverConfig::default() }
}

#[test]
fn quiescent_state_is_a_fixed_point() {
    let grid = Grid::new(1, 8, 64, 4.0).unwrap();
    let p = PhysParams { u_bar: vec![0.0], ..PhysParams::default() };
    let s = State::new(Field::constant(grid, p.rho_bar), vec![Field::zeros(grid), Field::zeros(grid)], 0.0)
        .unwrap();
    let mut solver = CompressibleSolver::new(grid, p, fixed(0.01)).unwrap();
    let mut cur = s.clone();
    for _ in 0..20 {
        cur = solver.step(&cur).unwrap();
    }
    let dev = cur.rho.zip_map(&s.rho, |a, b| a - b).max_abs()
        + cur.m.iter().map(|f| f.max_abs()).sum::<f64>();
    assert!(dev < 1e-13, "deviation {dev}");
}

fn layer_error(n3: usize, dt: f64, eps: f64) -> f64 {
    let grid = Grid::new(1, 8, n3, 20.0).unwrap();
    let p = PhysParams { eps, ..PhysParams::default() };
    let s0 = layer_state(grid, &p, 0.0);
    let mut solver = CompressibleSolver::new(grid, p.clone(), fixed(dt)).unwrap();
    let s1 = solver.advance_to(&s0, 1.0).unwrap();
    let exact = layer_state(grid, &p, 1.0);
    s1.m.iter().zip(&exact.m).map(|(a, b)| a.zip_map(b, |x, y| x - y).max_abs()).fold(0.0, f64::max)
        + s1.rho.zip_map(&exact.rho, |x, y| x - y).max_abs()
}

#[test]
fn background_layer_converges() {
    let e1 = layer_error(256, 0.02, 0.5);
    let e2 = layer_error(512, 0.01, 0.5);
    eprintln!("layer errors {e1:.3e} {e2:.3e} ratio {:.2}", e1 / e2);
    assert!(e1 / e2 >= 3.6);
}

#[test]
fn acoustic_pulse_travels_at_sound_speed() {
    let grid = Grid::new(1, 4, 1024, 20.0).unwrap();
    let p = PhysParams { u_bar: vec![0.0], mu: 1e-4, eps: 0.5, ..PhysParams::default() };
    let c = p.sound_speed();
    // right-going pulse: m3 = c rho'
    let amp = 1e-3;
    let bump = |x3: f64| amp * (-(x3 + 5.0) * (x3 + 5.0)).exp();
    let rho = Field::from_fn(grid, |_, x3| p.rho_bar + bump(x3));
    let m3 = Field::from_fn(grid, |_, x3| c * bump(x3));
    let s0 = State::new(rho, vec![Field::zeros(grid), m3], 0.0).unwrap();
    let mut solver = CompressibleSolver::new(grid, p.clone(), fixed(0.005)).unwrap();
    let t_end = 2.0;
    let s1 = solver.advance_to(&s0, t_end).unwrap();
    let prof = zero_mode(&s1.rho);
    let x = grid.x3_nodes();
    let (jmax, _) = prof
        .values()
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |acc, (j, &v)| if v > acc.1 { (j, v) } else { acc });
    // parabolic refinement of the peak
    let (a, b, cc) = (prof.values()[jmax - 1], prof.values()[jmax], prof.values()[jmax + 1]);
    let shift = 0.5 * (a - cc) / (a - 2.0 * b + cc);
    let peak = x[jmax] + shift * grid.h3();
    let speed = (peak + 5.0) / t_end;
    eprintln!("pulse speed {speed:.4} vs {c:.4}");
    assert!((speed / c - 1.0).abs() < 0.02);
}

#[test]
fn outgoing_pulse_reflects_little() {
    let grid = Grid::new(1, 4, 512, 10.0).unwrap();
    let p = PhysParams { u_bar: vec![0.0], mu: 1e-4, eps: 0.5, ..PhysParams::default() };
    let c = p.sound_speed();
    let amp = 1e-3;
    let bump = |x3: f64| amp * (-(x3 - 5.0) * (x3 - 5.0)).exp();
    let rho = Field::from_fn(grid, |_, x3| p.rho_bar + bump(x3));
    let m3 = Field::from_fn(grid, |_, x3| c * bump(x3));
    let s0 = State::new(rho, vec![Field::zeros(grid), m3], 0.0).unwrap();
    let mut solver = CompressibleSolver::new(grid, p.clone(), fixed(0.005)).unwrap();
    // pulse at 5 must travel 5 to the edge plus 5 back; stop when it would be back at 0
    let s1 = solver.advance_to(&s0, 10.0 / c).unwrap();
    let left = s1.rho.values().iter().map(|r| (r - p.rho_bar).abs()).fold(0.0, f64::max);
    eprintln!("reflected {:.3e} of {amp:.1e}", left);
    assert!(left <= 0.05 * amp);
}

#[test]
fn manufactured_solution_converges_at_second_order() {
    let p = PhysParams { eps: 0.5, mu: 0.01, ..PhysParams::default() };
    let ms = ManufacturedSolution { a: 0.05, b: 0.05 };
    let mut errs = Vec::new();
    for (n3, dt) in [(64, 0.02), (128, 0.01), (256, 0.005)] {
        let grid = Grid::new(1, 16, n3, 8.0).unwrap();
        let s0 = ms.exact(&grid, &p, 0.0);
        let mut solver =
            CompressibleSolver::new(grid, p.clone(), fixed(dt)).unwrap().with_forcing(Arc::new(ms.clone()));
        let s1 = solver.advance_to(&s0, 0.5).unwrap();
        let ex = ms.exact(&grid, &p, 0.5);
        let e = s1.rho.zip_map(&ex.rho, |a, b| a - b).max_abs()
            + s1.m.iter().zip(&ex.m).map(|(a, b)| a.zip_map(b, |x, y| x - y).max_abs()).sum::<f64>();
        errs.push(e);
    }
    eprintln!("mms errors {errs:?}");
    for w in errs.windows(2) {
        assert!((w[0] / w[1]).log2() >= 1.9, "{errs:?}");
    }
}

#[test]
fn eps_uniform_stability() {
    let grid = Grid::new(1, 8, 256, 20.0).unwrap();
    for eps in [0.5, 0.25, 0.1, 0.05] {
        let p = PhysParams { eps, ..PhysParams::default() };
        let rho = Field::from_fn(grid, |x, x3| {
            p.rho_bar + eps * 0.1 * (-x3 * x3).exp() * (1.0 + 0.5 * (2.0 * std::f64::consts::PI * x[0]).cos())
        });
        let u1 = Field::from_fn(grid, |_, x3| vortex_layer_velocity(x3, 0.0, &p, LayerAge::Layer)[0]);
        let s0 = State::from_primitive(rho, &[u1, Field::zeros(grid)], 0.0).unwrap();
        let mut solver = CompressibleSolver::new(grid, p.clone(), fixed(0.02)).unwrap();
        let s1 = solver.advance_to(&s0, 2.0).unwrap();
        assert!(s1.is_finite());
        assert!(s1.rho.max_abs() < 2.0);
    }
}

#[test]
fn checkpoint_round_trip_is_bit_exact() {
    let grid = Grid::new(1, 8, 32, 4.0).unwrap();
    let p = PhysParams::default();
    let s = layer_state(grid, &p, 0.3);
    let mut buf = Vec::new();
    write_checkpoint(&mut buf, &s, &p).unwrap();
    let (back, pp) = read_checkpoint(&mut buf.as_slice()).unwrap();
    assert_eq!(back, s);
    assert_eq!(pp, p);
}

#[test]
fn leray_annihilates_discrete_gradients_and_fixes_shear() {
    let grid = Grid::new(1, 16, 256, 8.0).unwrap();
    let proj = LerayProjector::new(&grid, 1e-10).unwrap();
    let chi = Field::from_fn(grid, |x, x3| (2.0 * std::f64::consts::PI * x[0]).sin() * (-x3 * x3).exp());
    let gx = vortexlab::domain::d_tangential(&chi, 0, 1);
    let g3 = vortexlab::solver::NormalOp::d1(grid.n_normal());
    let g3 = Field::from_values(grid, g3.apply_vec(chi.values(), grid.n_tan(), grid.h3())).unwrap();
    let out = proj.project(&[gx, g3]).unwrap();
    let m = out.iter().map(|f| f.max_abs()).fold(0.0, f64::max);
    assert!(m < 1e-9, "{m}");

    let p = PhysParams::default();
    let shear = Field::from_fn(grid, |_, x3| vortex_layer_velocity(x3, 0.0, &p, LayerAge::Layer)[0]);
    let out = leray_project(&[shear.clone(), Field::zeros(grid)]).unwrap();
    assert!(out[0].zip_map(&shear, |a, b| a - b).max_abs() < 1e-10);
    assert!(out[1].max_abs() < 1e-10);
}

#[test]
fn incompressible_shear_mode_decays_at_viscous_rate() {
    let grid = Grid::new(1, 8, 256, 4.0).unwrap();
    let p = PhysParams { u_bar: vec![0.0], mu: 0.1, ..PhysParams::default() };
    let kz = 4.0 * std::f64::consts::PI / 8.0;
    let solver = IncompressibleSolver::new(grid, p.clone(), SolverConfig::default()).unwrap();
    let u1 = Field::from_fn(grid, |_, x3| (kz * (x3 + 4.0)).sin());
    let s0 = IncState { u: vec![u1.clone(), Field::zeros(grid)], t: 0.0 };
    let s1 = solver.advance_to(&s0, 2.0).unwrap();
    let rate = -(s1.u[0].max_abs() / u1.max_abs()).ln() / 2.0;
    let expect = p.mu * kz * kz / p.rho_bar;
    assert!((rate / expect - 1.0).abs() < 0.01, "{rate} vs {expect}");
    assert!(s1.u[1].max_abs() < 1e-12);
}

#[test]
fn incompressible_layer_is_preserved() {
    let grid = Grid::new(1, 8, 1024, 20.0).unwrap();
    let p = PhysParams::default();
    let u1 = Field::from_fn(grid, |_, x3| vortex_layer_velocity(x3, 0.0, &p, LayerAge::Layer)[0]);
    let s0 = IncState { u: vec![u1, Field::zeros(grid)], t: 0.0 };
    let solver = IncompressibleSolver::new(grid, p.clone(), fixed(0.01)).unwrap();
    let s1 = solver.advance_to(&s0, 1.0).unwrap();
    let ex = Field::from_fn(grid, |_, x3| vortex_layer_velocity(x3, 1.0, &p, LayerAge::Layer)[0]);
    let e = s1.u[0].zip_map(&ex, |a, b| a - b).max_abs();
    assert!(e < 1e-4, "{e}");
    let zero = IncState { u: vec![Field::zeros(grid), Field::zeros(grid)], t: 0.0 };
    let p0 = PhysParams { u_bar: vec![0.0], ..p };
    let z = IncompressibleSolver::new(grid, p0, fixed(0.01)).unwrap().advance_to(&zero, 0.5).unwrap();
    assert_eq!(z.u[0].max_abs() + z.u[1].max_abs(), 0.0);
}

#[test]
fn dirichlet_closure_reflects() {
    let grid = Grid::new(1, 4, 512, 10.0).unwrap();
    let p = PhysParams { u_bar: vec![0.0], mu: 1e-4, eps: 0.5, ..PhysParams::default() };
    let c = p.sound_speed();
    let bump = |x3: f64| 1e-3 * (-(x3 - 5.0) * (x3 - 5.0)).exp();
    let rho = Field::from_fn(grid, |_, x3| p.rho_bar + bump(x3));
    let m3 = Field::from_fn(grid, |_, x3| c * bump(x3));
    let s0 = State::new(rho, vec![Field::zeros(grid), m3], 0.0).unwrap();
    let cfg = SolverConfig { boundary: BoundaryKind::Dirichlet, ..fixed(0.005) };
    let s1 = CompressibleSolver::new(grid, p.clone(), cfg).unwrap().advance_to(&s0, 10.0 / c).unwrap();
    let back = s1.rho.values().iter().map(|r| (r - p.rho_bar).abs()).fold(0.0, f64::max);
    assert!(back > 0.5e-3);
}

fn random_field(grid: Grid) -> impl proptest::strategy::Strategy<Value = Field> {
    use proptest::prelude::*;
    proptest::collection::vec(-1.0f64..1.0, grid.len()).prop_map(move |v| Field::from_values(grid, v).unwrap())
}

proptest::proptest! {
    #[test]
    fn leray_projection_is_idempotent(
        v1 in random_field(Grid::new(1, 8, 32, 2.0).unwrap()),
        v3 in random_field(Grid::new(1, 8, 32, 2.0).unwrap()),
    ) {
        let grid = *v1.grid();
        let proj = LerayProjector::new(&grid, 1e-8).unwrap();
        let once = proj.project(&[v1, v3]).unwrap();
        let twice = proj.project(&once).unwrap();
        let scale = once.iter().map(|f| f.max_abs()).fold(1.0, f64::max);
        for (a, b) in once.iter().zip(&twice) {
            proptest::prop_assert!(a.zip_map(b, |x, y| x - y).max_abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn leray_annihilates_random_gradients(c in random_field(Grid::new(1, 8, 32, 2.0).unwrap())) {
        let grid = *c.grid();
        let n = grid.n_normal();
        let nt = grid.n_tan();
        let mut chi = c.values().to_vec();
        chi[..nt].iter_mut().for_each(|x| *x = 0.0);
        chi[(n - 1) * nt..].iter_mut().for_each(|x| *x = 0.0);
        let chi = Field::from_values(grid, chi).unwrap();
        let gx = vortexlab::domain::d_tangential(&chi, 0, 1);
        let d1 = vortexlab::solver::NormalOp::d1(n);
        let g3 = Field::from_values(grid, d1.apply_vec(chi.values(), nt, grid.h3())).unwrap();
        let scale = gx.max_abs().max(g3.max_abs());
        let out = LerayProjector::new(&grid, 1e-8).unwrap().project(&[gx, g3]).unwrap();
        let m = out.iter().map(|f| f.max_abs()).fold(0.0, f64::max);
        proptest::prop_assert!(m <= 1e-9 * scale.max(1.0), "{} vs {}", m, scale);
    }
}
