use proptest::prelude::*;
use std::f64::consts::{PI, TAU};
use vortexlab::domain::{
    antiderivative, d_normal, d_tangential, grad_perp_norm, hs_alpha_norm, nonzero_mode, read_field, read_profile,
    weighted_l2_norm, write_field, write_profile, write_profile_csv, zero_mode, Field, Grid, PhysParams, Profile,
};
use vortexlab::profiles::{diffusion_wave, Branch};
use vortexlab::Error;

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    s * h / 3.0
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn grid_validation() {
    assert!(Grid::new(1, 8, 64, 10.0).is_ok());
    assert!(Grid::new(2, 4, 16, 1.0).is_ok());
    for bad in [Grid::new(1, 6, 64, 10.0), Grid::new(1, 8, 8, 10.0), Grid::new(3, 8, 64, 10.0), Grid::new(1, 8, 64, -1.0)] {
        assert!(matches!(bad, Err(Error::InvalidGrid(_))), "{bad:?}");
    }
    let g = Grid::new(2, 4, 16, 2.0).unwrap();
    assert_eq!(g.len(), 16 * 17);
    assert_eq!(g.h3(), 0.25);
    assert_eq!(g.x3(0), -2.0);
    assert_eq!(g.x3(16), 2.0);
    assert_eq!(g.x_perp(5), [0.25, 0.25]);
}

#[test]
fn field_rejects_wrong_length_and_non_finite_values() {
    let g = Grid::new(1, 4, 16, 1.0).unwrap();
    assert!(Field::from_values(g, vec![0.0; 10]).is_err());
    let mut v = vec![0.0; g.len()];
    v[3] = f64::NAN;
    assert!(Field::from_values(g, v).is_err());
}

#[test]
fn zero_mode_examples() {
    let g = Grid::new(1, 16, 32, 3.0).unwrap();
    let c = zero_mode(&Field::constant(g, 2.5));
    assert!(c.values().iter().all(|&v| (v - 2.5).abs() < 1e-15));

    let s = Field::from_fn(g, |x, x3| (TAU * x[0]).sin() * (-x3 * x3).exp());
    assert!(zero_mode(&s).max_abs() < 1e-15);

    let mixed = Field::from_fn(g, |x, x3| (-x3 * x3).exp() + 0.3 * (2.0 * TAU * x[0]).cos());
    let want = Profile::from_fn(g, |x3| (-x3 * x3).exp());
    assert!(max_diff(zero_mode(&mixed).values(), want.values()) < 1e-15);
}

#[test]
fn nonzero_mode_examples() {
    let g = Grid::new(2, 8, 16, 1.0).unwrap();
    assert!(nonzero_mode(&Field::constant(g, 4.0)).max_abs() < 1e-15);
    let s = Field::from_fn(g, |x, _| (TAU * x[0]).sin());
    assert!(max_diff(nonzero_mode(&s).values(), s.values()) < 1e-15);
}

#[test]
fn weighted_norm_of_a_gaussian() {
    let g = Grid::new(1, 2, 4000, 10.0).unwrap();
    let p = Profile::from_fn(g, |x| (-x * x).exp());
    assert_eq!(weighted_l2_norm(&Profile::zeros(g), 0.75), 0.0);
    let plain = weighted_l2_norm(&p, 0.0);
    assert!((plain - (PI / 2.0).powf(0.25)).abs() < 1e-10, "{plain}");
    let oracle = simpson(|x| (1.0 + x * x).powf(0.75) * (-2.0 * x * x).exp(), -10.0, 10.0, 1_000_000).sqrt();
    let w = weighted_l2_norm(&p, 0.75);
    assert!((w / oracle - 1.0).abs() < 1e-6, "{w} vs {oracle}");
}

#[test]
fn hs_alpha_norm_reports_both_summands() {
    let g = Grid::new(1, 8, 256, 8.0).unwrap();
    let f = Field::from_fn(g, |x, x3| (-x3 * x3).exp() * (1.0 + 0.2 * (TAU * x[0]).cos()));
    let n = hs_alpha_norm(&f, 1, 0.75).unwrap();
    assert!((n.total - n.weighted_zero_mode - n.sobolev).abs() < 1e-15);
    assert!(n.weighted_zero_mode > 0.0 && n.sobolev > n.weighted_zero_mode * 0.5);
}

#[test]
fn normal_derivative_examples() {
    let g = Grid::new(1, 2, 160, 4.0).unwrap();
    assert!(d_normal(&Profile::from_fn(g, |_| 3.0), 1).unwrap().max_abs() < 1e-12);
    let lin = d_normal(&Profile::from_fn(g, |x| x), 1).unwrap();
    let n = g.n_normal();
    assert!(lin.values()[2..n - 2].iter().all(|&v| (v - 1.0).abs() < 1e-12));

    let h = g.h3();
    assert!((h - 0.05).abs() < 1e-15);
    let s2 = d_normal(&Profile::from_fn(g, f64::sin), 2).unwrap();
    let err = (0..n).map(|j| (s2.values()[j] + g.x3(j).sin()).abs()).fold(0.0, f64::max);
    assert!(err < 50.0 * h.powi(3), "{err}");
    let interior = (3..n - 3).map(|j| (s2.values()[j] + g.x3(j).sin()).abs()).fold(0.0, f64::max);
    assert!(interior < h.powi(4), "{interior}");

    let coarse = Grid::new(1, 2, 16, 1.0).unwrap();
    assert!(d_normal(&Profile::zeros(coarse), 3).is_ok());
}

#[test]
fn normal_derivative_is_fourth_order() {
    let err = |n3: usize| {
        let g = Grid::new(1, 2, n3, 3.0).unwrap();
        let d = d_normal(&Profile::from_fn(g, |x| (0.7 * x).sin()), 1).unwrap();
        (0..g.n_normal()).map(|j| (d.values()[j] - 0.7 * (0.7 * g.x3(j)).cos()).abs()).fold(0.0, f64::max)
    };
    let (a, b) = (err(64), err(128));
    assert!((a / b).log2() > 3.5, "{a} {b}");
}

#[test]
fn tangential_derivative_examples() {
    let g = Grid::new(1, 16, 16, 1.0).unwrap();
    assert!(d_tangential(&Field::constant(g, 1.0), 0, 1).max_abs() < 1e-12);
    let s = Field::from_fn(g, |x, _| (TAU * x[0]).sin());
    let ds = d_tangential(&s, 0, 1);
    let want = Field::from_fn(g, |x, _| TAU * (TAU * x[0]).cos());
    assert!(max_diff(ds.values(), want.values()) < 1e-12);

    // product rule oracle: (sin cos)' = 2 pi (cos^2 - sin^2)
    let sc = Field::from_fn(g, |x, _| (TAU * x[0]).sin() * (TAU * x[0]).cos());
    let want = Field::from_fn(g, |x, _| TAU * ((TAU * x[0]).cos().powi(2) - (TAU * x[0]).sin().powi(2)));
    assert!(max_diff(d_tangential(&sc, 0, 1).values(), want.values()) < 1e-12);
    let want = Field::from_fn(g, |x, _| TAU * (2.0 * TAU * x[0]).cos());
    assert!(max_diff(d_tangential(&sc, 0, 1).values(), want.values()) < 1e-12);
}

#[test]
fn antiderivative_examples() {
    let g = Grid::new(1, 2, 2000, 10.0).unwrap();
    assert!(antiderivative(&Profile::zeros(g)).max_abs() == 0.0);

    let p = PhysParams::default();
    let dipole = Profile::from_fn(g, |x| {
        diffusion_wave(x, 0.0, &p, Branch::Center) - diffusion_wave(x - 2.0, 0.0, &p, Branch::Center)
    });
    let phi = antiderivative(&dipole);
    assert_eq!(phi.values()[0], 0.0);
    assert!(phi.values().last().unwrap().abs() < 1e-12);

    let gauss = antiderivative(&Profile::from_fn(g, |x| (-x * x).exp()));
    assert!((gauss.values().last().unwrap() - PI.sqrt()).abs() < 1e-8);
}

#[test]
fn antiderivative_is_second_order_consistent() {
    let err = |n3: usize| {
        let g = Grid::new(1, 2, n3, 6.0).unwrap();
        let f = Profile::from_fn(g, |x| (-x * x).exp() * (1.0 + x));
        let back = d_normal(&antiderivative(&f), 1).unwrap();
        back.zip_map(&f, |a, b| a - b).l2_norm()
    };
    let (a, b) = (err(128), err(256));
    assert!((a / b).log2() > 1.9, "{a} {b}");
}

#[test]
fn binary_and_csv_round_trips() {
    let g = Grid::new(2, 4, 16, 1.5).unwrap();
    let f = Field::from_fn(g, |x, x3| x[0] - 2.0 * x[1] + x3.powi(3));
    let mut buf = Vec::new();
    write_field(&mut buf, &f).unwrap();
    assert_eq!(read_field(&mut buf.as_slice()).unwrap(), f);

    let p = zero_mode(&f);
    let mut buf = Vec::new();
    write_profile(&mut buf, &p).unwrap();
    assert_eq!(read_profile(&mut buf.as_slice()).unwrap(), p);
    assert!(read_field(&mut buf.as_slice()).is_err());

    let mut csv = Vec::new();
    write_profile_csv(&mut csv, "phi", &p).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("x3,phi\n"));
    assert_eq!(text.lines().count(), g.n_normal() + 1);
}

fn field_strategy(d: usize, n_perp: usize, n3: usize) -> impl Strategy<Value = Field> {
    let g = Grid::new(d, n_perp, n3, 2.0).unwrap();
    proptest::collection::vec(-10.0f64..10.0, g.len()).prop_map(move |v| Field::from_values(g, v).unwrap())
}

fn any_field() -> impl Strategy<Value = Field> {
    prop_oneof![field_strategy(1, 8, 16), field_strategy(1, 16, 24), field_strategy(2, 4, 16)]
}

proptest! {
    #[test]
    fn mode_split_reconstructs(f in any_field()) {
        let flat = Field::broadcast(&zero_mode(&f));
        let sharp = nonzero_mode(&f);
        let mut sum = flat.clone();
        sum.axpy(1.0, &sharp);
        let scale = f.max_abs().max(1e-300);
        prop_assert!(max_diff(sum.values(), f.values()) <= 1e-13 * scale);
    }

    #[test]
    fn nonzero_mode_has_no_zero_mode(f in any_field()) {
        prop_assert!(zero_mode(&nonzero_mode(&f)).max_abs() <= 1e-13 * f.max_abs().max(1.0));
    }

    #[test]
    fn poincare_on_the_torus(f in any_field()) {
        let lhs = nonzero_mode(&f).l2_norm();
        let rhs = grad_perp_norm(&f) / TAU;
        prop_assert!(lhs <= rhs * (1.0 + 1e-10), "{} > {}", lhs, rhs);
    }

    #[test]
    fn calculus_is_linear(f in field_strategy(1, 8, 16), g in field_strategy(1, 8, 16), a in -3.0f64..3.0) {
        let mut comb = f.clone();
        comb.axpy(a, &g);
        for order in 1..=3 {
            let lhs = d_normal(&comb, order).unwrap();
            let mut rhs = d_normal(&f, order).unwrap();
            rhs.axpy(a, &d_normal(&g, order).unwrap());
            let scale = lhs.max_abs().max(1.0);
            prop_assert!(max_diff(lhs.values(), rhs.values()) <= 1e-11 * scale);
        }
        let lhs = d_tangential(&comb, 0, 1);
        let mut rhs = d_tangential(&f, 0, 1);
        rhs.axpy(a, &d_tangential(&g, 0, 1));
        prop_assert!(max_diff(lhs.values(), rhs.values()) <= 1e-11 * lhs.max_abs().max(1.0));
    }

    #[test]
    fn cubics_are_differentiated_exactly(c in proptest::array::uniform4(-2.0f64..2.0)) {
        let g = Grid::new(1, 2, 32, 2.0).unwrap();
        let p = Profile::from_fn(g, |x| c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x);
        let exact = [
            |c: &[f64; 4], x: f64| c[1] + 2.0 * c[2] * x + 3.0 * c[3] * x * x,
            |c: &[f64; 4], x: f64| 2.0 * c[2] + 6.0 * c[3] * x,
            |c: &[f64; 4], _x: f64| 6.0 * c[3],
        ];
        for (k, e) in exact.iter().enumerate() {
            let d = d_normal(&p, k + 1).unwrap();
            for j in 3..g.n_normal() - 3 {
                prop_assert!((d.values()[j] - e(&c, g.x3(j))).abs() < 1e-9);
            }
        }
    }
}
