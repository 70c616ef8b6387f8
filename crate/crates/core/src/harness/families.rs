use super::config::{Family, InitialConfig};
use crate::ansatz::InitialPerturbation;
use crate::domain::{Field, Grid, PhysParams};
use crate::error::Result;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

/// Builds `(b0, v0)` for a family. The seed only rotates the tangential phase.
pub fn initial_perturbation(
    ic: &InitialConfig,
    grid: &Grid,
    params: &PhysParams,
    seed: u64,
) -> Result<InitialPerturbation> {
    let d = grid.d;
    let phase = ChaCha8Rng::seed_from_u64(seed).gen::<f64>() * TAU;
    let (c, w) = (ic.center, ic.width);
    let g = move |x3: f64| (-((x3 - c) / w).powi(2)).exp();
    let arg = move |x: [f64; 2]| TAU * (x[0] + if d == 2 { x[1] } else { 0.0 }) + phase;
    let a = ic.chi_amplitude;
    let bz = ic.zero_mode_amplitude;

    let mut b0 = Field::zeros(*grid);
    let mut v0: Vec<Field> = (0..=d).map(|_| Field::zeros(*grid)).collect();

    let bump = |b0: &mut Field, v0: &mut [Field]| {
        b0.axpy(1.0, &Field::from_fn(*grid, |x, x3| a * g(x3) * (1.0 + arg(x).cos())));
        for (i, v) in v0.iter_mut().enumerate().take(d) {
            let shift = i as f64;
            v.axpy(1.0, &Field::from_fn(*grid, |x, x3| a * g(x3) * (arg(x) + shift).sin()));
        }
        v0[d].axpy(1.0, &Field::from_fn(*grid, |x, x3| a * g(x3) * arg(x).cos()));
    };
    let pulse = |b0: &mut Field, v0: &mut [Field]| {
        let speed = params.a_bar() / params.rho_bar;
        b0.axpy(1.0, &Field::from_fn(*grid, |_, x3| a * g(x3)));
        v0[d].axpy(1.0, &Field::from_fn(*grid, |_, x3| a * speed * g(x3)));
    };

    match ic.family {
        Family::NonzeroBump => bump(&mut b0, &mut v0),
        Family::TangentialZeromode => {
            b0.axpy(1.0, &Field::from_fn(*grid, |x, x3| a * g(x3) * arg(x).cos()));
        }
        Family::AcousticPulse => pulse(&mut b0, &mut v0),
        Family::Mixed => {
            bump(&mut b0, &mut v0);
            pulse(&mut b0, &mut v0);
        }
    }
    if bz != 0.0 {
        for v in v0.iter_mut().take(d) {
            v.axpy(1.0, &Field::from_fn(*grid, |_, x3| bz * g(x3)));
        }
    }
    InitialPerturbation::new(b0, v0)
}
