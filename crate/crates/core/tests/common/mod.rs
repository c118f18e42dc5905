#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tailcs::objective::FactorPair;
use tailcs::{Matrix, Vector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_matrix(m: usize, n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0))
}

pub fn uniform_vector(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> Vector {
    DVector::from_fn(n, |_, _| scale * rng.random_range(-1.0..1.0))
}

pub fn random_pair(n: usize, rng: &mut ChaCha8Rng) -> FactorPair {
    FactorPair {
        u: uniform_vector(n, 1.5, rng),
        v: uniform_vector(n, 1.5, rng),
    }
}

pub fn stack(w: &FactorPair) -> Vector {
    let n = w.len();
    DVector::from_fn(2 * n, |i, _| if i < n { w.u[i] } else { w.v[i - n] })
}

pub fn unstack(x: &Vector) -> FactorPair {
    let n = x.len() / 2;
    FactorPair {
        u: x.rows(0, n).into_owned(),
        v: x.rows(n, n).into_owned(),
    }
}

pub fn relative_error(approx: &Vector, exact: &Vector) -> f64 {
    (approx - exact).norm() / exact.norm().max(1e-12)
}
