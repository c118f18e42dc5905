//! Seeded generation of measurement matrices, sparse signals and noise.
//!
//! Every generator is a pure function of its arguments. A single trial seed
//! drives all of them: each generator reads its own ChaCha stream
//! ([`StreamRole`]) keyed by that seed, so for example switching the noise
//! model never perturbs the matrix or the signal of the same trial.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::support::SupportSet;
use crate::{Matrix, Vector};

/// Independent random stream consumed by one generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamRole {
    Matrix = 1,
    Signal = 2,
    Noise = 3,
    Init = 4,
}

/// The RNG for `role` under `seed`.
pub fn stream_rng(seed: u64, role: StreamRole) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(role as u64);
    rng
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Mixes a master seed with a path of integers (grid point, trial, ...).
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &p| {
        splitmix64(acc ^ splitmix64(p))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    Gaussian,
    PartialDct,
}

impl Ensemble {
    pub fn name(self) -> &'static str {
        match self {
            Ensemble::Gaussian => "gaussian",
            Ensemble::PartialDct => "partial_dct",
        }
    }

    pub fn generate(self, m: usize, n: usize, seed: u64) -> Result<Matrix> {
        match self {
            Ensemble::Gaussian => gen_gaussian_matrix(m, n, seed),
            Ensemble::PartialDct => gen_partial_dct(m, n, seed),
        }
    }
}

fn check_shape(m: usize, n: usize) -> Result<()> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "matrix dimensions must be positive, got {m}x{n}"
        )));
    }
    Ok(())
}

fn normalize_columns(a: &mut Matrix) -> bool {
    for mut col in a.column_iter_mut() {
        let norm = col.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return false;
        }
        col.unscale_mut(norm);
    }
    true
}

/// `m × n` matrix with i.i.d. standard normal entries and unit-norm columns.
pub fn gen_gaussian_matrix(m: usize, n: usize, seed: u64) -> Result<Matrix> {
    check_shape(m, n)?;
    let mut rng = stream_rng(seed, StreamRole::Matrix);
    loop {
        // column-major fill: each column is one contiguous block of draws
        let data: Vec<f64> = (0..m * n)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        let mut a = DMatrix::from_vec(m, n, data);
        if normalize_columns(&mut a) {
            return Ok(a);
        }
    }
}

/// Random partial cosine matrix `A_ij = cos(2π j ψ_i)` (zero-based `j`),
/// `ψ_i` uniform on `[0, 1)`, with unit-norm columns.
///
/// A draw producing an all-zero column is discarded and redrawn.
pub fn gen_partial_dct(m: usize, n: usize, seed: u64) -> Result<Matrix> {
    check_shape(m, n)?;
    let mut rng = stream_rng(seed, StreamRole::Matrix);
    loop {
        let psi: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
        let mut a = partial_dct_raw(&psi, n);
        if normalize_columns(&mut a) {
            return Ok(a);
        }
    }
}

/// Unnormalized partial cosine matrix for the given row frequencies.
pub fn partial_dct_raw(psi: &[f64], n: usize) -> Matrix {
    DMatrix::from_fn(psi.len(), n, |i, j| (2.0 * PI * j as f64 * psi[i]).cos())
}

/// Sparse ground-truth signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSignal {
    pub n: usize,
    pub support: SupportSet,
    /// Nonzero values, aligned with `support`.
    pub values: Vec<f64>,
}

impl SparseSignal {
    pub fn new(n: usize, support: SupportSet, values: Vec<f64>) -> Result<Self> {
        check_len("signal values", support.len(), values.len())?;
        if support.bound() > n {
            return Err(Error::InvalidArgument("support exceeds dimension".into()));
        }
        Ok(Self { n, support, values })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            n,
            support: SupportSet::empty(),
            values: Vec::new(),
        }
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn dense(&self) -> Vector {
        crate::linalg::scatter(&self.values, self.support.as_slice(), self.n)
    }
}

/// `k`-sparse signal: uniformly random support, standard normal values.
pub fn gen_sparse_signal(n: usize, k: usize, seed: u64) -> Result<SparseSignal> {
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "sparsity must satisfy 1 <= k <= n, got k={k}, n={n}"
        )));
    }
    let mut rng = stream_rng(seed, StreamRole::Signal);
    let support: SupportSet = index::sample(&mut rng, n, k).into_iter().collect();
    let values = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
    SparseSignal::new(n, support, values)
}

/// Distribution of the additive measurement noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    #[default]
    None,
    /// Entries `σ·g/√m`, `g` standard normal.
    Gaussian { sigma: f64 },
    /// Entries `σ·t/√m`, `t` Student-t with `dof` degrees of freedom.
    StudentT { sigma: f64, dof: f64 },
}

impl NoiseModel {
    pub fn sigma(&self) -> f64 {
        match *self {
            NoiseModel::None => 0.0,
            NoiseModel::Gaussian { sigma } | NoiseModel::StudentT { sigma, .. } => sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            NoiseModel::None => Ok(()),
            NoiseModel::Gaussian { sigma } if sigma >= 0.0 && sigma.is_finite() => Ok(()),
            NoiseModel::StudentT { sigma, dof }
                if sigma >= 0.0 && sigma.is_finite() && dof > 0.0 =>
            {
                Ok(())
            }
            other => Err(Error::InvalidArgument(format!(
                "invalid noise model {other:?}"
            ))),
        }
    }
}

pub fn gen_noise(model: &NoiseModel, m: usize, seed: u64) -> Result<Vector> {
    model.validate()?;
    if m == 0 {
        return Err(Error::InvalidArgument(
            "noise length must be positive".into(),
        ));
    }
    let mut rng = stream_rng(seed, StreamRole::Noise);
    let scale = model.sigma() / (m as f64).sqrt();
    let w = match *model {
        NoiseModel::None => DVector::zeros(m),
        NoiseModel::Gaussian { .. } => DVector::from_fn(m, |_, _| {
            let g: f64 = StandardNormal.sample(&mut rng);
            scale * g
        }),
        NoiseModel::StudentT { dof, .. } => {
            let t = StudentT::new(dof).map_err(|e| Error::InvalidArgument(e.to_string()))?;
            DVector::from_fn(m, |_, _| scale * t.sample(&mut rng))
        }
    };
    Ok(w)
}

/// One recovery problem `y = A x + w` together with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub matrix: Matrix,
    pub truth: SparseSignal,
    pub noise: Vector,
    pub y: Vector,
    pub seed: u64,
    pub ensemble: Ensemble,
}

impl ProblemInstance {
    pub fn m(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n(&self) -> usize {
        self.matrix.ncols()
    }
}

pub fn assemble_instance(
    matrix: Matrix,
    truth: SparseSignal,
    noise: Vector,
    seed: u64,
    ensemble: Ensemble,
) -> Result<ProblemInstance> {
    check_len("signal dimension", matrix.ncols(), truth.n)?;
    check_len("noise length", matrix.nrows(), noise.len())?;
    let y = &matrix * truth.dense() + &noise;
    Ok(ProblemInstance {
        matrix,
        truth,
        noise,
        y,
        seed,
        ensemble,
    })
}

/// Matrix, signal and noise for one trial, all keyed by `seed`.
pub fn generate_instance(
    ensemble: Ensemble,
    m: usize,
    n: usize,
    k: usize,
    noise: &NoiseModel,
    seed: u64,
) -> Result<ProblemInstance> {
    let matrix = ensemble.generate(m, n, seed)?;
    let truth = gen_sparse_signal(n, k, seed)?;
    let w = gen_noise(noise, m, seed)?;
    assemble_instance(matrix, truth, w, seed, ensemble)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column_norms_are_unit(a: &Matrix) -> bool {
        a.column_iter().all(|c| (c.norm() - 1.0).abs() <= 1e-12)
    }

    #[test]
    fn gaussian_columns_unit_norm() {
        let a = gen_gaussian_matrix(64, 256, 42).unwrap();
        assert_eq!(a.shape(), (64, 256));
        assert!(column_norms_are_unit(&a));
    }

    #[test]
    fn scalar_gaussian_is_plus_minus_one() {
        for seed in 0..10 {
            let a = gen_gaussian_matrix(1, 1, seed).unwrap();
            assert_eq!(a[(0, 0)].abs(), 1.0);
        }
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(
            gen_gaussian_matrix(4, 8, 7).unwrap(),
            gen_gaussian_matrix(4, 8, 7).unwrap()
        );
        assert_eq!(
            gen_partial_dct(4, 8, 7).unwrap(),
            gen_partial_dct(4, 8, 7).unwrap()
        );
        assert_ne!(
            gen_gaussian_matrix(4, 8, 7).unwrap(),
            gen_gaussian_matrix(4, 8, 8).unwrap()
        );
    }

    #[test]
    fn rejects_empty_shapes() {
        assert!(gen_gaussian_matrix(0, 3, 1).is_err());
        assert!(gen_partial_dct(3, 0, 1).is_err());
    }

    #[test]
    fn partial_dct_raw_entries() {
        let raw = partial_dct_raw(&[0.25, 0.6], 3);
        // zero-based column 1 at psi = 1/4 is cos(pi/2)
        assert!(raw[(0, 1)].abs() < 1e-15);
        assert_eq!(raw[(0, 0)], 1.0);
        assert_eq!(raw[(1, 0)], 1.0);
    }

    #[test]
    fn partial_dct_first_column_constant() {
        let a = gen_partial_dct(64, 256, 5).unwrap();
        assert!(column_norms_are_unit(&a));
        let expected = 1.0 / 8.0;
        assert!(a.column(0).iter().all(|&x| (x - expected).abs() < 1e-15));
    }

    #[test]
    fn sparse_signal_shapes() {
        let x = gen_sparse_signal(256, 12, 9).unwrap();
        assert_eq!(x.sparsity(), 12);
        assert_eq!(x.dense().iter().filter(|v| **v != 0.0).count(), 12);
        let full = gen_sparse_signal(5, 5, 3).unwrap();
        assert_eq!(full.support, SupportSet::full(5));
        assert!(gen_sparse_signal(4, 5, 1).is_err());
        assert!(gen_sparse_signal(4, 0, 1).is_err());
    }

    #[test]
    fn support_sampler_is_uniform() {
        let (n, k, draws) = (8, 2, 10_000);
        let mut hits = vec![0usize; n];
        for seed in 0..draws {
            for j in gen_sparse_signal(n, k, seed as u64).unwrap().support.iter() {
                hits[j] += 1;
            }
        }
        for h in hits {
            let freq = h as f64 / draws as f64;
            assert!((freq - 0.25).abs() <= 0.02, "frequency {freq}");
        }
    }

    #[test]
    fn zero_noise_cases() {
        assert_eq!(
            gen_noise(&NoiseModel::None, 5, 1).unwrap(),
            DVector::zeros(5)
        );
        let w = gen_noise(&NoiseModel::Gaussian { sigma: 0.0 }, 5, 1).unwrap();
        assert_eq!(w, DVector::zeros(5));
        assert!(gen_noise(&NoiseModel::Gaussian { sigma: -1.0 }, 5, 1).is_err());
        assert!(gen_noise(
            &NoiseModel::StudentT {
                sigma: 1.0,
                dof: 0.0
            },
            5,
            1
        )
        .is_err());
    }

    #[test]
    fn gaussian_noise_norm_concentrates() {
        let model = NoiseModel::Gaussian { sigma: 0.01 };
        let mean: f64 = (0..1000)
            .map(|s| gen_noise(&model, 64, s).unwrap().norm())
            .sum::<f64>()
            / 1000.0;
        assert!((0.009..=0.011).contains(&mean), "mean noise norm {mean}");
    }

    #[test]
    fn student_noise_is_finite_and_scaled() {
        let model = NoiseModel::StudentT {
            sigma: 0.01,
            dof: 5.0,
        };
        let w = gen_noise(&model, 64, 3).unwrap();
        assert!(w.iter().all(|x| x.is_finite()));
        assert!(w.norm() < 0.1);
    }

    #[test]
    fn noise_stream_independent_of_matrix() {
        let quiet = generate_instance(Ensemble::Gaussian, 6, 8, 2, &NoiseModel::None, 77).unwrap();
        let noisy = generate_instance(
            Ensemble::Gaussian,
            6,
            8,
            2,
            &NoiseModel::Gaussian { sigma: 0.5 },
            77,
        )
        .unwrap();
        assert_eq!(quiet.matrix, noisy.matrix);
        assert_eq!(quiet.truth, noisy.truth);
    }

    #[test]
    fn assemble_checks_and_computes_observation() {
        let inst = generate_instance(
            Ensemble::Gaussian,
            6,
            8,
            2,
            &NoiseModel::Gaussian { sigma: 0.1 },
            4,
        )
        .unwrap();
        let resid = &inst.y - &inst.matrix * inst.truth.dense() - &inst.noise;
        assert!(resid.amax() < 1e-14);

        let eye = DMatrix::identity(4, 4);
        let x =
            SparseSignal::new(4, SupportSet::new(vec![1, 3], 4).unwrap(), vec![2.0, -1.0]).unwrap();
        let inst =
            assemble_instance(eye, x.clone(), DVector::zeros(4), 0, Ensemble::Gaussian).unwrap();
        assert_eq!(inst.y, x.dense());

        let zero = assemble_instance(
            DMatrix::identity(3, 3),
            SparseSignal::zero(3),
            DVector::zeros(3),
            0,
            Ensemble::Gaussian,
        )
        .unwrap();
        assert_eq!(zero.y, DVector::zeros(3));

        let bad = assemble_instance(
            DMatrix::identity(3, 3),
            SparseSignal::zero(4),
            DVector::zeros(3),
            0,
            Ensemble::Gaussian,
        );
        assert!(matches!(bad, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn derived_seeds_differ_by_path() {
        let a = derive_seed(1, &[0, 0]);
        let b = derive_seed(1, &[0, 1]);
        let c = derive_seed(1, &[1, 0]);
        assert!(a != b && b != c && a != c);
        assert_eq!(a, derive_seed(1, &[0, 0]));
    }
}
