use nalgebra::{Cholesky, DVector};

use crate::error::{Error, Result};
use crate::linalg::{columns, least_squares, scatter, sign, spectral_norm_sq};
use crate::objective::{kkt_from_gamma, TailProblem, DEFAULT_ZERO_TOL};
use crate::support::SupportSet;
use crate::Vector;

const MAX_ITERS: usize = 200_000;
const CHECK_EVERY: usize = 20;

/// Global minimizer of `½‖Az − y‖² + λ‖z_{Tᶜ}‖₁` with KKT residual at most
/// `tol`.
///
/// Runs accelerated proximal gradient with adaptive restart (step
/// `1/‖A‖₂²`, soft thresholding on `Tᶜ` only). Every few iterations the
/// current sign pattern is polished by solving the reduced optimality
/// system exactly, which finishes the job once the active set has settled.
pub fn tail_lasso_oracle(p: &TailProblem<'_>, tol: f64) -> Result<Vector> {
    tail_lasso_oracle_from(p, tol, &DVector::zeros(p.n()))
}

pub(crate) fn tail_lasso_oracle_from(p: &TailProblem<'_>, tol: f64, z0: &Vector) -> Result<Vector> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(
            "oracle tolerance must be positive".into(),
        ));
    }
    crate::error::check_len("warm start", p.n(), z0.len())?;
    let a = p.matrix();
    let y = p.observation();
    let mask = p.penalized_mask();
    let lipschitz = spectral_norm_sq(a) * 1.01;
    if lipschitz == 0.0 {
        // A = 0: every z is optimal on T, the tail must vanish
        return Ok(DVector::zeros(p.n()));
    }
    let step = 1.0 / lipschitz;
    let shrink = p.lambda() * step;

    let mut x = z0.clone();
    let mut mom = x.clone();
    let mut t = 1.0f64;
    let mut kkt = f64::INFINITY;
    for iter in 0..MAX_ITERS {
        if iter % CHECK_EVERY == 0 {
            kkt = kkt_from_gamma(p, &x, &p.gamma(&x), DEFAULT_ZERO_TOL).overall;
            if kkt <= tol {
                return Ok(x);
            }
            if let Some(z) = polish(p, &x, tol) {
                return Ok(z);
            }
        }
        let grad = a.tr_mul(&(a * &mom - y));
        let mut next = &mom - grad * step;
        for (j, xj) in next.iter_mut().enumerate() {
            if mask[j] {
                *xj = sign(*xj) * (xj.abs() - shrink).max(0.0);
            }
        }
        let diff = &next - &x;
        if (&mom - &next).dot(&diff) > 0.0 {
            t = 1.0;
            mom = next.clone();
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            mom = &next + diff * ((t - 1.0) / t_next);
            t = t_next;
        }
        x = next;
    }
    Err(Error::NotConverged {
        iters: MAX_ITERS,
        residual: kkt,
    })
}

/// Solves the optimality system for the sign pattern of `x` exactly and
/// returns the result if it is consistent and meets `tol`.
fn polish(p: &TailProblem<'_>, x: &Vector, tol: f64) -> Option<Vector> {
    let n = p.n();
    let active: SupportSet = (0..n)
        .filter(|&j| !p.is_penalized(j) || x[j] != 0.0)
        .collect();
    let cols = active.as_slice();
    let signs: Vec<f64> = cols
        .iter()
        .map(|&j| if p.is_penalized(j) { sign(x[j]) } else { 0.0 })
        .collect();
    let a = p.matrix();
    let coef = if signs.iter().all(|&s| s == 0.0) {
        least_squares(a, p.observation(), cols).ok()?
    } else {
        if cols.len() > p.m() {
            return None;
        }
        let sub = columns(a, cols);
        let rhs = sub.tr_mul(p.observation())
            - DVector::from_iterator(cols.len(), signs.iter().map(|s| s * p.lambda()));
        let chol = Cholesky::new(sub.tr_mul(&sub))?;
        chol.solve(&rhs).as_slice().to_vec()
    };
    let consistent = coef
        .iter()
        .zip(&signs)
        .all(|(c, &s)| s == 0.0 || sign(*c) == s);
    if !consistent {
        return None;
    }
    let z = scatter(&coef, cols, n);
    let kkt = kkt_from_gamma(p, &z, &p.gamma(&z), DEFAULT_ZERO_TOL).overall;
    (kkt <= tol).then_some(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{f_value, kkt_report};
    use crate::Matrix;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_data(m: usize, n: usize, seed: u64) -> (Matrix, Vector) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
        let y = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
        (a, y)
    }

    #[test]
    fn zero_observation_gives_zero() {
        let (a, _) = random_data(5, 8, 1);
        let y = DVector::zeros(5);
        let p = TailProblem::new(&a, &y, 0.1, SupportSet::new(vec![3], 8).unwrap()).unwrap();
        assert_eq!(tail_lasso_oracle(&p, 1e-10).unwrap(), DVector::zeros(8));
    }

    #[test]
    fn empty_tail_is_least_squares() {
        let (a, y) = random_data(8, 5, 2);
        let p = TailProblem::new(&a, &y, 0.3, SupportSet::full(5)).unwrap();
        let z = tail_lasso_oracle(&p, 1e-10).unwrap();
        let normal = (a.transpose() * &a)
            .cholesky()
            .unwrap()
            .solve(&a.tr_mul(&y));
        assert!((z - normal).amax() < 1e-8);
    }

    #[test]
    fn meets_tolerance_on_random_instances() {
        for seed in 0..10 {
            let (a, y) = random_data(10, 25, 10 + seed);
            let lambda = 0.02 + 0.05 * seed as f64;
            let p =
                TailProblem::new(&a, &y, lambda, SupportSet::new(vec![0, 1], 25).unwrap()).unwrap();
            let z = tail_lasso_oracle(&p, 1e-10).unwrap();
            assert!(kkt_report(&p, &z).unwrap().overall <= 1e-10);
            // perturbations never do better
            let f = f_value(&p, &z).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..20 {
                let d = DVector::from_fn(25, |_, _| rng.random_range(-1e-3..1e-3));
                assert!(f_value(&p, &(&z + d)).unwrap() >= f - 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_tolerance() {
        let (a, y) = random_data(3, 4, 3);
        let p = TailProblem::new(&a, &y, 0.1, SupportSet::empty()).unwrap();
        assert!(tail_lasso_oracle(&p, 0.0).is_err());
    }
}
