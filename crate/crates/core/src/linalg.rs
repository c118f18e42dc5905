//! Dense kernels shared by the solvers.

use nalgebra::{Cholesky, DMatrix, DVector, SVD};

use crate::error::{Error, Result};
use crate::{Matrix, Vector};

/// Copies the columns `cols` of `a` into a new matrix.
pub(crate) fn columns(a: &Matrix, cols: &[usize]) -> Matrix {
    DMatrix::from_fn(a.nrows(), cols.len(), |i, c| a[(i, cols[c])])
}

/// Expands `values` placed at `cols` into a length-`n` vector.
pub(crate) fn scatter(values: &[f64], cols: &[usize], n: usize) -> Vector {
    let mut out = DVector::zeros(n);
    for (&j, &v) in cols.iter().zip(values) {
        out[j] = v;
    }
    out
}

/// Solves `[(A_Sᵀ A_S) ∘ (w wᵀ) + Diag(d)] x = rhs` with `S = cols`.
///
/// The system equals `BᵀB + Diag(d)` with `B = A_S Diag(w)`. When `|S|` does
/// not exceed the row count the `|S| × |S|` matrix is factored directly;
/// otherwise the Woodbury identity reduces the work to an `m × m` Cholesky
/// factor, followed by one step of iterative refinement. Every entry of `d`
/// must be positive.
pub(crate) fn solve_hadamard_system(
    a: &Matrix,
    cols: &[usize],
    w: &[f64],
    d: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let s = cols.len();
    debug_assert!(w.len() == s && d.len() == s && rhs.len() == s);
    if s == 0 {
        return Ok(Vec::new());
    }
    if d.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::Singular);
    }
    let m = a.nrows();
    let b = DMatrix::from_fn(m, s, |i, c| a[(i, cols[c])] * w[c]);
    let rhs = DVector::from_column_slice(rhs);

    if s <= m {
        let mut sys = b.tr_mul(&b);
        for (i, &di) in d.iter().enumerate() {
            sys[(i, i)] += di;
        }
        let chol = Cholesky::new(sys).ok_or(Error::Singular)?;
        return Ok(chol.solve(&rhs).as_slice().to_vec());
    }

    let dinv: Vec<f64> = d.iter().map(|x| 1.0 / x).collect();
    let mut scaled = b.clone();
    for (c, &di) in dinv.iter().enumerate() {
        scaled.column_mut(c).scale_mut(di.sqrt());
    }
    let mut capacitance = &scaled * scaled.transpose();
    for i in 0..m {
        capacitance[(i, i)] += 1.0;
    }
    let chol = Cholesky::new(capacitance).ok_or(Error::Singular)?;

    let apply_inverse = |r: &DVector<f64>| -> DVector<f64> {
        let dr = DVector::from_iterator(s, r.iter().zip(&dinv).map(|(x, di)| x * di));
        let t = chol.solve(&(&b * &dr));
        let bt = b.tr_mul(&t);
        DVector::from_iterator(s, (0..s).map(|i| dr[i] - dinv[i] * bt[i]))
    };

    let mut x = apply_inverse(&rhs);
    let bx = &b * &x;
    let btbx = b.tr_mul(&bx);
    let residual = DVector::from_iterator(s, (0..s).map(|i| rhs[i] - btbx[i] - d[i] * x[i]));
    x += apply_inverse(&residual);
    Ok(x.as_slice().to_vec())
}

/// Least-squares fit of `y` on the columns `cols`.
///
/// With at most `m` columns the submatrix must have full column rank, else
/// [`Error::RankDeficient`]. With more columns than rows the minimum-norm
/// solution is returned.
pub(crate) fn least_squares(a: &Matrix, y: &Vector, cols: &[usize]) -> Result<Vec<f64>> {
    let (coef, rank) = min_norm_fit(a, y, cols)?;
    if cols.len() <= a.nrows() && rank < cols.len() {
        return Err(Error::RankDeficient {
            columns: cols.len(),
            rank,
        });
    }
    Ok(coef)
}

/// Minimum-norm least-squares coefficients on `cols` and the numerical rank
/// of the submatrix.
pub(crate) fn min_norm_fit(a: &Matrix, y: &Vector, cols: &[usize]) -> Result<(Vec<f64>, usize)> {
    if cols.is_empty() {
        return Ok((Vec::new(), 0));
    }
    let sub = columns(a, cols);
    let (m, s) = sub.shape();
    let svd = SVD::new(sub, true, true);
    let sigma_max = svd.singular_values.max();
    let cutoff = f64::EPSILON * (m.max(s) as f64) * sigma_max;
    let rank = svd.singular_values.iter().filter(|&&x| x > cutoff).count();
    let coef = svd
        .solve(y, cutoff.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok((coef.as_slice().to_vec(), rank))
}

/// Estimate of `‖A‖₂²` by power iteration on `AᵀA`.
pub(crate) fn spectral_norm_sq(a: &Matrix) -> f64 {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return 0.0;
    }
    // fixed non-symmetric start vector so the estimate is deterministic
    let mut x = DVector::from_fn(n, |j, _| 1.0 + (j as f64 * 0.618_033_988_7).fract());
    x.normalize_mut();
    let mut est = 0.0;
    for _ in 0..500 {
        let ax = a * &x;
        let next = a.tr_mul(&ax);
        let norm = next.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let prev = est;
        est = norm;
        x = next / norm;
        if (est - prev).abs() <= 1e-12 * est {
            break;
        }
    }
    est
}

pub(crate) fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
