use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DVector;

use crate::error::{check_len, Error, Result};
use crate::linalg::{least_squares, min_norm_fit, scatter};
use crate::objective::TailProblem;
use crate::support::SupportSet;
use crate::{Matrix, Vector};

use super::oracle::tail_lasso_oracle_from;

const MAX_HALVINGS: usize = 80;
const MAX_BISECTIONS: usize = 60;

/// Minimizes `‖z_{Tᶜ}‖₁` subject to `‖Az − y‖ ≤ ε`.
///
/// With `ε = 0` this is the equality-constrained linear program in `(z, t)`
/// with `t ≥ ±z` on `Tᶜ`, solved by simplex and then refined by least
/// squares on the recovered support. With `ε > 0` the tail-lasso oracle is
/// traced along decreasing `λ` until the residual drops below `ε`, and the
/// crossing is refined by bisection; the returned point is always feasible.
/// `tol` is the KKT tolerance handed to the oracle.
pub fn tail_l1_constrained(
    a: &Matrix,
    y: &Vector,
    t: &SupportSet,
    eps: f64,
    tol: f64,
) -> Result<Vector> {
    check_len("observation", a.nrows(), y.len())?;
    if t.bound() > a.ncols() {
        return Err(Error::InvalidArgument("support index out of range".into()));
    }
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument("epsilon must be nonnegative".into()));
    }
    if y.iter().all(|&v| v == 0.0) {
        return Ok(DVector::zeros(a.ncols()));
    }
    if eps == 0.0 {
        equality_lp(a, y, t)
    } else {
        continuation(a, y, t, eps, tol)
    }
}

fn equality_lp(a: &Matrix, y: &Vector, t: &SupportSet) -> Result<Vector> {
    let (m, n) = a.shape();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let z: Vec<_> = (0..n)
        .map(|_| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    for j in t.complement(n).iter() {
        let tj = lp.add_var(1.0, (0.0, f64::INFINITY));
        lp.add_constraint([(tj, 1.0), (z[j], -1.0)], ComparisonOp::Ge, 0.0);
        lp.add_constraint([(tj, 1.0), (z[j], 1.0)], ComparisonOp::Ge, 0.0);
    }
    for i in 0..m {
        let row: Vec<_> = (0..n)
            .filter(|&j| a[(i, j)] != 0.0)
            .map(|j| (z[j], a[(i, j)]))
            .collect();
        lp.add_constraint(row, ComparisonOp::Eq, y[i]);
    }
    let solution = match lp.solve() {
        Ok(outcome) => outcome
            .into_solution()
            .map_err(|_| Error::Infeasible("linear program was interrupted".into()))?,
        Err(microlp::Error::Infeasible) => {
            return Err(Error::Infeasible("no z satisfies Az = y".into()))
        }
        Err(e) => {
            return Err(Error::InvalidArgument(format!(
                "linear program failed: {e}"
            )))
        }
    };
    let raw = DVector::from_iterator(n, z.iter().map(|&v| solution.var_value(v)));
    Ok(refine(a, y, raw))
}

/// Re-solves `A_S z_S = y` on the support of a simplex vertex to remove the
/// pivoting round-off, keeping the original if the refit is not better.
fn refine(a: &Matrix, y: &Vector, raw: Vector) -> Vector {
    let scale = raw.amax().max(f64::MIN_POSITIVE);
    let support = SupportSet::above_threshold(raw.as_slice(), 1e-9 * scale);
    if support.len() > a.nrows() {
        return raw;
    }
    let Ok(coef) = least_squares(a, y, support.as_slice()) else {
        return raw;
    };
    let fitted = scatter(&coef, support.as_slice(), a.ncols());
    let resid = |z: &Vector| (a * z - y).norm();
    let close = (&fitted - &raw).amax() <= 1e-6 * (1.0 + scale);
    if close && resid(&fitted) <= resid(&raw) {
        fitted
    } else {
        raw
    }
}

fn continuation(a: &Matrix, y: &Vector, t: &SupportSet, eps: f64, tol: f64) -> Result<Vector> {
    let n = a.ncols();
    let resid = |z: &Vector| (a * z - y).norm();

    let z_t = scatter(&least_squares(a, y, t.as_slice())?, t.as_slice(), n);
    let r_t = y - a * &z_t;
    if r_t.norm() <= eps {
        return Ok(z_t);
    }
    let all: Vec<usize> = (0..n).collect();
    let z_all = scatter(&min_norm_fit(a, y, &all)?.0, &all, n);
    if resid(&z_all) > eps {
        return Err(Error::Infeasible(format!(
            "smallest attainable residual {:e} exceeds epsilon {eps:e}",
            resid(&z_all)
        )));
    }

    // for λ ≥ λ_max the tail stays empty and the residual is that of z_t
    let gamma = a.tr_mul(&r_t);
    let lambda_max = t
        .complement(n)
        .iter()
        .map(|j| gamma[j].abs())
        .fold(0.0, f64::max);
    let solve = |lambda: f64, warm: &Vector| -> Result<Vector> {
        let p = TailProblem::new(a, y, lambda, t.clone())?;
        tail_lasso_oracle_from(&p, tol, warm)
    };

    let mut hi = lambda_max;
    let mut lo = lambda_max / 2.0;
    let mut z_lo = solve(lo, &z_t)?;
    let mut halvings = 0;
    while resid(&z_lo) > eps {
        halvings += 1;
        if halvings > MAX_HALVINGS {
            return Err(Error::NotConverged {
                iters: halvings,
                residual: resid(&z_lo),
            });
        }
        hi = lo;
        lo /= 2.0;
        z_lo = solve(lo, &z_lo)?;
    }
    for _ in 0..MAX_BISECTIONS {
        if resid(&z_lo) >= eps * (1.0 - 1e-8) || hi - lo <= 1e-15 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let z_mid = solve(mid, &z_lo)?;
        if resid(&z_mid) <= eps {
            lo = mid;
            z_lo = z_mid;
        } else {
            hi = mid;
        }
    }
    Ok(z_lo)
}
