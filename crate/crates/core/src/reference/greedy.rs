use nalgebra::DVector;

use crate::error::{check_len, Result};
use crate::linalg::{least_squares, scatter};
use crate::support::{hard_threshold_support, SupportSet};
use crate::{Matrix, Vector};

use super::{BaselineConfig, Recovery};

fn prepare(a: &Matrix, y: &Vector, cfg: &BaselineConfig) -> Result<Option<Recovery>> {
    check_len("observation", a.nrows(), y.len())?;
    cfg.validate(a.nrows(), a.ncols())?;
    Ok(y.iter().all(|&v| v == 0.0).then(|| Recovery {
        z: DVector::zeros(a.ncols()),
        iters: 0,
    }))
}

fn fit(a: &Matrix, y: &Vector, support: &SupportSet) -> Result<Vector> {
    let coef = least_squares(a, y, support.as_slice())?;
    Ok(scatter(&coef, support.as_slice(), a.ncols()))
}

fn top(x: &Vector, s: usize) -> SupportSet {
    hard_threshold_support(x.as_slice(), s.min(x.len())).expect("size clamped to length")
}

/// Orthogonal matching pursuit: `k` rounds of adding the column most
/// correlated with the residual, each followed by a least-squares refit.
pub fn omp(a: &Matrix, y: &Vector, cfg: &BaselineConfig) -> Result<Recovery> {
    if let Some(done) = prepare(a, y, cfg)? {
        return Ok(done);
    }
    let stop = cfg.residual_tol * y.norm();
    let mut support = SupportSet::empty();
    let mut z = DVector::zeros(a.ncols());
    let mut r = y.clone();
    let mut iters = 0;
    while support.len() < cfg.k && r.norm() > stop {
        let corr = a.tr_mul(&r);
        let best = (0..a.ncols()).filter(|&j| !support.contains(j)).fold(
            None,
            |best: Option<usize>, j| match best {
                Some(b) if corr[b].abs() >= corr[j].abs() => Some(b),
                _ => Some(j),
            },
        );
        let Some(j) = best else { break };
        support = support.union(&SupportSet::from_iter([j]));
        z = fit(a, y, &support)?;
        r = y - a * &z;
        iters += 1;
    }
    Ok(Recovery { z, iters })
}

/// Compressive sampling matching pursuit: merge the `2k` largest residual
/// correlations with the current support, refit, prune to `k`.
pub fn cosamp(a: &Matrix, y: &Vector, cfg: &BaselineConfig) -> Result<Recovery> {
    if let Some(done) = prepare(a, y, cfg)? {
        return Ok(done);
    }
    let stop = cfg.residual_tol * y.norm();
    let mut z = DVector::zeros(a.ncols());
    let mut support = SupportSet::empty();
    let mut best = (y.norm(), z.clone());
    let mut iters = 0;
    for _ in 0..cfg.max_iters {
        iters += 1;
        let r = y - a * &z;
        let candidates = top(&a.tr_mul(&r), 2 * cfg.k).union(&support);
        let b = fit(a, y, &candidates)?;
        let pruned = top(&b, cfg.k);
        z = scatter(
            &pruned.iter().map(|j| b[j]).collect::<Vec<_>>(),
            pruned.as_slice(),
            a.ncols(),
        );
        let resid = (y - a * &z).norm();
        if resid < best.0 {
            best = (resid, z.clone());
        }
        if resid <= stop || pruned == support {
            break;
        }
        support = pruned;
    }
    Ok(Recovery { z: best.1, iters })
}

/// Subspace pursuit: merge `k` new candidates, refit, keep the `k` largest,
/// refit again; stops once the residual no longer decreases.
pub fn sp(a: &Matrix, y: &Vector, cfg: &BaselineConfig) -> Result<Recovery> {
    if let Some(done) = prepare(a, y, cfg)? {
        return Ok(done);
    }
    let stop = cfg.residual_tol * y.norm();
    let mut support = top(&a.tr_mul(y), cfg.k);
    let mut z = fit(a, y, &support)?;
    let mut resid = (y - a * &z).norm();
    let mut iters = 1;
    while iters < cfg.max_iters && resid > stop {
        let r = y - a * &z;
        let merged = support.union(&top(&a.tr_mul(&r), cfg.k));
        let b = fit(a, y, &merged)?;
        let next_support = top(&b, cfg.k);
        let next = fit(a, y, &next_support)?;
        let next_resid = (y - a * &next).norm();
        iters += 1;
        if next_resid >= resid {
            break;
        }
        support = next_support;
        z = next;
        resid = next_resid;
    }
    Ok(Recovery { z, iters })
}

/// Hard thresholding pursuit: gradient step, keep the `k` largest entries,
/// refit on that support; stops when the support repeats.
pub fn htp(a: &Matrix, y: &Vector, cfg: &BaselineConfig) -> Result<Recovery> {
    if let Some(done) = prepare(a, y, cfg)? {
        return Ok(done);
    }
    let stop = cfg.residual_tol * y.norm();
    let mut z = DVector::zeros(a.ncols());
    let mut support = SupportSet::empty();
    let mut iters = 0;
    for _ in 0..cfg.max_iters {
        iters += 1;
        let r = y - a * &z;
        let next_support = top(&(&z + a.tr_mul(&r) * cfg.htp_step), cfg.k);
        if next_support == support {
            break;
        }
        z = fit(a, y, &next_support)?;
        support = next_support;
        if (y - a * &z).norm() <= stop {
            break;
        }
    }
    Ok(Recovery { z, iters })
}
