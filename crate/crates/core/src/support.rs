//! Index sets over the columns of a measurement matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing set of column indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    /// Builds a support from arbitrary indices, sorting and removing duplicates.
    /// Every index must be below `n`.
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
            return Err(Error::InvalidArgument(format!(
                "support index {bad} out of range for dimension {n}"
            )));
        }
        indices.sort_unstable();
        indices.dedup();
        Ok(Self(indices))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn full(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// Indices `j` with `|x_j| >= threshold`.
    pub fn above_threshold(x: &[f64], threshold: f64) -> Self {
        Self(
            x.iter()
                .enumerate()
                .filter(|(_, v)| v.abs() >= threshold)
                .map(|(j, _)| j)
                .collect(),
        )
    }

    /// Indices of the nonzero entries.
    pub fn nonzeros(x: &[f64]) -> Self {
        Self(
            x.iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(j, _)| j)
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.0.binary_search(&j).is_ok()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    /// Largest index plus one, or zero for the empty set.
    pub fn bound(&self) -> usize {
        self.0.last().map_or(0, |&j| j + 1)
    }

    /// Membership mask of length `n`.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &j in &self.0 {
            mask[j] = true;
        }
        mask
    }

    pub fn complement(&self, n: usize) -> Self {
        let mask = self.mask(n);
        Self((0..n).filter(|&j| !mask[j]).collect())
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&x), Some(&&y)) => {
                    if x <= y {
                        out.push(x);
                        a.next();
                        if x == y {
                            b.next();
                        }
                    } else {
                        out.push(y);
                        b.next();
                    }
                }
                (Some(&&x), None) => {
                    out.push(x);
                    a.next();
                }
                (None, Some(&&y)) => {
                    out.push(y);
                    b.next();
                }
                (None, None) => break,
            }
        }
        Self(out)
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.0.iter().all(|&j| other.contains(j))
    }
}

impl FromIterator<usize> for SupportSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut v: Vec<usize> = iter.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }
}

/// Support of the `s` largest-magnitude entries of `z`.
///
/// Ties in magnitude go to the lower index. `s > z.len()` is rejected.
pub fn hard_threshold_support(z: &[f64], s: usize) -> Result<SupportSet> {
    if s > z.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot keep {s} entries of a length-{} vector",
            z.len()
        )));
    }
    let mut order: Vec<usize> = (0..z.len()).collect();
    // stable sort keeps lower indices first among equal magnitudes
    order.sort_by(|&i, &j| z[j].abs().total_cmp(&z[i].abs()));
    order.truncate(s);
    Ok(order.into_iter().collect())
}
