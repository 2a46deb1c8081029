//! Dictionary geometry: the Babel function, coherence and the frame condition.
//!
//! `mu_k(D)` is the largest total absolute inner product between one atom and
//! `k` other atoms. For a fixed excluded atom the worst subset is simply its
//! `k` largest correlations, so the fast path sorts one Gram row per atom.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dictionary::{validate_dictionary, Dictionary};
use crate::error::{Error, Result};
use crate::linalg::binomial;

/// Enumeration budget for [`babel_bruteforce`]: `C(p, k) * p`.
pub const BRUTEFORCE_LIMIT: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BabelValue {
    pub value: f64,
    pub k: usize,
}

fn check_order(k: usize, p: usize) -> Result<()> {
    if k < 1 || k >= p {
        return Err(Error::InvalidOrder { k, p });
    }
    Ok(())
}

/// Babel function of order `k` from a (square, symmetric) Gram matrix.
/// Only off-diagonal entries are used.
pub fn babel_from_gram(gram: &DMatrix<f64>, k: usize) -> Result<BabelValue> {
    let p = gram.nrows();
    if gram.ncols() != p {
        return Err(Error::DimensionMismatch { expected: p, got: gram.ncols() });
    }
    check_order(k, p)?;
    let mut row = Vec::with_capacity(p - 1);
    let mut best = 0.0f64;
    for i in 0..p {
        row.clear();
        row.extend((0..p).filter(|&j| j != i).map(|j| gram[(i, j)].abs()));
        row.sort_unstable_by(|a, b| b.total_cmp(a));
        let s: f64 = row[..k].iter().sum();
        best = best.max(s);
    }
    Ok(BabelValue { value: best, k })
}

/// `mu_k(D)` for `1 <= k <= p - 1`.
pub fn babel(d: &Dictionary, k: usize) -> Result<BabelValue> {
    check_order(k, d.p())?;
    babel_from_gram(&d.gram(), k)
}

/// `mu_k(D)` extended with `mu_0 = 0` (empty sum), the convention used by
/// the k-sparse bounds when `k = 1`.
pub fn babel_or_zero(d: &Dictionary, k: usize) -> Result<f64> {
    if k == 0 {
        Ok(0.0)
    } else {
        babel(d, k).map(|b| b.value)
    }
}

/// Literal evaluation of the definition: every subset `Lambda` of size `k`
/// and every atom outside it. Test oracle only.
pub fn babel_bruteforce(d: &Dictionary, k: usize) -> Result<BabelValue> {
    babel_bruteforce_gram(&d.gram(), k)
}

pub fn babel_bruteforce_gram(gram: &DMatrix<f64>, k: usize) -> Result<BabelValue> {
    let p = gram.nrows();
    check_order(k, p)?;
    let size = binomial(p, k) * p as f64;
    if size > BRUTEFORCE_LIMIT {
        return Err(Error::TooLarge { what: "C(p,k)*p", size, limit: BRUTEFORCE_LIMIT });
    }
    let mut best = 0.0f64;
    for subset in (0..p).combinations(k) {
        for i in (0..p).filter(|i| !subset.contains(i)) {
            let s: f64 = subset.iter().map(|&l| gram[(l, i)].abs()).sum();
            best = best.max(s);
        }
    }
    Ok(BabelValue { value: best, k })
}

/// Largest absolute inner product between two distinct atoms (`mu_1`).
pub fn coherence(d: &Dictionary) -> Result<f64> {
    if d.p() < 2 {
        return Err(Error::InvalidInput("coherence needs at least two atoms".into()));
    }
    babel(d, 1).map(|b| b.value)
}

/// Sufficient frame condition: for unit-norm atoms with
/// `sum_i |<v, d_i>| <= B` over the unit sphere, `B < 1 + 1/(p-1)` forces
/// `mu_{k-1}(D) < 1`. Returns whether the supplied `B` meets it.
pub fn frame_check(d: &Dictionary, frame_upper: f64) -> Result<bool> {
    if !validate_dictionary(d, true).is_empty() || d.gamma() != 1.0 {
        return Err(Error::InvalidInput("frame_check requires a normalized dictionary".into()));
    }
    if d.p() < 2 {
        return Ok(true);
    }
    Ok(frame_upper < 1.0 + 1.0 / (d.p() - 1) as f64)
}

/// Empirical frame upper bound: the largest `sum_i |<v, d_i>|` over the given
/// unit probes and over the atoms themselves. A lower estimate of the true `B`.
pub fn sampled_frame_upper(d: &Dictionary, probes: &[DVector<f64>]) -> f64 {
    let atoms = d.atoms();
    let score = |v: &DVector<f64>| -> f64 { (atoms.transpose() * v).iter().map(|c| c.abs()).sum() };
    let from_atoms = (0..d.p()).map(|j| score(&d.atom(j))).fold(0.0, f64::max);
    probes
        .iter()
        .map(|v| score(&(v / v.norm())))
        .fold(from_atoms, f64::max)
}
