//! Sparse coders for the representation error
//! `h_{A,D}(x) = min_{a in A} |Da - x|_2` under both constraint families.
//!
//! * [`greedy_ksparse`]: orthogonal matching pursuit (an upper bound on `h`).
//! * [`exact_ksparse`]: exhaustive subset least squares (the ground truth);
//!   [`ExactCoder`] is the batch form.
//! * [`l1_solve`]: accelerated projected gradient on the l1 ball.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coherence::babel_or_zero;
use crate::dictionary::{validate_dictionary, CoeffVector, Dictionary, Signal, SparsityConstraint};
use crate::error::{Error, Result};
use crate::linalg::{binomial, least_squares, select_columns, RANK_TOL};

/// Maximum number of supports [`exact_ksparse`] will enumerate.
pub const EXACT_SUPPORT_LIMIT: f64 = 1e6;

/// Supports below this count are scanned serially.
const PARALLEL_MIN_SUPPORTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodingMethod {
    Greedy,
    Exact,
    L1Projection,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodingResult {
    pub coeffs: CoeffVector,
    /// `|D coeffs - x|_2`.
    pub error: f64,
    pub method: CodingMethod,
    /// Set when some least-squares fit needed the ridge fallback.
    pub ridge: bool,
    /// Greedy rounds or projected-gradient iterations.
    pub iterations: usize,
    /// Final projected-gradient fixed-point residual (0 for the k-sparse coders).
    pub residual: f64,
    /// Error after each greedy round (empty for the other coders).
    pub trace: Vec<f64>,
}

/// Stopping rule for [`l1_solve_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Options {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for L1Options {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 10_000 }
    }
}

impl L1Options {
    /// Much tighter stopping rule for comparisons that divide by tiny distances.
    pub fn precise() -> Self {
        Self { tol: 1e-13, max_iter: 200_000 }
    }
}

fn check_dims(d: &Dictionary, x: &Signal) -> Result<()> {
    if x.len() != d.n() {
        return Err(Error::DimensionMismatch { expected: d.n(), got: x.len() });
    }
    Ok(())
}

fn residual_norm(d: &Dictionary, a: &DVector<f64>, x: &Signal) -> f64 {
    (d.atoms() * a - x.values()).norm()
}

/// Representation error of `x` under constraint `c`. HardK uses the exact
/// coder when `exact` is set and OMP otherwise.
pub fn repr_error(d: &Dictionary, x: &Signal, c: SparsityConstraint, exact: bool) -> Result<CodingResult> {
    check_dims(d, x)?;
    match c {
        SparsityConstraint::HardK(k) if exact => exact_ksparse(d, x, k),
        SparsityConstraint::HardK(k) => greedy_ksparse(d, x, k),
        SparsityConstraint::L1Ball(lambda) => l1_solve(d, x, lambda),
    }
}

/// Orthogonal matching pursuit with lowest-index tie-breaking.
pub fn greedy_ksparse(d: &Dictionary, x: &Signal, k: usize) -> Result<CodingResult> {
    check_dims(d, x)?;
    if k == 0 || k > d.n().min(d.p()) {
        return Err(Error::InvalidInput(format!(
            "greedy coder needs 1 <= k <= min(n, p) (k={k}, n={}, p={})",
            d.n(),
            d.p()
        )));
    }
    let atoms = d.atoms();
    let scale = x.norm().max(1.0);
    let mut support: Vec<usize> = Vec::with_capacity(k);
    let mut residual = x.values().clone();
    let mut coeffs = DVector::zeros(0);
    let mut ridge = false;
    let mut trace = Vec::with_capacity(k);

    for _ in 0..k {
        let corr = atoms.transpose() * &residual;
        let mut pick = None;
        let mut best = -1.0;
        for (i, c) in corr.iter().enumerate() {
            if support.contains(&i) {
                continue;
            }
            if c.abs() > best {
                best = c.abs();
                pick = Some(i);
            }
        }
        let Some(i) = pick else { break };
        support.push(i);
        let sub = select_columns(atoms, &support);
        let ls = least_squares(&sub, x.values());
        ridge |= ls.ridge;
        residual = x.values() - &sub * &ls.coeffs;
        coeffs = ls.coeffs;
        let err = residual.norm();
        trace.push(err);
        if err <= 1e-15 * scale {
            break;
        }
    }

    let a = CoeffVector::from_support(d.p(), &support, coeffs.as_slice());
    let error = residual_norm(d, a.values(), x);
    Ok(CodingResult {
        coeffs: a,
        error,
        method: CodingMethod::Greedy,
        ridge,
        iterations: trace.len(),
        residual: 0.0,
        trace,
    })
}

/// Best representation over all supports of size `k`. Ties go to the
/// lexicographically smallest support.
pub fn exact_ksparse(d: &Dictionary, x: &Signal, k: usize) -> Result<CodingResult> {
    check_dims(d, x)?;
    let p = d.p();
    if k == 0 || k > p {
        return Err(Error::InvalidInput(format!("exact coder needs 1 <= k <= p (k={k}, p={p})")));
    }
    let count = binomial(p, k);
    if count > EXACT_SUPPORT_LIMIT {
        return Err(Error::TooLarge { what: "C(p,k)", size: count, limit: EXACT_SUPPORT_LIMIT });
    }
    let atoms = d.atoms();
    let fit = |support: &Vec<usize>| {
        let sub = select_columns(atoms, support);
        let ls = least_squares(&sub, x.values());
        let err = (x.values() - &sub * &ls.coeffs).norm();
        (err, ls)
    };
    let supports: Vec<Vec<usize>> = (0..p).combinations(k).collect();
    // (error, index) ordering gives the deterministic tie-break.
    let pick = |a: (f64, usize), b: (f64, usize)| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a };
    let (_, best) = if supports.len() >= PARALLEL_MIN_SUPPORTS {
        supports
            .par_iter()
            .enumerate()
            .map(|(i, s)| (fit(s).0, i))
            .reduce(|| (f64::INFINITY, usize::MAX), pick)
    } else {
        supports
            .iter()
            .enumerate()
            .map(|(i, s)| (fit(s).0, i))
            .fold((f64::INFINITY, usize::MAX), pick)
    };
    let support = &supports[best];
    let (_, ls) = fit(support);
    let a = CoeffVector::from_support(p, support, ls.coeffs.as_slice());
    let error = residual_norm(d, a.values(), x);
    Ok(CodingResult {
        coeffs: a,
        error,
        method: CodingMethod::Exact,
        ridge: ls.ridge,
        iterations: 1,
        residual: 0.0,
        trace: Vec::new(),
    })
}

/// Exhaustive k-sparse coder for many signals against one dictionary: every
/// support is QR-factored once, then each signal costs one projection per
/// support. Agrees with [`exact_ksparse`] except on rounding-level ties.
pub struct ExactCoder<'a> {
    d: &'a Dictionary,
    supports: Vec<Vec<usize>>,
    /// Thin `(Q, R)` per support, `None` where the columns are rank deficient.
    factors: Vec<Option<(DMatrix<f64>, DMatrix<f64>)>>,
}

impl<'a> ExactCoder<'a> {
    pub fn new(d: &'a Dictionary, k: usize) -> Result<Self> {
        let p = d.p();
        if k == 0 || k > p {
            return Err(Error::InvalidInput(format!("exact coder needs 1 <= k <= p (k={k}, p={p})")));
        }
        let count = binomial(p, k);
        if count > EXACT_SUPPORT_LIMIT {
            return Err(Error::TooLarge { what: "C(p,k)", size: count, limit: EXACT_SUPPORT_LIMIT });
        }
        let supports: Vec<Vec<usize>> = (0..p).combinations(k).collect();
        let factors = supports
            .iter()
            .map(|s| {
                if k > d.n() {
                    return None;
                }
                let qr = select_columns(d.atoms(), s).qr();
                let r = qr.r();
                let diag_max = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let diag_min = r.diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
                (diag_max > 0.0 && diag_min > RANK_TOL * diag_max).then(|| (qr.q(), r))
            })
            .collect();
        Ok(Self { d, supports, factors })
    }

    pub fn code(&self, x: &Signal) -> Result<CodingResult> {
        check_dims(self.d, x)?;
        let xv = x.values();
        let mut best = (f64::INFINITY, usize::MAX);
        let mut proj = vec![0.0; xv.len()];
        for (i, (s, f)) in self.supports.iter().zip(&self.factors).enumerate() {
            let err = match f {
                Some((q, _)) => {
                    proj.copy_from_slice(xv.as_slice());
                    for col in q.column_iter() {
                        let c = col.dot(xv);
                        for (r, v) in proj.iter_mut().zip(col.iter()) {
                            *r -= c * v;
                        }
                    }
                    proj.iter().map(|r| r * r).sum::<f64>().sqrt()
                }
                None => {
                    let sub = select_columns(self.d.atoms(), s);
                    (xv - &sub * least_squares(&sub, xv).coeffs).norm()
                }
            };
            if err < best.0 {
                best = (err, i);
            }
        }
        let i = best.1;
        let (coeffs, ridge) = match &self.factors[i] {
            Some((q, r)) => match r.solve_upper_triangular(&q.tr_mul(xv)) {
                Some(c) => (c, false),
                None => {
                    let ls = least_squares(&select_columns(self.d.atoms(), &self.supports[i]), xv);
                    (ls.coeffs, ls.ridge)
                }
            },
            None => {
                let ls = least_squares(&select_columns(self.d.atoms(), &self.supports[i]), xv);
                (ls.coeffs, ls.ridge)
            }
        };
        let a = CoeffVector::from_support(self.d.p(), &self.supports[i], coeffs.as_slice());
        let error = residual_norm(self.d, a.values(), x);
        Ok(CodingResult {
            coeffs: a,
            error,
            method: CodingMethod::Exact,
            ridge,
            iterations: 1,
            residual: 0.0,
            trace: Vec::new(),
        })
    }
}

/// Euclidean projection onto `{a : |a|_1 <= radius}` by sorting the
/// magnitudes and soft-thresholding at the computed level.
pub fn project_l1_ball(v: &DVector<f64>, radius: f64) -> DVector<f64> {
    if radius <= 0.0 {
        return DVector::zeros(v.len());
    }
    if v.iter().map(|x| x.abs()).sum::<f64>() <= radius {
        return v.clone();
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in mags.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - radius) / (j + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        } else {
            break;
        }
    }
    v.map(|x| x.signum() * (x.abs() - theta).max(0.0))
}

/// l1-constrained coder with the default stopping rule.
pub fn l1_solve(d: &Dictionary, x: &Signal, lambda: f64) -> Result<CodingResult> {
    l1_solve_with(d, x, lambda, L1Options::default())
}

/// Minimizes `|Da - x|` over `|a|_1 <= lambda` by FISTA with exact l1-ball
/// projection and gradient-based adaptive restart. Stops once the
/// projected-gradient fixed-point residual drops below `opts.tol`.
pub fn l1_solve_with(d: &Dictionary, x: &Signal, lambda: f64, opts: L1Options) -> Result<CodingResult> {
    check_dims(d, x)?;
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidInput(format!("lambda must be >= 0, got {lambda}")));
    }
    let p = d.p();
    let result = |a: DVector<f64>, iterations: usize, residual: f64| {
        let error = residual_norm(d, &a, x);
        CodingResult {
            coeffs: CoeffVector::new(a),
            error,
            method: CodingMethod::L1Projection,
            ridge: false,
            iterations,
            residual,
            trace: Vec::new(),
        }
    };
    if lambda == 0.0 {
        return Ok(result(DVector::zeros(p), 0, 0.0));
    }

    let gram = d.gram();
    let b = d.atoms().transpose() * x.values();
    let lipschitz = gram.clone().symmetric_eigenvalues().max();
    if !(lipschitz > 0.0) {
        return Ok(result(DVector::zeros(p), 0, 0.0));
    }
    let step = 1.0 / lipschitz;
    let grad = |a: &DVector<f64>| &gram * a - &b;
    let fixed_point_residual = |a: &DVector<f64>| (a - project_l1_ball(&(a - grad(a) * step), lambda)).norm();

    let mut a = DVector::<f64>::zeros(p);
    let mut y = a.clone();
    let mut t = 1.0f64;
    let mut residual = fixed_point_residual(&a);
    let mut iterations = 0;
    while residual >= opts.tol && iterations < opts.max_iter {
        iterations += 1;
        let a_next = project_l1_ball(&(&y - grad(&y) * step), lambda);
        // restart momentum when it points uphill
        if (&y - &a_next).dot(&(&a_next - &a)) > 0.0 {
            t = 1.0;
            y = a_next.clone();
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            y = &a_next + (&a_next - &a) * ((t - 1.0) / t_next);
            t = t_next;
        }
        a = a_next;
        residual = fixed_point_residual(&a);
    }
    Ok(result(a, iterations, residual))
}

/// Upper bound `gamma k / (1 - mu_{k-1}(D))` on the l1 norm of an optimal
/// k-sparse coefficient vector, valid when `mu_{k-1}(D) < 1` and all column
/// norms lie in `[1, gamma]`.
pub fn coeff_l1_bound(d: &Dictionary, k: usize) -> Result<f64> {
    if k == 0 || k > d.p() {
        return Err(Error::InvalidInput(format!("need 1 <= k <= p (k={k}, p={})", d.p())));
    }
    if let Some(v) = validate_dictionary(d, false).first() {
        return Err(Error::InvalidInput(format!("column norms must lie in [1, gamma]: {v}")));
    }
    let mu = babel_or_zero(d, k - 1)?;
    if mu >= 1.0 {
        return Err(Error::Inapplicable(format!("mu_{}(D) = {mu} >= 1", k - 1)));
    }
    Ok(d.gamma() * k as f64 / (1.0 - mu))
}

/// Column-major `n x m` matrix of signals, handy for batch coding.
pub fn signals_matrix(signals: &[Signal]) -> DMatrix<f64> {
    let n = signals.first().map_or(0, Signal::len);
    DMatrix::from_fn(n, signals.len(), |i, j| signals[j].values()[i])
}
