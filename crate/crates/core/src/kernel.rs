//! Sparse coding in a reproducing-kernel feature space.
//!
//! Atoms are pre-images `d_i` in representation space and every quantity is
//! computed from kernel evaluations only:
//! `||Phi(D) a - phi(x)||^2 = a' G a - 2 a' kappa(x, D) + kappa(x, x)`.

use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundInputs, BoundReport};
use crate::coders::{CodingMethod, CodingResult};
use crate::coherence::{babel_from_gram, BabelValue};
use crate::dictionary::CoeffVector;
use crate::error::{Error, Result};
use crate::linalg::gram_solve;

/// Floor on the smallest Gram eigenvalue and on quadratic forms.
pub const PSD_TOL: f64 = 1e-8;

/// Symmetry tolerance for sampled kernel pairs.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Uniform Holder condition `|k(x, z) - k(y, z)| <= l ||x - y||^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Holder {
    pub l: f64,
    pub alpha: f64,
}

pub trait KernelFn: Send + Sync {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64;

    /// Holder metadata of the kernel in each argument, when known.
    fn smoothness(&self) -> Option<Holder> {
        None
    }

    /// `sup sqrt(kappa(x, x))` over the intended domain, when known.
    fn feature_norm_cap(&self) -> Option<f64> {
        None
    }
}

/// The shipped kernels. The smoothness and norm caps of `Linear` and
/// `Polynomial` hold on the closed unit ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Kernel {
    Linear,
    /// `exp(-||x - y||^2 / (2 sigma^2))`.
    Gaussian { sigma: f64 },
    /// `(<x, y> + 1)^degree`.
    Polynomial { degree: u32 },
}

impl Kernel {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidInput(format!("bandwidth must be > 0, got {sigma}")));
        }
        Ok(Kernel::Gaussian { sigma })
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

impl KernelFn for Kernel {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            Kernel::Linear => dot(x, y),
            Kernel::Gaussian { sigma } => {
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                (-d2 / (2.0 * sigma * sigma)).exp()
            }
            Kernel::Polynomial { degree } => (dot(x, y) + 1.0).powi(degree as i32),
        }
    }

    fn smoothness(&self) -> Option<Holder> {
        Some(match *self {
            Kernel::Linear => Holder { l: 1.0, alpha: 1.0 },
            // largest slope of r -> exp(-r^2 / 2 sigma^2), attained at r = sigma
            Kernel::Gaussian { sigma } => Holder { l: (-0.5f64).exp() / sigma, alpha: 1.0 },
            Kernel::Polynomial { degree } => {
                let d = degree as f64;
                Holder { l: d * 2f64.powf(d - 1.0), alpha: 1.0 }
            }
        })
    }

    fn feature_norm_cap(&self) -> Option<f64> {
        Some(match *self {
            Kernel::Linear => 1.0,
            Kernel::Gaussian { .. } => 1.0,
            Kernel::Polynomial { degree } => 2f64.powf(degree as f64 / 2.0),
        })
    }
}

impl FromStr for Kernel {
    type Err = Error;

    /// `linear`, `gaussian:SIGMA` or `poly:DEG`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        match (name, arg) {
            ("linear", None) => Ok(Kernel::Linear),
            ("gaussian", Some(a)) => {
                let sigma = a.parse::<f64>().map_err(|e| Error::Parse(format!("bandwidth `{a}`: {e}")))?;
                Kernel::gaussian(sigma)
            }
            ("poly", Some(a)) => {
                let degree = a.parse::<u32>().map_err(|e| Error::Parse(format!("degree `{a}`: {e}")))?;
                if degree == 0 {
                    return Err(Error::InvalidInput("polynomial degree must be >= 1".into()));
                }
                Ok(Kernel::Polynomial { degree })
            }
            _ => Err(Error::Parse(format!("unknown kernel `{s}` (expected linear, gaussian:SIGMA or poly:DEG)"))),
        }
    }
}

/// A kernel with its Holder metadata replaced, e.g. by a measured constant.
#[derive(Debug, Clone, Copy)]
pub struct WithHolder<K> {
    pub inner: K,
    pub holder: Holder,
}

impl<K: KernelFn> KernelFn for WithHolder<K> {
    fn eval(&self, x: &[f64], y: &[f64]) -> f64 {
        self.inner.eval(x, y)
    }

    fn smoothness(&self) -> Option<Holder> {
        Some(self.holder)
    }

    fn feature_norm_cap(&self) -> Option<f64> {
        self.inner.feature_norm_cap()
    }
}

/// Pre-image atoms together with their cached Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelDictionary {
    points: Vec<DVector<f64>>,
    gram: DMatrix<f64>,
}

impl KernelDictionary {
    /// Builds the Gram matrix (upper triangle in parallel) and checks symmetry
    /// and the PSD floor.
    pub fn new<K: KernelFn + ?Sized>(points: Vec<DVector<f64>>, kf: &K) -> Result<Self> {
        let p = points.len();
        if p == 0 {
            return Err(Error::InvalidInput("kernel dictionary needs at least one point".into()));
        }
        let dim = points[0].len();
        if let Some(bad) = points.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.len() });
        }
        let rows: Vec<Vec<f64>> = (0..p)
            .into_par_iter()
            .map(|i| (i..p).map(|j| kf.eval(points[i].as_slice(), points[j].as_slice())).collect())
            .collect();
        let mut gram = DMatrix::zeros(p, p);
        for (i, row) in rows.iter().enumerate() {
            for (off, &v) in row.iter().enumerate() {
                gram[(i, i + off)] = v;
                gram[(i + off, i)] = v;
            }
        }
        if gram.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("kernel produced non-finite values".into()));
        }
        // sampled symmetry
        for i in 0..p.min(8) {
            for j in 0..p.min(8) {
                let a = kf.eval(points[i].as_slice(), points[j].as_slice());
                let b = kf.eval(points[j].as_slice(), points[i].as_slice());
                if (a - b).abs() > SYMMETRY_TOL * a.abs().max(1.0) {
                    return Err(Error::InvalidInput(format!("kernel is not symmetric: {a} vs {b}")));
                }
            }
        }
        let min_eig = SymmetricEigen::new(gram.clone()).eigenvalues.min();
        if min_eig < -PSD_TOL {
            return Err(Error::NumericalPsd(min_eig));
        }
        Ok(Self { points, gram })
    }

    pub fn p(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// Feature norms must lie in `[1, gamma]` before Babel-based bounds apply.
    pub fn check_feature_norms(&self, gamma: f64) -> Result<()> {
        for (i, &g) in self.gram.diagonal().iter().enumerate() {
            if g < 1.0 - 1e-9 || g > gamma * gamma + 1e-9 {
                return Err(Error::Inapplicable(format!(
                    "feature norm^2 of atom {i} is {g}, outside [1, {}]",
                    gamma * gamma
                )));
            }
        }
        Ok(())
    }

    fn cross<K: KernelFn + ?Sized>(&self, x: &[f64], kf: &K) -> DVector<f64> {
        DVector::from_iterator(self.p(), self.points.iter().map(|d| kf.eval(x, d.as_slice())))
    }
}

fn quad_to_error(quad: f64) -> Result<f64> {
    if quad < -PSD_TOL {
        return Err(Error::NumericalPsd(quad));
    }
    Ok(quad.max(0.0).sqrt())
}

/// `||Phi(D) a - phi(x)||_H` from the cached Gram matrix and the kernel
/// values on the support of `a` only.
pub fn kernel_repr_error<K: KernelFn + ?Sized>(
    x: &[f64],
    a: &CoeffVector,
    d: &KernelDictionary,
    kf: &K,
) -> Result<f64> {
    if a.len() != d.p() {
        return Err(Error::DimensionMismatch { expected: d.p(), got: a.len() });
    }
    let dim = d.points[0].len();
    if x.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: x.len() });
    }
    let support = a.support();
    let av = a.values();
    let mut quad = kf.eval(x, x);
    for &i in &support {
        quad -= 2.0 * av[i] * kf.eval(x, d.points[i].as_slice());
        for &j in &support {
            quad += av[i] * av[j] * d.gram[(i, j)];
        }
    }
    quad_to_error(quad)
}

/// Greedy pursuit in feature space: correlations `kappa(x, d_j) - sum a_i G_ij`,
/// refits `G_SS a = kappa(x, D_S)`, lowest index on ties.
pub fn kernel_greedy_ksparse<K: KernelFn + ?Sized>(
    x: &[f64],
    d: &KernelDictionary,
    k: usize,
    kf: &K,
) -> Result<CodingResult> {
    let p = d.p();
    if k == 0 || k > p {
        return Err(Error::InvalidInput(format!("kernel greedy coder needs 1 <= k <= p (k={k}, p={p})")));
    }
    let dim = d.points[0].len();
    if x.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: x.len() });
    }
    let kxx = kf.eval(x, x);
    let h = d.cross(x, kf);
    let mut support: Vec<usize> = Vec::with_capacity(k);
    let mut coeffs = DVector::zeros(0);
    let mut ridge = false;
    let mut trace = Vec::with_capacity(k);
    let mut quad = kxx;

    for _ in 0..k {
        let mut pick = None;
        let mut best = -1.0;
        for j in 0..p {
            if support.contains(&j) {
                continue;
            }
            let c = h[j] - support.iter().zip(coeffs.iter()).map(|(&i, a)| a * d.gram[(i, j)]).sum::<f64>();
            if c.abs() > best {
                best = c.abs();
                pick = Some(j);
            }
        }
        let Some(j) = pick else { break };
        support.push(j);
        let g_ss = DMatrix::from_fn(support.len(), support.len(), |r, c| d.gram[(support[r], support[c])]);
        let h_s = DVector::from_iterator(support.len(), support.iter().map(|&i| h[i]));
        let ls = gram_solve(&g_ss, &h_s);
        ridge |= ls.ridge;
        coeffs = ls.coeffs;
        quad = kxx - 2.0 * coeffs.dot(&h_s) + (&g_ss * &coeffs).dot(&coeffs);
        let err = quad_to_error(quad)?;
        trace.push(err);
        // the quadratic form only resolves errors down to about sqrt(machine eps)
        if quad <= 1e-15 * kxx.abs().max(1.0) {
            break;
        }
    }

    let a = CoeffVector::from_support(p, &support, coeffs.as_slice());
    Ok(CodingResult {
        coeffs: a,
        error: quad_to_error(quad)?,
        method: CodingMethod::Greedy,
        ridge,
        iterations: trace.len(),
        residual: 0.0,
        trace,
    })
}

/// Babel function of the feature-space atoms, read off the raw Gram matrix.
pub fn feature_babel(d: &KernelDictionary, k: usize) -> Result<BabelValue> {
    babel_from_gram(&d.gram, k)
}

/// Largest `||phi(x) - phi(y)||_H - sqrt(2L) ||x - y||^(alpha/2)` over the
/// pairs, using the kernel's Holder metadata `(L, alpha)`.
pub fn holder_feature_check<K: KernelFn + ?Sized>(kf: &K, pairs: &[(DVector<f64>, DVector<f64>)]) -> Result<f64> {
    let Holder { l, alpha } = kf.smoothness().ok_or(Error::MissingField("smoothness"))?;
    let scale = (2.0 * l).sqrt();
    let mut worst = f64::NEG_INFINITY;
    for (x, y) in pairs {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), got: y.len() });
        }
        let (xs, ys) = (x.as_slice(), y.as_slice());
        let feat2 = kf.eval(xs, xs) - 2.0 * kf.eval(xs, ys) + kf.eval(ys, ys);
        let feature = feat2.max(0.0).sqrt();
        let dist = (x - y).norm();
        worst = worst.max(feature - scale * dist.powf(alpha / 2.0));
    }
    Ok(worst)
}

/// Largest sampled difference quotient `|kappa(x, z) - kappa(y, z)| / ||x - y||^alpha`
/// over ordered pairs `(x, y)` of `points` and anchors `z` in `points`.
/// A lower estimate of the kernel's Holder constant.
pub fn estimate_holder_constant<K: KernelFn + ?Sized>(kf: &K, points: &[DVector<f64>], alpha: f64) -> f64 {
    (0..points.len())
        .into_par_iter()
        .map(|i| {
            let mut best = 0.0f64;
            for j in 0..points.len() {
                let dist = (&points[i] - &points[j]).norm();
                if dist < 1e-12 {
                    continue;
                }
                let denom = dist.powf(alpha);
                for z in points {
                    let q = (kf.eval(points[i].as_slice(), z.as_slice()) - kf.eval(points[j].as_slice(), z.as_slice()))
                        .abs()
                        / denom;
                    best = best.max(q);
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

/// Constraint family for the feature-space cover bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "family")]
pub enum CoverFamily {
    L1 { lambda: f64 },
    Ksparse { k: usize, delta: f64 },
}

/// Log-cardinality of an `eps`-cover of the feature-space error class when
/// representation space has `(C/eps)^n` covers and `phi` is `(L, alpha)`-Holder:
/// `np ln(C (lambda gamma L / eps)^(1/alpha))`, with `lambda` replaced by
/// `k gamma / (1 - delta)` for the k-sparse family. Clamped at 0.
pub fn kernel_cover_log(
    family: CoverFamily,
    n: usize,
    p: usize,
    c: f64,
    gamma: f64,
    holder: Holder,
    eps: f64,
) -> Result<f64> {
    for (name, v) in [("C", c), ("gamma", gamma), ("L", holder.l), ("alpha", holder.alpha), ("eps", eps)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidInput(format!("{name} must be > 0, got {v}")));
        }
    }
    let scale = match family {
        CoverFamily::L1 { lambda } => {
            if !(lambda > 0.0) {
                return Err(Error::InvalidInput(format!("lambda must be > 0, got {lambda}")));
            }
            lambda * gamma * holder.l / eps
        }
        CoverFamily::Ksparse { k, delta } => {
            if k == 0 {
                return Err(Error::InvalidInput("k must be >= 1".into()));
            }
            if !(delta < 1.0) {
                return Err(Error::Inapplicable(format!("delta = {delta} must be < 1")));
            }
            k as f64 * gamma * gamma * holder.l / (eps * (1.0 - delta))
        }
    };
    Ok(((n * p) as f64 * (c.ln() + scale.ln() / holder.alpha)).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelVariant {
    /// Squared-error bound for feature norms at most 1.
    MaurerK,
    /// Slow rate for k-sparse coding with a Holder feature map.
    Slow,
}

/// Feature-space k-sparse generalization bounds. `Slow` reads `C` (cover
/// constant of representation space), `L`, `alpha` (Holder order of `phi`)
/// and `gamma` from `inputs`:
/// `gamma (sqrt(np ln(sqrt(m) C^alpha k gamma^2 L / (1 - delta)) / (2 alpha m)) + sqrt(x / 2m)) + sqrt(4/m)`.
pub fn kernel_gen_bound(inputs: &BoundInputs, variant: KernelVariant) -> Result<BoundReport> {
    let radius = inputs.ksparse_radius()?;
    match variant {
        KernelVariant::MaurerK => bounds::ksparse_generalization_bound(inputs, bounds::Variant::Maurer),
        KernelVariant::Slow => {
            let c = inputs.cover_c.ok_or(Error::MissingField("C"))?;
            let l = inputs.holder_l.ok_or(Error::MissingField("L"))?;
            let alpha = inputs.alpha.ok_or(Error::MissingField("alpha"))?;
            let gamma = inputs.gamma.ok_or(Error::MissingField("gamma"))?;
            for (name, v) in [("C", c), ("L", l), ("alpha", alpha), ("gamma", gamma)] {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(Error::InvalidInput(format!("{name} must be > 0, got {v}")));
                }
            }
            let cover_c = c.powf(alpha) * radius * gamma * gamma * l;
            let cover_d = (inputs.n * inputs.p) as f64 / alpha;
            bounds::slow_rate_generic(gamma, cover_c, cover_d, inputs.m, inputs.x)
        }
    }
}
