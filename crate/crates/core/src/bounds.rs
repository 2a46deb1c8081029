//! Closed-form covering-number and generalization-bound calculators.
//!
//! Every bound has the shape `E(D) <= multiplier * E_m(D) + additive` and is
//! returned as a [`BoundReport`] whose `parts` add up to `additive`.
//! All logarithms are natural.
//!
//! * slow rates: `O(sqrt(d log m / m))`, multiplier 1;
//! * fast rates: `O(d log m / m)`, multiplier `K / (K - 1)`;
//! * the dimension-free variant bounds the squared error instead.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;

/// Additive terms at or above this value are flagged vacuous (losses live in `[0, 1]`).
pub const VACUOUS_THRESHOLD: f64 = 1.0;

/// Localization constant of the fast-rate bound, exposed verbatim.
pub const FAST_RATE_CONSTANT: f64 = 480.0;

/// Whether a bound controls `h` or `h^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossScale {
    Plain,
    Squared,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Maurer,
    Slow,
    Fast,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maurer" => Ok(Variant::Maurer),
            "slow" => Ok(Variant::Slow),
            "fast" => Ok(Variant::Fast),
            other => Err(Error::Parse(format!("unknown bound variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    L1,
    Ksparse,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(Family::L1),
            "ksparse" => Ok(Family::Ksparse),
            other => Err(Error::Parse(format!("unknown bound family `{other}`"))),
        }
    }
}

/// Which term of the fast-rate maximum is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FastBranch {
    Scale,
    Complexity,
    Floor,
}

/// Parameter bundle shared by all calculators. Optional fields are only
/// required by the variants that use them.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundInputs {
    pub n: usize,
    pub p: usize,
    /// Sample count.
    pub m: f64,
    /// Confidence exponent: the bound holds with probability `>= 1 - e^{-x}`.
    pub x: f64,
    pub k: Option<usize>,
    pub lambda: Option<f64>,
    /// Babel bound `mu_{k-1}(D) <= delta < 1`.
    pub delta: Option<f64>,
    /// Cap on column (feature) norms.
    pub gamma: Option<f64>,
    /// Fast-rate trade-off parameter `K > 1`.
    #[serde(rename = "K")]
    pub big_k: Option<f64>,
    pub alpha: Option<f64>,
    /// Range cap of the function class, `[0, B]`.
    #[serde(rename = "B")]
    pub range: Option<f64>,
    /// Cover-law constants: covers of size `(C / eps)^d`.
    #[serde(rename = "C")]
    pub cover_c: Option<f64>,
    #[serde(rename = "d")]
    pub cover_d: Option<f64>,
    /// Holder constant of the feature map.
    #[serde(rename = "L")]
    pub holder_l: Option<f64>,
}

impl BoundInputs {
    pub fn new(n: usize, p: usize, m: f64, x: f64) -> Self {
        Self { n, p, m, x, ..Default::default() }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn with_fast(mut self, big_k: f64, alpha: f64) -> Self {
        self.big_k = Some(big_k);
        self.alpha = Some(alpha);
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn with_cover(mut self, c: f64, holder_l: f64) -> Self {
        self.cover_c = Some(c);
        self.holder_l = Some(holder_l);
        self
    }

    fn check_common(&self) -> Result<()> {
        if !(self.m >= 1.0) || !self.m.is_finite() {
            return Err(Error::InvalidInput(format!("m must be >= 1, got {}", self.m)));
        }
        if !(self.x > 0.0) || !self.x.is_finite() {
            return Err(Error::InvalidInput(format!("x must be > 0, got {}", self.x)));
        }
        if self.n == 0 || self.p == 0 {
            return Err(Error::InvalidInput("n and p must be >= 1".into()));
        }
        Ok(())
    }

    /// Coefficient radius implied by the k-sparse hypotheses: `k / (1 - delta)`.
    pub fn ksparse_radius(&self) -> Result<f64> {
        let k = self.k.ok_or(Error::MissingField("k"))?;
        let delta = self.delta.unwrap_or(0.0);
        ksparse_radius(k, delta)
    }
}

fn ksparse_radius(k: usize, delta: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be >= 1".into()));
    }
    if !(delta < 1.0) {
        return Err(Error::Inapplicable(format!("delta = {delta} must be < 1")));
    }
    if delta < 0.0 {
        return Err(Error::InvalidInput(format!("delta must be >= 0, got {delta}")));
    }
    Ok(k as f64 / (1.0 - delta))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundPart {
    pub label: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    /// Coefficient of the empirical term (`1 + eta`).
    pub multiplier: f64,
    /// The `epsilon` term.
    pub additive: f64,
    pub parts: Vec<BoundPart>,
    pub vacuous: bool,
    pub loss_scale: LossScale,
    /// Active term of the fast-rate maximum, when applicable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branch: Option<FastBranch>,
}

impl BoundReport {
    fn from_parts(multiplier: f64, parts: Vec<(&str, f64)>, loss_scale: LossScale) -> Self {
        let additive = parts.iter().map(|(_, v)| v).sum::<f64>();
        Self {
            multiplier,
            additive,
            parts: parts
                .into_iter()
                .map(|(label, value)| BoundPart { label: label.to_string(), value })
                .collect(),
            vacuous: additive >= VACUOUS_THRESHOLD,
            loss_scale,
            branch: None,
        }
    }

    /// Right-hand side `multiplier * empirical + additive`.
    pub fn evaluate(&self, empirical: f64) -> f64 {
        self.multiplier * empirical + self.additive
    }

    pub fn part(&self, label: &str) -> Option<f64> {
        self.parts.iter().find(|p| p.label == label).map(|p| p.value)
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidInput(format!("{name} must be > 0, got {v}")));
    }
    Ok(())
}

/// Log-cardinality `np ln(4 lambda / eps)` of an `eps`-cover of the
/// l1-constrained error class, clamped at 0.
pub fn log_cover_l1(n: usize, p: usize, lambda: f64, eps: f64) -> Result<f64> {
    positive("lambda", lambda)?;
    positive("eps", eps)?;
    Ok(((n * p) as f64 * (4.0 * lambda / eps).ln()).max(0.0))
}

/// Log-cardinality `np ln(4k / (eps (1 - delta)))` of an `eps`-cover of the
/// k-sparse error class restricted to `mu_{k-1} < delta`, clamped at 0.
pub fn log_cover_ksparse(n: usize, p: usize, k: usize, delta: f64, eps: f64) -> Result<f64> {
    positive("eps", eps)?;
    let radius = ksparse_radius(k, delta)?;
    Ok(((n * p) as f64 * (4.0 * radius / eps).ln()).max(0.0))
}

/// Slow-rate bound for a `[0, B]` class with sup-norm covers `(C / eps)^d`:
/// `B (sqrt(d ln(C sqrt m) / 2m) + sqrt(x / 2m)) + sqrt(4 / m)`.
pub fn slow_rate_generic(range: f64, c: f64, d: f64, m: f64, x: f64) -> Result<BoundReport> {
    positive("B", range)?;
    positive("C", c)?;
    positive("d", d)?;
    positive("x", x)?;
    if !(m >= 1.0) {
        return Err(Error::InvalidInput(format!("m must be >= 1, got {m}")));
    }
    let log_c_sqrt_m = (c * m.sqrt()).ln();
    // (C sqrt m)^d > e / B^2, in log form
    if !(d * log_c_sqrt_m > 1.0 - 2.0 * range.ln()) {
        return Err(Error::Inapplicable(format!(
            "cover bound (C sqrt m)^d = exp({}) does not exceed e/B^2",
            d * log_c_sqrt_m
        )));
    }
    let cover = range * (d * log_c_sqrt_m / (2.0 * m)).sqrt();
    let confidence = range * (x / (2.0 * m)).sqrt();
    let discretization = (4.0 / m).sqrt();
    Ok(BoundReport::from_parts(
        1.0,
        vec![("cover-term", cover), ("confidence-term", confidence), ("discretization-term", discretization)],
        LossScale::Plain,
    ))
}

/// Fast-rate bound for a `[0, 1]` class with covers `(C / eps)^d`, `C > 2`:
/// multiplier `K/(K-1)` and additive
/// `6K max{alpha C^2 / 2m, 480^2 (d+1) ln(m/alpha) / m, (20 + 22 ln m) / m} + (11x + 5K)/m`.
pub fn fast_rate_generic(c: f64, d: f64, m: f64, x: f64, big_k: f64, alpha: f64) -> Result<BoundReport> {
    if !(c > 2.0) {
        return Err(Error::Inapplicable(format!("fast-rate bound needs C > 2, got {c}")));
    }
    if !(big_k > 1.0) || !big_k.is_finite() {
        return Err(Error::InvalidInput(format!("K must be > 1, got {big_k}")));
    }
    positive("alpha", alpha)?;
    positive("x", x)?;
    if !(d >= 0.0) {
        return Err(Error::InvalidInput(format!("d must be >= 0, got {d}")));
    }
    if !(m >= 1.0) {
        return Err(Error::InvalidInput(format!("m must be >= 1, got {m}")));
    }
    let scale = alpha * c * c / (2.0 * m);
    let complexity = FAST_RATE_CONSTANT * FAST_RATE_CONSTANT * (d + 1.0) * (m / alpha).ln() / m;
    let floor = (20.0 + 22.0 * m.ln()) / m;
    let (branch, fixed_point) = [(FastBranch::Scale, scale), (FastBranch::Complexity, complexity), (FastBranch::Floor, floor)]
        .into_iter()
        .fold((FastBranch::Scale, f64::NEG_INFINITY), |best, cand| if cand.1 > best.1 { cand } else { best });
    let localization = 6.0 * big_k * fixed_point;
    let confidence = (11.0 * x + 5.0 * big_k) / m;
    let mut report = BoundReport::from_parts(
        big_k / (big_k - 1.0),
        vec![("localization-term", localization), ("confidence-term", confidence)],
        LossScale::Plain,
    );
    report.branch = Some(branch);
    Ok(report)
}

/// Dimension-free bound on the squared error for coefficients with
/// `|a|_1 <= lambda`:
/// `sqrt(p^2 (14 lambda + 1/2 sqrt(ln(16 m lambda^2)))^2 / m) + sqrt(x / 2m)`.
fn maurer_bound(p: usize, lambda: f64, m: f64, x: f64) -> Result<BoundReport> {
    positive("lambda", lambda)?;
    let log_term = (16.0 * m * lambda * lambda).ln();
    if log_term < 0.0 {
        return Err(Error::Inapplicable(format!("16 m lambda^2 = {} < 1", 16.0 * m * lambda * lambda)));
    }
    let inner = 14.0 * lambda + 0.5 * log_term.sqrt();
    let p = p as f64;
    let complexity = (p * p * inner * inner / m).sqrt();
    let confidence = (x / (2.0 * m)).sqrt();
    Ok(BoundReport::from_parts(
        1.0,
        vec![("complexity-term", complexity), ("confidence-term", confidence)],
        LossScale::Squared,
    ))
}

fn fast_params(inputs: &BoundInputs) -> Result<(f64, f64)> {
    Ok((
        inputs.big_k.ok_or(Error::MissingField("K"))?,
        inputs.alpha.ok_or(Error::MissingField("alpha"))?,
    ))
}

fn l1_bound_at(inputs: &BoundInputs, lambda: f64, variant: Variant) -> Result<BoundReport> {
    inputs.check_common()?;
    positive("lambda", lambda)?;
    let np = (inputs.n * inputs.p) as f64;
    match variant {
        Variant::Maurer => maurer_bound(inputs.p, lambda, inputs.m, inputs.x),
        Variant::Slow => slow_rate_generic(1.0, 4.0 * lambda, np, inputs.m, inputs.x),
        Variant::Fast => {
            let (big_k, alpha) = fast_params(inputs)?;
            fast_rate_generic(4.0 * lambda, np, inputs.m, inputs.x, big_k, alpha)
        }
    }
}

/// Bounds for l1-constrained coding (`|a|_1 <= lambda`, unit-norm atoms).
/// The `Maurer` variant bounds squared errors; the others plain errors.
pub fn l1_generalization_bound(inputs: &BoundInputs, variant: Variant) -> Result<BoundReport> {
    let lambda = inputs.lambda.ok_or(Error::MissingField("lambda"))?;
    l1_bound_at(inputs, lambda, variant)
}

/// Bounds for k-sparse coding over dictionaries with `mu_{k-1}(D) <= delta`.
/// Reuses the l1 machinery at the coefficient radius `k / (1 - delta)`.
pub fn ksparse_generalization_bound(inputs: &BoundInputs, variant: Variant) -> Result<BoundReport> {
    let radius = inputs.ksparse_radius()?;
    l1_bound_at(inputs, radius, variant)
}

/// Dispatch on the coefficient family.
pub fn generalization_bound(inputs: &BoundInputs, family: Family, variant: Variant) -> Result<BoundReport> {
    match family {
        Family::L1 => l1_generalization_bound(inputs, variant),
        Family::Ksparse => ksparse_generalization_bound(inputs, variant),
    }
}

/// Grid search over `(K, alpha)` for the fast-rate bound, minimizing
/// `multiplier * empirical_proxy + additive`. Ties go to the smaller `K`,
/// then the smaller `alpha`. Inapplicable grid points are skipped.
pub fn optimize_fast_params(
    inputs: &BoundInputs,
    family: Family,
    k_grid: &[f64],
    alpha_grid: &[f64],
    empirical_proxy: f64,
) -> Result<(f64, f64, BoundReport)> {
    if k_grid.is_empty() || alpha_grid.is_empty() {
        return Err(Error::InvalidInput("parameter grids must be nonempty".into()));
    }
    let mut ks = k_grid.to_vec();
    let mut alphas = alpha_grid.to_vec();
    ks.sort_by(f64::total_cmp);
    alphas.sort_by(f64::total_cmp);

    let mut best: Option<(f64, f64, f64, BoundReport)> = None;
    let mut last_err = None;
    for &big_k in &ks {
        for &alpha in &alphas {
            let candidate = BoundInputs { big_k: Some(big_k), alpha: Some(alpha), ..inputs.clone() };
            match generalization_bound(&candidate, family, Variant::Fast) {
                Ok(report) => {
                    let objective = report.evaluate(empirical_proxy);
                    if best.as_ref().is_none_or(|b| objective < b.0) {
                        best = Some((objective, big_k, alpha, report));
                    }
                }
                Err(e) => last_err = Some(e),
            }
        }
    }
    best.map(|(_, k, a, r)| (k, a, r)).ok_or_else(|| {
        Error::Inapplicable(format!(
            "no applicable grid point ({})",
            last_err.map_or_else(String::new, |e| e.to_string())
        ))
    })
}

/// Tail bound on the Babel function of a dictionary of `p` independent
/// uniform-sphere atoms: `P(mu_k > 1/2) <= 1 / (exp((n-2) / (10 k ln p)^2) - 1)`,
/// clamped to `[0, 1]`.
pub fn random_babel_tail_bound(n: usize, p: usize, k: usize) -> Result<f64> {
    if k == 0 || p < 2 {
        return Err(Error::InvalidInput(format!("need k >= 1 and p >= 2 (k={k}, p={p})")));
    }
    if n <= 2 {
        return Ok(1.0);
    }
    let scale = 10.0 * k as f64 * (p as f64).ln();
    let exponent = (n as f64 - 2.0) / (scale * scale);
    Ok((1.0 / exponent.exp_m1()).clamp(0.0, 1.0))
}

/// `int_0^x sqrt(ln(gamma / eps)) d eps`, integrated after the substitution
/// `eps = x e^{-t}`, which removes the endpoint singularity.
pub fn log_integral(gamma: f64, x: f64, tol: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let shift = (gamma / x).ln();
    let f = |t: f64| x * (-t).exp() * (shift + t).max(0.0).sqrt();
    // beyond t = 60 the integrand is below x e^{-60} sqrt(shift + 60)
    adaptive_simpson(&f, 0.0, 60.0, tol)
}

/// Largest value of `int_0^x sqrt(ln(gamma/eps)) d eps - 2x sqrt(ln(gamma/x))`
/// over `x_grid`. Non-positive whenever the inequality holds.
pub fn log_integral_check(gamma: f64, x_grid: &[f64]) -> Result<f64> {
    if !(gamma >= 0.5f64.exp()) {
        return Err(Error::InvalidInput(format!("gamma must be >= e^(1/2), got {gamma}")));
    }
    if let Some(bad) = x_grid.iter().find(|&&x| !(x > 0.0 && x <= 1.0)) {
        return Err(Error::InvalidInput(format!("x values must lie in (0, 1], got {bad}")));
    }
    Ok(x_grid
        .iter()
        .map(|&x| log_integral(gamma, x, 1e-10) - 2.0 * x * (gamma / x).ln().sqrt())
        .fold(f64::NEG_INFINITY, f64::max))
}
