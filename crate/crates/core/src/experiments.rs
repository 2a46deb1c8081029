//! Monte Carlo and constructive experiments: random-dictionary Babel tails,
//! the generalization-gap harness, and Lipschitz probes of the error map.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::bounds::{self, BoundInputs, Family, LossScale, Variant};
use crate::coders::{exact_ksparse, l1_solve_with, L1Options};
use crate::coherence::babel_or_zero;
use crate::dictionary::{me_norm, random_sphere_dictionary, sample_uniform_sphere, validate_dictionary, Dictionary, Signal, SparsityConstraint};
use crate::error::{Error, Result};
use crate::learn::{code_all, learn_dictionary, synth_sample_with, Coder, LearnerConfig, SignalSource};
use crate::rng::{seeded, substream, substream_seed, Rng};

/// Logarithm convention recorded with every run.
pub const LOG_BASE_NOTE: &str = "all logarithms are natural (base e)";

/// Recommended minimum test-set size for the gap harness.
pub const RECOMMENDED_TEST_SIZE: usize = 10_000;

/// Target error for the signal search of [`nonlipschitz_demo`].
pub const DEMO_SEARCH_TARGET: f64 = 0.05;

/// Signal budget of that search.
pub const DEMO_SEARCH_BUDGET: usize = 100_000;

/// One CSV row: `trial,seed,n,p,k,m,stat,bound,applicable`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub n: usize,
    pub p: usize,
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub stat: f64,
    pub bound: f64,
    pub applicable: bool,
}

pub const CSV_HEADER: [&str; 9] = ["trial", "seed", "n", "p", "k", "m", "stat", "bound", "applicable"];

/// Writes records with the fixed header. Floats use shortest round-trip form.
pub fn write_records_csv<W: Write>(records: &[TrialRecord], writer: W) -> Result<()> {
    let err = |e: csv::Error| Error::Parse(e.to_string());
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    wtr.write_record(CSV_HEADER).map_err(err)?;
    let opt = |v: Option<usize>| v.map_or_else(String::new, |v| v.to_string());
    for r in records {
        if !r.stat.is_finite() || !r.bound.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite record at trial {}", r.trial)));
        }
        wtr.write_record([
            r.trial.to_string(),
            r.seed.to_string(),
            r.n.to_string(),
            r.p.to_string(),
            opt(r.k),
            opt(r.m),
            format!("{:?}", r.stat),
            format!("{:?}", r.bound),
            r.applicable.to_string(),
        ])
        .map_err(err)?;
    }
    wtr.flush().map_err(|e| Error::Parse(e.to_string()))
}

/// `P(Bin(trials, prob) >= count)`.
pub fn binomial_upper_tail(trials: u64, prob: f64, count: u64) -> Result<f64> {
    if count == 0 {
        return Ok(1.0);
    }
    if prob <= 0.0 {
        return Ok(0.0);
    }
    let b = Binomial::new(prob.min(1.0), trials).map_err(|e| Error::InvalidInput(e.to_string()))?;
    Ok(b.sf(count - 1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BabelTail {
    pub k: usize,
    pub exceed: u64,
    pub empirical: f64,
    /// Tail bound at threshold 1/2.
    pub bound: f64,
    /// `P(Bin(trials, bound) >= exceed)`; small values contradict the bound.
    pub p_value: f64,
}

impl BabelTail {
    /// One-sided check: the count is not significant against the bound at `confidence`.
    pub fn consistent_at(&self, confidence: f64) -> bool {
        self.p_value >= 1.0 - confidence
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McBabelOutcome {
    pub threshold: f64,
    pub trials: usize,
    pub tails: Vec<BabelTail>,
    pub records: Vec<TrialRecord>,
}

/// Samples `trials` dictionaries of `p` uniform-sphere atoms in `R^n` and
/// counts how often `mu_k > threshold`, for every `k` on the same dictionaries.
/// Trial `t` draws from substream `t` of `seed`.
pub fn mc_babel(n: usize, p: usize, ks: &[usize], trials: usize, threshold: f64, seed: u64) -> Result<McBabelOutcome> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be >= 1".into()));
    }
    if ks.is_empty() {
        return Err(Error::InvalidInput("no Babel orders given".into()));
    }
    for &k in ks {
        if k == 0 || k >= p {
            return Err(Error::InvalidOrder { k, p });
        }
    }
    let values: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(seed, t as u64);
            let d = random_sphere_dictionary(n, p, &mut rng)?;
            let gram = d.gram();
            ks.iter()
                .map(|&k| crate::coherence::babel_from_gram(&gram, k).map(|b| b.value))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let mut records = Vec::with_capacity(trials * ks.len());
    let mut tails = Vec::with_capacity(ks.len());
    for (j, &k) in ks.iter().enumerate() {
        let bound = bounds::random_babel_tail_bound(n, p, k)?;
        let exceed = values.iter().filter(|v| v[j] > threshold).count() as u64;
        tails.push(BabelTail {
            k,
            exceed,
            empirical: exceed as f64 / trials as f64,
            bound,
            p_value: binomial_upper_tail(trials as u64, bound, exceed)?,
        });
    }
    for (t, v) in values.iter().enumerate() {
        for (j, &k) in ks.iter().enumerate() {
            records.push(TrialRecord {
                trial: t,
                seed: substream_seed(seed, t as u64),
                n,
                p,
                k: Some(k),
                m: None,
                stat: v[j],
                bound: tails[j].bound,
                applicable: true,
            });
        }
    }
    Ok(McBabelOutcome { threshold, trials, tails, records })
}

/// Grids searched when a fast-rate bound is requested.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FastGrid {
    #[serde(rename = "K")]
    pub big_k: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl Default for FastGrid {
    fn default() -> Self {
        Self { big_k: vec![1.25, 1.5, 2.0, 3.0, 5.0, 10.0], alpha: vec![1e-3, 1e-2, 0.1, 1.0, 10.0] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GengapConfig {
    pub source: SignalSource,
    pub learner: LearnerConfig,
    pub m_grid: Vec<usize>,
    pub test_size: usize,
    pub variants: Vec<Variant>,
    /// Confidence exponent of the evaluated bounds.
    pub x: f64,
    pub fast_grid: FastGrid,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub variant: Variant,
    pub family: Family,
    pub loss_scale: LossScale,
    pub applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub multiplier: f64,
    pub additive: f64,
    pub vacuous: bool,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub big_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Measured gap on the bound's loss scale.
    pub gap: f64,
    /// `(multiplier - 1) E_m + additive` on the bound's loss scale.
    pub allowance: f64,
    /// `test <= multiplier * train + additive`.
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub m: usize,
    pub seed: u64,
    pub test_size: usize,
    pub train_error: f64,
    pub test_error: f64,
    pub train_sq: f64,
    pub test_sq: f64,
    /// Standard error of `test_error - train_error`.
    pub gap_se: f64,
    pub gap_sq_se: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub checks: Vec<BoundCheck>,
    pub learning_trace: Vec<f64>,
}

impl GapRow {
    pub fn gap(&self) -> f64 {
        self.test_error - self.train_error
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GengapOutcome {
    pub rows: Vec<GapRow>,
    pub records: Vec<TrialRecord>,
    pub warnings: Vec<String>,
}

struct Moments {
    mean: f64,
    mean_sq: f64,
    se: f64,
    se_sq: f64,
}

fn moments(errors: &[f64]) -> Moments {
    let len = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / len;
    let mean_sq = errors.iter().map(|e| e * e).sum::<f64>() / len;
    let denom = (len - 1.0).max(1.0);
    let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / denom;
    let var_sq = errors.iter().map(|e| (e * e - mean_sq).powi(2)).sum::<f64>() / denom;
    Moments { mean, mean_sq, se: (var / len).sqrt(), se_sq: (var_sq / len).sqrt() }
}

fn exact_errors(d: &Dictionary, signals: &[Signal], constraint: SparsityConstraint) -> Result<Vec<f64>> {
    Ok(code_all(d, signals, constraint, Coder::Exact)?.into_iter().map(|c| c.error).collect())
}

/// For each `m` in the grid: learn a dictionary on `m` fresh samples, measure
/// the exact-coder training and test errors, and evaluate the selected bounds
/// at matched parameters. The test set is shared across the grid.
pub fn gengap_run(config: &GengapConfig) -> Result<GengapOutcome> {
    if config.m_grid.is_empty() {
        return Err(Error::InvalidInput("empty m grid".into()));
    }
    if config.test_size < 2 {
        return Err(Error::InvalidInput("test size must be >= 2".into()));
    }
    let mut warnings = Vec::new();
    if config.test_size < RECOMMENDED_TEST_SIZE {
        warnings.push(format!(
            "test size {} is below the recommended {RECOMMENDED_TEST_SIZE}",
            config.test_size
        ));
    }
    let n = config.source.dim();
    let p = config.learner.p;
    let constraint = config.learner.constraint;
    let (family, k) = match constraint {
        SparsityConstraint::HardK(k) => (Family::Ksparse, Some(k)),
        SparsityConstraint::L1Ball(_) => (Family::L1, None),
    };

    let test = synth_sample_with(&config.source, config.test_size, &mut substream(config.seed, 0))?;
    let mut rows = Vec::with_capacity(config.m_grid.len());
    let mut records = Vec::new();
    for (i, &m) in config.m_grid.iter().enumerate() {
        let train_seed = substream_seed(config.seed, 1 + i as u64);
        let train = synth_sample_with(&config.source, m, &mut seeded(train_seed))?;
        let learner = LearnerConfig { seed: substream_seed(train_seed, 0), ..config.learner.clone() };
        let learned = learn_dictionary(&train, &learner)?;
        let d = learned.dictionary;
        let tr = moments(&exact_errors(&d, &train, constraint)?);
        let te = moments(&exact_errors(&d, &test, constraint)?);

        let mut inputs = BoundInputs::new(n, p, m as f64, config.x);
        let mut unusable = None;
        let delta = match constraint {
            SparsityConstraint::HardK(k) => {
                let delta = babel_or_zero(&d, k - 1)?;
                inputs = inputs.with_k(k).with_delta(delta);
                if delta >= 1.0 {
                    unusable = Some(format!("measured mu_{{k-1}} = {delta} >= 1"));
                }
                Some(delta)
            }
            SparsityConstraint::L1Ball(lambda) => {
                inputs = inputs.with_lambda(lambda);
                None
            }
        };

        let mut checks = Vec::with_capacity(config.variants.len());
        for &variant in &config.variants {
            let scale = if variant == Variant::Maurer { LossScale::Squared } else { LossScale::Plain };
            let (train_v, test_v) = match scale {
                LossScale::Plain => (tr.mean, te.mean),
                LossScale::Squared => (tr.mean_sq, te.mean_sq),
            };
            let evaluated = match &unusable {
                Some(reason) => Err(Error::Inapplicable(reason.clone())),
                None if variant == Variant::Fast => {
                    bounds::optimize_fast_params(&inputs, family, &config.fast_grid.big_k, &config.fast_grid.alpha, train_v)
                        .map(|(kk, a, r)| (Some(kk), Some(a), r))
                }
                None => bounds::generalization_bound(&inputs, family, variant).map(|r| (None, None, r)),
            };
            let check = match evaluated {
                Ok((big_k, alpha, r)) => BoundCheck {
                    variant,
                    family,
                    loss_scale: r.loss_scale,
                    applicable: true,
                    reason: None,
                    multiplier: r.multiplier,
                    additive: r.additive,
                    vacuous: r.vacuous,
                    big_k,
                    alpha,
                    gap: test_v - train_v,
                    allowance: (r.multiplier - 1.0) * train_v + r.additive,
                    holds: test_v <= r.multiplier * train_v + r.additive,
                },
                Err(Error::Inapplicable(reason)) => BoundCheck {
                    variant,
                    family,
                    loss_scale: scale,
                    applicable: false,
                    reason: Some(reason),
                    multiplier: 1.0,
                    additive: 0.0,
                    vacuous: false,
                    big_k: None,
                    alpha: None,
                    gap: test_v - train_v,
                    allowance: 0.0,
                    holds: false,
                },
                Err(e) => return Err(e),
            };
            records.push(TrialRecord {
                trial: i,
                seed: train_seed,
                n,
                p,
                k,
                m: Some(m),
                stat: check.gap,
                bound: check.allowance,
                applicable: check.applicable,
            });
            checks.push(check);
        }
        rows.push(GapRow {
            m,
            seed: train_seed,
            test_size: config.test_size,
            train_error: tr.mean,
            test_error: te.mean,
            train_sq: tr.mean_sq,
            test_sq: te.mean_sq,
            gap_se: (tr.se * tr.se + te.se * te.se).sqrt(),
            gap_sq_se: (tr.se_sq * tr.se_sq + te.se_sq * te.se_sq).sqrt(),
            delta,
            checks,
            learning_trace: learned.trace,
        });
    }
    Ok(GengapOutcome { rows, records, warnings })
}

/// Indices `i` where the gap rises from row `i` to `i + 1` by more than
/// `z` combined standard errors.
pub fn gap_trend_violations(rows: &[GapRow], z: f64) -> Vec<usize> {
    rows.windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].gap() > w[0].gap() + z * (w[0].gap_se.powi(2) + w[1].gap_se.powi(2)).sqrt())
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeOutcome {
    /// Largest `|h_D(x) - h_D'(x)| / |D - D'|_ME` over the signals.
    pub ratio: f64,
    /// `lambda`, or `k / (1 - delta)` with `delta` the larger measured `mu_{k-1}`.
    pub limit: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    pub distance: f64,
}

/// Compares representation errors under two normalized dictionaries with
/// exact solvers.
pub fn lipschitz_probe(
    d: &Dictionary,
    d_prime: &Dictionary,
    signals: &[Signal],
    constraint: SparsityConstraint,
) -> Result<ProbeOutcome> {
    if d.n() != d_prime.n() || d.p() != d_prime.p() {
        return Err(Error::DimensionMismatch { expected: d.n() * d.p(), got: d_prime.n() * d_prime.p() });
    }
    for dict in [d, d_prime] {
        if let Some(v) = validate_dictionary(dict, true).first() {
            return Err(Error::InvalidInput(format!("probe needs normalized dictionaries: {v}")));
        }
    }
    constraint.check(d.p())?;
    let distance = me_norm(&(d.atoms() - d_prime.atoms()))?;
    if distance < 1e-12 {
        return Err(Error::DegeneratePair(distance));
    }
    let (limit, delta) = match constraint {
        SparsityConstraint::L1Ball(lambda) => (lambda, None),
        SparsityConstraint::HardK(k) => {
            let delta = babel_or_zero(d, k - 1)?.max(babel_or_zero(d_prime, k - 1)?);
            if delta >= 1.0 {
                return Err(Error::Inapplicable(format!("measured mu_{{k-1}} = {delta} >= 1")));
            }
            (k as f64 / (1.0 - delta), Some(delta))
        }
    };
    let err = |dict: &Dictionary, x: &Signal| -> Result<f64> {
        match constraint {
            SparsityConstraint::HardK(k) => exact_ksparse(dict, x, k).map(|r| r.error),
            SparsityConstraint::L1Ball(lambda) => l1_solve_with(dict, x, lambda, L1Options::precise()).map(|r| r.error),
        }
    };
    let ratios: Vec<f64> = signals
        .par_iter()
        .map(|x| Ok((err(d, x)? - err(d_prime, x)?).abs() / distance))
        .collect::<Result<_>>()?;
    Ok(ProbeOutcome { ratio: ratios.into_iter().fold(0.0, f64::max), limit, delta, distance })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoOutcome {
    pub d: Dictionary,
    pub d_prime: Dictionary,
    pub q: Signal,
    pub h_d: f64,
    pub h_d_prime: f64,
    pub distance: f64,
    pub ratio: f64,
    /// Signals examined by the search (0 when `q` was supplied).
    pub searched: usize,
}

/// Pair of dictionaries within `eps` of each other in the ME norm whose
/// k-sparse errors on one signal `q` differ by roughly a constant.
///
/// `D` has atoms `e_1, ..., e_{k-1}`, then `sqrt(1 - eps^2/4) e_1 + (eps/2) e_k`,
/// then random unit atoms. `D'` replaces the k-th atom by the unit vector
/// `sqrt(1 - eps^2/4) e_1 + l q`, which puts `q` in the span of its first
/// `k` atoms. Without a supplied `q`, the search keeps the sampled unit signal
/// with the largest `h_D` until it reaches [`DEMO_SEARCH_TARGET`]. Candidates
/// are drawn orthogonal to `e_1`, so `l = eps/2` and `D'` stays well
/// conditioned enough for `h_{D'}(q)` to vanish to 1e-10.
pub fn nonlipschitz_demo(n: usize, p: usize, k: usize, eps: f64, seed: u64, q: Option<Signal>) -> Result<DemoOutcome> {
    if k < 2 || k > n || k > p {
        return Err(Error::InvalidInput(format!("demo needs 2 <= k <= min(n, p) (k={k}, n={n}, p={p})")));
    }
    if !(eps > 0.0 && eps < 2.0) {
        return Err(Error::InvalidInput(format!("eps must lie in (0, 2), got {eps}")));
    }
    let mut rng = seeded(seed);
    let base = (1.0 - eps * eps / 4.0).sqrt();
    let mut atoms = DMatrix::zeros(n, p);
    for j in 0..k - 1 {
        atoms[(j, j)] = 1.0;
    }
    atoms[(0, k - 1)] = base;
    atoms[(k - 1, k - 1)] = eps / 2.0;
    for j in k..p {
        atoms.set_column(j, sample_uniform_sphere(n, &mut rng)?.values());
    }
    let d = Dictionary::unit(atoms.clone())?;

    let h = |dict: &Dictionary, x: &Signal| exact_ksparse(dict, x, k).map(|r| r.error);
    let (q, h_d, searched) = match q {
        Some(q) => {
            if q.len() != n || !q.is_unit() {
                return Err(Error::InvalidInput("supplied q must be a unit vector in R^n".into()));
            }
            let v = h(&d, &q)?;
            (q, v, 0)
        }
        None => {
            let mut best: Option<(Signal, f64)> = None;
            let mut searched = 0;
            while searched < DEMO_SEARCH_BUDGET {
                let batch = if searched == 0 { 1000 } else { 4000.min(DEMO_SEARCH_BUDGET - searched) };
                let mut batch_rng = substream(seed, searched as u64 + 1);
                let cands: Vec<Signal> = (0..batch)
                    .map(|_| {
                        let mut v = sample_uniform_sphere(n, &mut batch_rng)?.values().clone();
                        v[0] = 0.0;
                        Signal::normalize(v)
                    })
                    .collect::<Result<_>>()?;
                let errs: Vec<f64> = cands.par_iter().map(|x| h(&d, x)).collect::<Result<_>>()?;
                for (x, e) in cands.into_iter().zip(errs) {
                    if best.as_ref().is_none_or(|b| e > b.1) {
                        best = Some((x, e));
                    }
                }
                searched += batch;
                if best.as_ref().is_some_and(|b| b.1 >= DEMO_SEARCH_TARGET) {
                    break;
                }
            }
            let (q, v) = best.expect("at least one batch");
            if v < DEMO_SEARCH_TARGET {
                return Err(Error::SearchFailed { best: v, target: DEMO_SEARCH_TARGET });
            }
            (q, v, searched)
        }
    };

    // |base e_1 + l q| = 1  <=>  l^2 + 2 base q_1 l - eps^2/4 = 0; take the smaller root.
    let b = base * q.values()[0];
    let disc = (b * b + eps * eps / 4.0).sqrt();
    let l = if b >= 0.0 { eps * eps / 4.0 / (b + disc) } else { -eps * eps / 4.0 / (disc - b) };
    let mut prime = atoms;
    let mut v = DVector::zeros(n);
    v[0] = base;
    v += q.values() * l;
    prime.set_column(k - 1, &v);
    let d_prime = Dictionary::unit(prime)?;
    let h_d_prime = h(&d_prime, &q)?;
    let distance = me_norm(&(d.atoms() - d_prime.atoms()))?;
    Ok(DemoOutcome { ratio: (h_d - h_d_prime).abs() / distance, d, d_prime, q, h_d, h_d_prime, distance, searched })
}

/// Unit-norm tight frame of `p` vectors in `R^n`, by alternating the frame
/// projection `D <- sqrt(p/n) (D D')^{-1/2} D` with column normalization.
pub fn random_tight_frame(n: usize, p: usize, rng: &mut Rng) -> Result<Dictionary> {
    if p < n {
        return Err(Error::InvalidInput(format!("a frame needs p >= n (n={n}, p={p})")));
    }
    let mut atoms = random_sphere_dictionary(n, p, rng)?.into_atoms();
    let scale = (p as f64 / n as f64).sqrt();
    for _ in 0..500 {
        let eig = SymmetricEigen::new(&atoms * atoms.transpose());
        if eig.eigenvalues.min() <= 1e-12 {
            break;
        }
        let inv_sqrt = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt()))
            * eig.eigenvectors.transpose();
        atoms = inv_sqrt * atoms * scale;
        for mut c in atoms.column_iter_mut() {
            let norm = c.norm();
            c.unscale_mut(norm);
        }
    }
    Dictionary::unit(atoms)
}

/// Tight frame with every atom perturbed by Gaussian noise of scale `noise`
/// and renormalized.
pub fn perturbed_tight_frame(n: usize, p: usize, noise: f64, rng: &mut Rng) -> Result<Dictionary> {
    let frame = random_tight_frame(n, p, rng)?.into_atoms();
    let noise_m = DMatrix::from_fn(n, p, |_, _| noise * rand::Rng::sample::<f64, _>(rng, rand_distr::StandardNormal));
    Dictionary::normalized(frame + noise_m)
}
