//! Synthetic signal sources and a small alternating-minimization learner.

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coders::{greedy_ksparse, l1_solve, CodingResult, ExactCoder};
use crate::dictionary::{sample_uniform_sphere, Dictionary, Signal, SparsityConstraint};
use crate::error::{Error, Result};
use crate::rng::{seeded, Rng};

/// Ridge added to the normal equations of the dictionary update.
pub const UPDATE_RIDGE: f64 = 1e-9;

/// Residual floor for the reweighted update, `w_i = 1 / max(|r_i|, floor)`.
pub const WEIGHT_FLOOR: f64 = 1e-8;

/// Law of the nonzero coefficients before normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CoeffLaw {
    /// Independent uniform on `[-1, 1]`.
    #[default]
    Uniform,
    /// All ones.
    Ones,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SourceKind {
    /// `x = normalize(D a + sigma g)` with `a` supported on `k_true` random atoms.
    GroundTruth { dictionary: Dictionary, k_true: usize, sigma: f64, law: CoeffLaw },
    UniformSphere { n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalSource {
    pub kind: SourceKind,
    pub seed: u64,
}

impl SignalSource {
    pub fn dim(&self) -> usize {
        match &self.kind {
            SourceKind::GroundTruth { dictionary, .. } => dictionary.n(),
            SourceKind::UniformSphere { n } => *n,
        }
    }

    fn check(&self) -> Result<()> {
        match &self.kind {
            SourceKind::GroundTruth { dictionary, k_true, sigma, .. } => {
                if !(*sigma >= 0.0) || !sigma.is_finite() {
                    return Err(Error::InvalidInput(format!("sigma must be >= 0, got {sigma}")));
                }
                if *k_true == 0 || *k_true > dictionary.p() {
                    return Err(Error::InvalidInput(format!(
                        "k_true must lie in [1, p] (k_true={k_true}, p={})",
                        dictionary.p()
                    )));
                }
            }
            SourceKind::UniformSphere { n } => {
                if *n == 0 {
                    return Err(Error::InvalidInput("signal dimension must be >= 1".into()));
                }
            }
        }
        Ok(())
    }
}

/// First `m` signals of the stream determined by `source.seed`.
pub fn synth_sample(source: &SignalSource, m: usize) -> Result<Vec<Signal>> {
    let mut rng = seeded(source.seed);
    synth_sample_with(source, m, &mut rng)
}

/// Draws `m` signals from the source law using the caller's generator.
pub fn synth_sample_with(source: &SignalSource, m: usize, rng: &mut Rng) -> Result<Vec<Signal>> {
    if m == 0 {
        return Err(Error::InvalidInput("sample count must be >= 1".into()));
    }
    source.check()?;
    (0..m).map(|_| draw_one(&source.kind, rng)).collect()
}

fn draw_one(kind: &SourceKind, rng: &mut Rng) -> Result<Signal> {
    match kind {
        SourceKind::UniformSphere { n } => sample_uniform_sphere(*n, rng),
        SourceKind::GroundTruth { dictionary, k_true, sigma, law } => loop {
            let support = index::sample(rng, dictionary.p(), *k_true);
            let mut coeffs: Vec<f64> = match law {
                CoeffLaw::Uniform => (0..*k_true).map(|_| rng.random_range(-1.0..=1.0)).collect(),
                CoeffLaw::Ones => vec![1.0; *k_true],
            };
            let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm < 1e-12 {
                continue;
            }
            coeffs.iter_mut().for_each(|c| *c /= norm);
            let mut x = DVector::zeros(dictionary.n());
            for (j, c) in support.iter().zip(&coeffs) {
                x += dictionary.atoms().column(j) * *c;
            }
            if *sigma > 0.0 {
                x += DVector::from_fn(dictionary.n(), |_, _| sigma * rng.sample::<f64, _>(StandardNormal));
            }
            if x.norm() >= 1e-12 {
                return Signal::normalize(x);
            }
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    #[default]
    RandomSphere,
    /// `p` distinct training samples.
    SampleAtoms,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Coder {
    Greedy,
    #[default]
    Exact,
}

/// Dictionary update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Update {
    /// `D = X A' (A A' + ridge I)^{-1}`, minimizing the summed squared error.
    Mod,
    /// The same solve with each sample weighted by `1 / |r_i|`, a
    /// majorize-minimize step on the summed plain error.
    Reweighted,
    /// `Mod`, replaced by the better of `Mod` and `Reweighted` whenever the
    /// plain step would raise the mean error.
    #[default]
    Safeguarded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub p: usize,
    pub constraint: SparsityConstraint,
    pub iterations: usize,
    pub seed: u64,
    #[serde(default)]
    pub init: Init,
    /// Coder for `HardK`; `L1Ball` always uses the projected-gradient solver.
    #[serde(default)]
    pub coder: Coder,
    #[serde(default)]
    pub update: Update,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnOutcome {
    pub dictionary: Dictionary,
    /// Mean training error of the dictionary after each update.
    pub trace: Vec<f64>,
}

/// Codes every signal against `d`, in parallel, results in input order.
pub fn code_all(
    d: &Dictionary,
    signals: &[Signal],
    constraint: SparsityConstraint,
    coder: Coder,
) -> Result<Vec<CodingResult>> {
    let exact = match (constraint, coder) {
        (SparsityConstraint::HardK(k), Coder::Exact) => Some(ExactCoder::new(d, k)?),
        _ => None,
    };
    signals
        .par_iter()
        .map(|x| match constraint {
            SparsityConstraint::HardK(k) => match &exact {
                Some(c) => c.code(x),
                None => greedy_ksparse(d, x, k.min(d.n())),
            },
            SparsityConstraint::L1Ball(lambda) => l1_solve(d, x, lambda),
        })
        .collect()
}

fn mean_error(codes: &[CodingResult]) -> f64 {
    codes.iter().map(|c| c.error).sum::<f64>() / codes.len() as f64
}

/// Alternates sparse coding, a least-squares dictionary update and column
/// renormalization for `config.iterations` rounds.
pub fn learn_dictionary(samples: &[Signal], config: &LearnerConfig) -> Result<LearnOutcome> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("no training samples".into()));
    }
    if config.iterations == 0 {
        return Err(Error::InvalidInput("iterations must be >= 1".into()));
    }
    config.constraint.check(config.p)?;
    let n = samples[0].len();
    if let Some(bad) = samples.iter().find(|s| s.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
    }
    let m = samples.len();
    let p = config.p;
    let mut rng = seeded(config.seed);

    let mut atoms = match config.init {
        Init::RandomSphere => crate::dictionary::random_sphere_dictionary(n, p, &mut rng)?.into_atoms(),
        Init::SampleAtoms => {
            if p > m {
                return Err(Error::InvalidInput(format!("sample-atoms init needs p <= m (p={p}, m={m})")));
            }
            let mut a = DMatrix::zeros(n, p);
            for (j, i) in index::sample(&mut rng, m, p).into_iter().enumerate() {
                a.set_column(j, samples[i].values());
            }
            a
        }
    };
    renormalize(&mut atoms, &mut rng)?;
    let x = DMatrix::from_fn(n, m, |r, c| samples[c].values()[r]);

    let mut d = Dictionary::unit(atoms)?;
    let mut codes = code_all(&d, samples, config.constraint, config.coder)?;
    let mut trace = Vec::with_capacity(config.iterations);
    let mut current = mean_error(&codes);
    for _ in 0..config.iterations {
        let rule = match config.update {
            Update::Safeguarded => Update::Mod,
            other => other,
        };
        let (mut next_d, mut next_codes) = update_step(&x, &codes, rule, samples, config, &mut rng)?;
        let mut next = mean_error(&next_codes);
        if config.update == Update::Safeguarded && next > current {
            let (alt_d, alt_codes) = update_step(&x, &codes, Update::Reweighted, samples, config, &mut rng)?;
            let alt = mean_error(&alt_codes);
            if alt < next {
                (next_d, next_codes, next) = (alt_d, alt_codes, alt);
            }
        }
        d = next_d;
        codes = next_codes;
        current = next;
        trace.push(current);
    }
    Ok(LearnOutcome { dictionary: d, trace })
}

fn update_step(
    x: &DMatrix<f64>,
    codes: &[CodingResult],
    rule: Update,
    samples: &[Signal],
    config: &LearnerConfig,
    rng: &mut Rng,
) -> Result<(Dictionary, Vec<CodingResult>)> {
    let (p, m) = (config.p, codes.len());
    let a = DMatrix::from_fn(p, m, |r, c| codes[c].coeffs.values()[r]);
    let mut aw = a.clone();
    if rule == Update::Reweighted {
        for (c, code) in codes.iter().enumerate() {
            aw.column_mut(c).scale_mut(1.0 / code.error.max(WEIGHT_FLOOR));
        }
    }
    let mut normal = &aw * a.transpose();
    for i in 0..p {
        normal[(i, i)] += UPDATE_RIDGE;
    }
    let rhs = (x * aw.transpose()).transpose();
    let mut atoms = match normal.clone().cholesky() {
        Some(ch) => ch.solve(&rhs).transpose(),
        None => normal
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::InvalidInput("singular dictionary update".into()))?
            .transpose(),
    };
    renormalize(&mut atoms, rng)?;
    let d = Dictionary::unit(atoms)?;
    let codes = code_all(&d, samples, config.constraint, config.coder)?;
    Ok((d, codes))
}

/// Scales columns to unit norm; (numerically) zero columns become fresh
/// uniform-sphere atoms.
fn renormalize(atoms: &mut DMatrix<f64>, rng: &mut Rng) -> Result<()> {
    let n = atoms.nrows();
    for j in 0..atoms.ncols() {
        let norm = atoms.column(j).norm();
        if norm < 1e-10 || !norm.is_finite() {
            let fresh = sample_uniform_sphere(n, rng)?;
            atoms.set_column(j, fresh.values());
        } else {
            atoms.column_mut(j).unscale_mut(norm);
        }
    }
    Ok(())
}

/// Mean error of the best single atom among `candidates`, coding each signal
/// by its projection: `mean_i sqrt(1 - <x_i, d>^2)`.
pub fn single_atom_baseline(signals: &[Signal], candidates: &[DVector<f64>]) -> f64 {
    candidates
        .iter()
        .map(|d| {
            let d = d / d.norm();
            signals
                .iter()
                .map(|x| (x.values().norm_squared() - x.values().dot(&d).powi(2)).max(0.0).sqrt())
                .sum::<f64>()
                / signals.len() as f64
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coders::repr_error;
    use crate::dictionary::{random_sphere_dictionary, validate_dictionary};
    use approx::assert_abs_diff_eq;

    fn ground(n: usize, p: usize, k: usize, sigma: f64, seed: u64, law: CoeffLaw) -> SignalSource {
        let mut rng = seeded(seed.wrapping_add(1000));
        let dictionary = random_sphere_dictionary(n, p, &mut rng).unwrap();
        SignalSource { kind: SourceKind::GroundTruth { dictionary, k_true: k, sigma, law }, seed }
    }

    #[test]
    fn sources_are_unit_and_deterministic() {
        let src = ground(6, 9, 2, 0.1, 3, CoeffLaw::Uniform);
        let a = synth_sample(&src, 200).unwrap();
        let b = synth_sample(&src, 200).unwrap();
        assert_eq!(a, b);
        for s in &a {
            assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-12);
        }
        let sphere = SignalSource { kind: SourceKind::UniformSphere { n: 4 }, seed: 9 };
        for s in synth_sample(&sphere, 100).unwrap() {
            assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-12);
        }
        let bad = ground(3, 4, 1, -1.0, 0, CoeffLaw::Uniform);
        assert!(synth_sample(&bad, 1).is_err());
        assert!(synth_sample(&sphere, 0).is_err());
    }

    #[test]
    fn single_atom_signals_are_exactly_representable() {
        let src = ground(5, 7, 1, 0.0, 4, CoeffLaw::Ones);
        let SourceKind::GroundTruth { dictionary, .. } = &src.kind else { unreachable!() };
        for x in synth_sample(&src, 50).unwrap() {
            let r = repr_error(dictionary, &x, SparsityConstraint::HardK(1), true).unwrap();
            assert!(r.error < 1e-12);
        }
    }

    #[test]
    fn orthonormal_samples_are_learned_immediately() {
        let samples: Vec<Signal> = (0..4)
            .map(|i| Signal::new(DVector::from_fn(4, |r, _| if r == i { 1.0 } else { 0.0 })))
            .collect();
        let config = LearnerConfig {
            p: 4,
            constraint: SparsityConstraint::HardK(1),
            iterations: 3,
            seed: 1,
            init: Init::SampleAtoms,
            coder: Coder::Exact,
            update: Update::Mod,
        };
        let out = learn_dictionary(&samples, &config).unwrap();
        assert_eq!(out.trace.len(), 3);
        assert!(out.trace[0] < 1e-9);
    }

    #[test]
    fn trace_is_monotone_with_exact_coder() {
        for seed in 0..5 {
            let src = ground(5, 8, 2, 0.2, seed, CoeffLaw::Uniform);
            let samples = synth_sample(&src, 150).unwrap();
            let config = LearnerConfig {
                p: 8,
                constraint: SparsityConstraint::HardK(2),
                iterations: 8,
                seed,
                init: Init::RandomSphere,
                coder: Coder::Exact,
                update: Update::Safeguarded,
            };
            let out = learn_dictionary(&samples, &config).unwrap();
            assert_eq!(out.trace.len(), 8);
            assert!(validate_dictionary(&out.dictionary, true).is_empty());
            for w in out.trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-6, "seed {seed}: {:?}", out.trace);
            }
        }
    }

    #[test]
    fn beats_single_atom_baseline() {
        let src = SignalSource { kind: SourceKind::UniformSphere { n: 4 }, seed: 12 };
        let samples = synth_sample(&src, 300).unwrap();
        let config = LearnerConfig {
            p: 8,
            constraint: SparsityConstraint::HardK(1),
            iterations: 5,
            seed: 2,
            init: Init::SampleAtoms,
            coder: Coder::Exact,
            update: Update::Reweighted,
        };
        let out = learn_dictionary(&samples, &config).unwrap();
        let mut candidates: Vec<_> = (0..8).map(|j| out.dictionary.atom(j)).collect();
        candidates.extend(samples.iter().map(|s| s.values().clone()));
        let x = DMatrix::from_fn(4, samples.len(), |r, c| samples[c].values()[r]);
        let eig = (&x * x.transpose()).symmetric_eigen();
        candidates.push(eig.eigenvectors.column(eig.eigenvalues.imax()).into_owned());
        assert!(*out.trace.last().unwrap() < single_atom_baseline(&samples, &candidates));
    }

    #[test]
    fn l1_learning_keeps_unit_atoms() {
        let src = ground(4, 6, 2, 0.05, 8, CoeffLaw::Uniform);
        let samples = synth_sample(&src, 60).unwrap();
        let config = LearnerConfig {
            p: 6,
            constraint: SparsityConstraint::L1Ball(1.5),
            iterations: 3,
            seed: 0,
            init: Init::RandomSphere,
            coder: Coder::Exact,
            update: Update::Mod,
        };
        let out = learn_dictionary(&samples, &config).unwrap();
        assert!(validate_dictionary(&out.dictionary, true).is_empty());
        assert_eq!(out.trace.len(), 3);
    }
}
