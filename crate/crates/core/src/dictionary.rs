//! Domain types shared by every analysis: dictionaries, signals, coefficient
//! vectors and sparsity constraints, plus the max-column (ME) norm.

use nalgebra::{DMatrix, DVector};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on column norms when checking `[1, gamma]`.
pub const COLUMN_NORM_TOL: f64 = 1e-9;

/// An `n x p` matrix whose columns are the atoms, together with the declared
/// upper bound `gamma >= 1` on the column norms.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    atoms: DMatrix<f64>,
    gamma: f64,
}

impl Dictionary {
    /// Wraps `atoms` without normalizing. Column-norm invariants are checked
    /// by [`validate_dictionary`], not here.
    pub fn new(atoms: DMatrix<f64>, gamma: f64) -> Result<Self> {
        if atoms.nrows() == 0 || atoms.ncols() == 0 {
            return Err(Error::InvalidInput("dictionary must have n >= 1 and p >= 1".into()));
        }
        if !(gamma.is_finite() && gamma >= 1.0) {
            return Err(Error::InvalidInput(format!("gamma must be finite and >= 1, got {gamma}")));
        }
        Ok(Self { atoms, gamma })
    }

    /// Dictionary with `gamma = 1`; columns are taken as given.
    pub fn unit(atoms: DMatrix<f64>) -> Result<Self> {
        Self::new(atoms, 1.0)
    }

    /// Rescales every nonzero column to unit norm and sets `gamma = 1`.
    pub fn normalized(mut atoms: DMatrix<f64>) -> Result<Self> {
        for mut col in atoms.column_iter_mut() {
            let norm = col.norm();
            if norm > 0.0 {
                col /= norm;
            }
        }
        Self::new(atoms, 1.0)
    }

    pub fn identity(n: usize) -> Self {
        Self::unit(DMatrix::identity(n, n)).expect("identity is a valid dictionary")
    }

    /// Builds a dictionary from a list of atoms (each of length `n`).
    pub fn from_atoms(atoms: &[Vec<f64>], gamma: f64) -> Result<Self> {
        let p = atoms.len();
        let n = atoms.first().map_or(0, Vec::len);
        if let Some(bad) = atoms.iter().find(|a| a.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
        }
        Self::new(DMatrix::from_fn(n, p, |i, j| atoms[j][i]), gamma)
    }

    pub fn n(&self) -> usize {
        self.atoms.nrows()
    }

    pub fn p(&self) -> usize {
        self.atoms.ncols()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn atoms(&self) -> &DMatrix<f64> {
        &self.atoms
    }

    pub fn into_atoms(self) -> DMatrix<f64> {
        self.atoms
    }

    pub fn atom(&self, j: usize) -> DVector<f64> {
        self.atoms.column(j).into_owned()
    }

    pub fn column_norms(&self) -> Vec<f64> {
        self.atoms.column_iter().map(|c| c.norm()).collect()
    }

    /// Gram matrix `D^T D`.
    pub fn gram(&self) -> DMatrix<f64> {
        self.atoms.transpose() * &self.atoms
    }
}

/// A signal in `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    values: DVector<f64>,
}

impl Signal {
    pub fn new(values: DVector<f64>) -> Self {
        Self { values }
    }

    pub fn from_slice(values: &[f64]) -> Self {
        Self::new(DVector::from_column_slice(values))
    }

    /// Accepts only signals on the unit sphere (norm within [`COLUMN_NORM_TOL`] of 1).
    pub fn unit(values: DVector<f64>) -> Result<Self> {
        let norm = values.norm();
        if (norm - 1.0).abs() > COLUMN_NORM_TOL {
            return Err(Error::InvalidInput(format!("signal norm {norm} is not 1")));
        }
        Ok(Self { values })
    }

    /// Normalizes `values` onto the sphere. Fails on (near-)zero input.
    pub fn normalize(values: DVector<f64>) -> Result<Self> {
        let norm = values.norm();
        if !(norm > 1e-12) || !norm.is_finite() {
            return Err(Error::InvalidInput("cannot normalize a zero signal".into()));
        }
        Ok(Self { values: values / norm })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.norm()
    }

    pub fn is_unit(&self) -> bool {
        (self.norm() - 1.0).abs() <= COLUMN_NORM_TOL
    }
}

/// Coefficients `a` of a representation `Da`. The support is derived from
/// the stored values, so it always agrees with them.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffVector {
    values: DVector<f64>,
}

impl CoeffVector {
    pub fn new(values: DVector<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(p: usize) -> Self {
        Self::new(DVector::zeros(p))
    }

    /// Length-`p` vector with `coeffs[i]` placed at `support[i]`.
    pub fn from_support(p: usize, support: &[usize], coeffs: &[f64]) -> Self {
        let mut values = DVector::zeros(p);
        for (&j, &c) in support.iter().zip(coeffs) {
            values[j] = c;
        }
        Self::new(values)
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn support(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn l0(&self) -> usize {
        self.values.iter().filter(|v| **v != 0.0).count()
    }

    pub fn l1(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }
}

/// Feasible coefficient set: at most `k` nonzeros, or l1 norm at most `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SparsityConstraint {
    HardK(usize),
    L1Ball(f64),
}

impl SparsityConstraint {
    /// Checks the constraint parameters against a dictionary with `p` atoms.
    pub fn check(&self, p: usize) -> Result<()> {
        match *self {
            SparsityConstraint::HardK(k) if k == 0 || k > p => Err(Error::InvalidInput(format!(
                "HardK requires 1 <= k <= p (k={k}, p={p})"
            ))),
            SparsityConstraint::L1Ball(lambda) if !(lambda > 0.0) || !lambda.is_finite() => Err(
                Error::InvalidInput(format!("L1Ball requires lambda > 0, got {lambda}")),
            ),
            _ => Ok(()),
        }
    }

    /// Whether `a` lies in the constraint set (l1 checked with relative slack `tol`).
    pub fn contains(&self, a: &CoeffVector, tol: f64) -> bool {
        match *self {
            SparsityConstraint::HardK(k) => a.l0() <= k,
            SparsityConstraint::L1Ball(lambda) => a.l1() <= lambda * (1.0 + tol) + tol,
        }
    }
}

/// Largest Euclidean column norm.
///
/// Dominates the induced `1 -> 2` operator norm: `|Ma|_2 <= me_norm(M) |a|_1`.
pub fn me_norm(m: &DMatrix<f64>) -> Result<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(Error::InvalidInput("me_norm of an empty matrix".into()));
    }
    Ok(m.column_iter().map(|c| c.norm()).fold(0.0, f64::max))
}

/// One violated dictionary invariant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    NonFinite { column: usize },
    ColumnNormBelowOne { column: usize, norm: f64 },
    ColumnNormAboveGamma { column: usize, norm: f64, gamma: f64 },
    NotNormalized { column: usize, norm: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::NonFinite { column } => write!(f, "column {column} has non-finite entries"),
            Violation::ColumnNormBelowOne { column, norm } => {
                write!(f, "column norm below 1 (column {column}, norm {norm})")
            }
            Violation::ColumnNormAboveGamma { column, norm, gamma } => {
                write!(f, "column norm above gamma (column {column}, norm {norm}, gamma {gamma})")
            }
            Violation::NotNormalized { column, norm } => {
                write!(f, "column not unit norm (column {column}, norm {norm})")
            }
        }
    }
}

/// Lists every violated invariant; an empty list means the dictionary is valid.
pub fn validate_dictionary(d: &Dictionary, normalized: bool) -> Vec<Violation> {
    let mut report = Vec::new();
    for (j, col) in d.atoms().column_iter().enumerate() {
        if col.iter().any(|v| !v.is_finite()) {
            report.push(Violation::NonFinite { column: j });
            continue;
        }
        let norm = col.norm();
        if norm < 1.0 - COLUMN_NORM_TOL {
            report.push(Violation::ColumnNormBelowOne { column: j, norm });
        } else if norm > d.gamma() + COLUMN_NORM_TOL {
            report.push(Violation::ColumnNormAboveGamma { column: j, norm, gamma: d.gamma() });
        }
        if normalized && norm >= 1.0 - COLUMN_NORM_TOL && (norm - 1.0).abs() > COLUMN_NORM_TOL {
            report.push(Violation::NotNormalized { column: j, norm });
        }
    }
    report
}

/// Draws a point uniformly from the unit sphere in `R^n` (normalized Gaussian).
pub fn sample_uniform_sphere<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Signal> {
    if n == 0 {
        return Err(Error::InvalidInput("sphere dimension must be >= 1".into()));
    }
    loop {
        let v = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm >= 1e-12 {
            return Ok(Signal::new(v / norm));
        }
    }
}

/// Dictionary of `p` independent uniform-sphere atoms in `R^n`.
pub fn random_sphere_dictionary<R: rand::Rng + ?Sized>(
    n: usize,
    p: usize,
    rng: &mut R,
) -> Result<Dictionary> {
    if p == 0 {
        return Err(Error::InvalidInput("p must be >= 1".into()));
    }
    let mut atoms = DMatrix::zeros(n, p);
    for j in 0..p {
        let s = sample_uniform_sphere(n, rng)?;
        atoms.set_column(j, s.values());
    }
    Dictionary::unit(atoms)
}
