//! Sample-complexity toolkit for dictionary learning.
//!
//! Geometry of dictionaries (Babel function, coherence), sparse coders for the
//! representation error, closed-form covering-number and generalization
//! bounds, kernelized variants, a small dictionary learner and the Monte Carlo
//! experiments that check the bounds empirically.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod coders;
pub mod coherence;
pub mod dictionary;
pub mod error;
pub mod experiments;
pub mod io;
pub mod kernel;
pub mod learn;
pub mod linalg;
pub mod quadrature;
pub mod rng;

pub use dictionary::{CoeffVector, Dictionary, Signal, SparsityConstraint};
pub use error::{Error, Result};
