//! Finite-dimensional construction of five orthogonal projections whose
//! products fail to converge in norm, with numerical certificates.

pub mod assembly;
pub mod cli;
pub mod error;
pub mod lemma1;
pub mod lemma2;
pub mod linalg;
pub mod monomial;
pub mod properties;
pub mod report;
pub mod scalar;
pub mod wordexpr;

pub use error::{Error, Result};
