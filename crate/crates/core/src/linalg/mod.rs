//! Dense real linear algebra on small spaces: projectors, rotations,
//! symmetric eigendecomposition, spectral powers and operator norms.

mod construct;
mod eigen;
mod matrix;
mod operator;
pub mod real;
mod vector;

pub use construct::{orthonormalize, plane_rotation, projector_onto_span, rank_one};
pub use eigen::{eigenvalues, op_norm, spectral_power, sym_eig, SpectralPower, SymEig};
pub use matrix::Matrix;
pub use operator::{projection_defects, OrthogonalMap, Projection, ProjectionDefects, SymOperator};
pub use real::Real;
pub use vector::Vector;

use crate::error::{Error, Result};

pub const UNIT_TOL: f64 = 1e-12;
pub const SYM_TOL: f64 = 1e-12;
pub const ORTHO_TOL: f64 = 1e-12;
pub const IDEMPOTENCE_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-8;
pub const SPECTRUM_TOL: f64 = 1e-8;
pub const GRAM_TOL: f64 = 1e-10;
pub const CONTRACTION_TOL: f64 = 1e-9;
pub const PSD_TOL: f64 = 1e-9;
pub const POWER_BASE_SYM_TOL: f64 = 1e-9;
pub const UNDERFLOW: f64 = 1e-300;

/// Fails unless a spectral defect `mu` (an eigenvalue `1 - mu`) is
/// resolvable at the working precision with guard bits to spare.
pub fn require_resolution(mu: &Real) -> Result<()> {
    if mu.is_zero() {
        return Ok(());
    }
    let need = (-mu.log2_abs()).ceil().max(0.0) as usize + real::GUARD_BITS;
    let have = real::precision_bits();
    if need > have {
        return Err(Error::InsufficientPrecision { need, have });
    }
    Ok(())
}
