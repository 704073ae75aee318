use super::eigen::{eigenvalues, op_norm};
use super::matrix::Matrix;
use super::real::Real;
use super::vector::Vector;
use super::{IDEMPOTENCE_TOL, ORTHO_TOL, SPECTRUM_TOL, SYM_TOL, TRACE_TOL};
use crate::error::{Error, Result};

/// Dense real symmetric operator.
#[derive(Clone, Debug, PartialEq)]
pub struct SymOperator {
    m: Matrix,
}

impl SymOperator {
    /// Accepts `m` if its symmetry defect is within 1e-12, then symmetrizes.
    pub fn new(m: Matrix) -> Result<Self> {
        Self::with_tolerance(m, SYM_TOL)
    }

    pub fn with_tolerance(m: Matrix, tol: f64) -> Result<Self> {
        let defect = m.symmetry_defect().to_f64();
        if defect > tol {
            return Err(Error::NotSymmetric { defect });
        }
        Ok(SymOperator { m: m.symmetrized() })
    }

    pub(crate) fn from_symmetric_unchecked(m: Matrix) -> Self {
        SymOperator { m }
    }

    pub fn zeros(dim: usize) -> Self {
        SymOperator { m: Matrix::zeros(dim) }
    }

    pub fn identity(dim: usize) -> Self {
        SymOperator { m: Matrix::identity(dim) }
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn into_matrix(self) -> Matrix {
        self.m
    }

    pub fn add(&self, other: &SymOperator) -> SymOperator {
        SymOperator { m: self.m.add(&other.m) }
    }

    pub fn sub(&self, other: &SymOperator) -> SymOperator {
        SymOperator { m: self.m.sub(&other.m) }
    }

    pub fn scaled(&self, a: &Real) -> SymOperator {
        SymOperator { m: self.m.scaled(a) }
    }

    /// `B A B` for symmetric `B`; symmetric in exact arithmetic.
    pub fn sandwich(&self, outer: &SymOperator) -> SymOperator {
        SymOperator { m: outer.m.mul(&self.m).mul(&outer.m).symmetrized() }
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        self.m.apply(x)
    }

    pub fn norm(&self) -> Real {
        op_norm(self)
    }
}

/// Real orthogonal map `U` with `U Uᵀ = I`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalMap {
    m: Matrix,
}

impl OrthogonalMap {
    pub fn new(m: Matrix) -> Result<Self> {
        let defect = m.mul(&m.transpose()).sub(&Matrix::identity(m.dim())).max_abs().to_f64();
        if defect > ORTHO_TOL {
            return Err(Error::NotOrthogonal { defect });
        }
        Ok(OrthogonalMap { m })
    }

    pub fn identity(dim: usize) -> Self {
        OrthogonalMap { m: Matrix::identity(dim) }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.dim()
    }

    pub fn transpose(&self) -> OrthogonalMap {
        OrthogonalMap { m: self.m.transpose() }
    }

    pub fn compose(&self, inner: &OrthogonalMap) -> OrthogonalMap {
        OrthogonalMap { m: self.m.mul(&inner.m) }
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        self.m.apply(x)
    }

    /// `U A Uᵀ`
    pub fn conjugate(&self, a: &SymOperator) -> SymOperator {
        SymOperator::from_symmetric_unchecked(self.m.mul(a.matrix()).mul(&self.m.transpose()).symmetrized())
    }

    pub fn conjugate_projection(&self, p: &Projection) -> Result<Projection> {
        Projection::new(self.conjugate(p.op()), p.rank())
    }
}

/// Orthogonal projection with its rank.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    op: SymOperator,
    rank: usize,
}

/// Measured deviations from being an orthogonal projection.
#[derive(Clone, Debug, Default)]
pub struct ProjectionDefects {
    pub idempotence: f64,
    pub symmetry: f64,
    pub trace: f64,
    pub spectrum: f64,
}

impl ProjectionDefects {
    pub fn within_tolerances(&self) -> bool {
        self.idempotence <= IDEMPOTENCE_TOL && self.trace <= TRACE_TOL && self.spectrum <= SPECTRUM_TOL
    }
}

/// Idempotence, trace, and spectrum defects of `op` against `rank`.
pub fn projection_defects(op: &SymOperator, rank: usize) -> ProjectionDefects {
    let square = SymOperator::from_symmetric_unchecked(op.matrix().mul(op.matrix()).symmetrized());
    let idempotence = op_norm(&square.sub(op)).to_f64();
    let trace = (op.matrix().trace() - Real::from_u64(rank as u64)).abs().to_f64();
    let one = Real::one();
    let spectrum = eigenvalues(op)
        .iter()
        .map(|l| l.abs().min(&(l - &one).abs()).to_f64())
        .fold(0.0, f64::max);
    ProjectionDefects { idempotence, symmetry: op.matrix().symmetry_defect().to_f64(), trace, spectrum }
}

impl Projection {
    pub fn new(op: SymOperator, rank: usize) -> Result<Self> {
        let d = projection_defects(&op, rank);
        if !d.within_tolerances() {
            return Err(Error::NotProjection(format!(
                "idempotence {:e}, trace {:e}, spectrum {:e} (rank {rank})",
                d.idempotence, d.trace, d.spectrum
            )));
        }
        Ok(Projection { op, rank })
    }

    /// Rank inferred from the rounded trace.
    pub fn from_op(op: SymOperator) -> Result<Self> {
        let t = op.matrix().trace().to_f64();
        if !(t > -0.5) {
            return Err(Error::NotProjection(format!("trace {t}")));
        }
        let rank = t.round() as usize;
        Projection::new(op, rank)
    }

    pub fn zero(dim: usize) -> Self {
        Projection { op: SymOperator::zeros(dim), rank: 0 }
    }

    pub fn op(&self) -> &SymOperator {
        &self.op
    }

    pub fn matrix(&self) -> &Matrix {
        self.op.matrix()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        self.op.apply(x)
    }

    pub fn defects(&self) -> ProjectionDefects {
        projection_defects(&self.op, self.rank)
    }

    /// `op_norm(self - other·self)`; zero iff `self ≤ other`.
    pub fn below_defect(&self, other: &Projection) -> f64 {
        let prod = other.matrix().mul(self.matrix());
        let diff = self.matrix().sub(&prod);
        // diff is not symmetric in general; use ‖D‖² = ‖DᵀD‖
        let gram = SymOperator::from_symmetric_unchecked(diff.transpose().mul(&diff).symmetrized());
        op_norm(&gram).sqrt().to_f64()
    }

    /// Sum of projections onto mutually orthogonal ranges.
    pub fn orthogonal_sum(parts: &[&Projection]) -> Result<Projection> {
        let dim = parts.first().map(|p| p.dim()).ok_or_else(|| Error::Precondition("empty sum".into()))?;
        let mut op = SymOperator::zeros(dim);
        let mut rank = 0;
        for p in parts {
            op = op.add(p.op());
            rank += p.rank();
        }
        Projection::new(op, rank)
    }
}
