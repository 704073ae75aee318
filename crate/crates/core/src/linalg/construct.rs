use super::eigen::eigenvalues;
use super::matrix::Matrix;
use super::operator::{OrthogonalMap, Projection, SymOperator};
use super::real::Real;
use super::vector::Vector;
use super::{GRAM_TOL, UNIT_TOL};
use crate::error::{Error, Result};

/// `v̂ = ⟨·, v⟩ v` for a unit vector `v`.
pub fn rank_one(v: &Vector) -> Result<Projection> {
    let deviation = v.unit_defect();
    if deviation > UNIT_TOL {
        return Err(Error::NonUnitVector { deviation });
    }
    Projection::new(SymOperator::new(Matrix::outer(v, v))?, 1)
}

/// Orthogonal projector onto `span(vs)`.
pub fn projector_onto_span(vs: &[Vector]) -> Result<Projection> {
    let first = vs.first().ok_or_else(|| Error::Precondition("empty spanning set".into()))?;
    let dim = first.dim();
    if let Some(bad) = vs.iter().find(|v| v.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: bad.dim() });
    }
    let k = vs.len();
    let gram = Matrix::from_fn(k, |i, j| vs[i].dot(&vs[j]));
    let smallest = eigenvalues(&SymOperator::new(gram)?).last().cloned().unwrap_or_else(Real::zero);
    if smallest.to_f64() < GRAM_TOL {
        return Err(Error::DegenerateSpan { smallest: smallest.to_f64() });
    }
    let basis = orthonormalize(vs);
    let mut op = Matrix::zeros(dim);
    for b in &basis {
        op = op.add(&Matrix::outer(b, b));
    }
    Projection::new(SymOperator::new(op)?, k)
}

/// Modified Gram-Schmidt with one reorthogonalization pass.
pub fn orthonormalize(vs: &[Vector]) -> Vec<Vector> {
    let mut basis: Vec<Vector> = Vec::with_capacity(vs.len());
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&w);
                w.axpy(&-c, b);
            }
        }
        basis.push(w.normalized());
    }
    basis
}

/// Rotation by `angle` in the oriented `(u, w)` plane, identity on its complement.
pub fn plane_rotation(u: &Vector, w: &Vector, angle: &Real) -> Result<OrthogonalMap> {
    for v in [u, w] {
        let deviation = v.unit_defect();
        if deviation > UNIT_TOL {
            return Err(Error::NonUnitVector { deviation });
        }
    }
    let overlap = u.dot(w).abs().to_f64();
    if overlap > UNIT_TOL {
        return Err(Error::Precondition(format!("rotation plane vectors not orthogonal ({overlap:e})")));
    }
    let dim = u.dim();
    let c1 = angle.cos() - Real::one();
    let s = angle.sin();
    let m = Matrix::identity(dim)
        .add(&Matrix::outer(u, u).add(&Matrix::outer(w, w)).scaled(&c1))
        .add(&Matrix::outer(w, u).sub(&Matrix::outer(u, w)).scaled(&s));
    OrthogonalMap::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::op_norm;

    fn close(m: &Matrix, rows: &[&[f64]], tol: f64) -> bool {
        m.sub(&Matrix::from_rows_f64(rows)).max_abs().to_f64() <= tol
    }

    #[test]
    fn rank_one_basis_vector() {
        let p = rank_one(&Vector::from_f64(&[1.0, 0.0, 0.0])).unwrap();
        assert!(close(p.matrix(), &[&[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0]], 0.0));
        assert_eq!(p.rank(), 1);
    }

    #[test]
    fn rank_one_diagonal_direction() {
        let h = Real::ratio(1, 2).sqrt();
        let p = rank_one(&Vector::new(vec![h.clone(), h])).unwrap();
        assert!(close(p.matrix(), &[&[0.5, 0.5], &[0.5, 0.5]], 1e-30));
    }

    #[test]
    fn rank_one_three_four_five() {
        let v = Vector::new(vec![Real::ratio(3, 5), Real::ratio(4, 5)]);
        let p = rank_one(&v).unwrap();
        assert!(close(p.matrix(), &[&[0.36, 0.48], &[0.48, 0.64]], 1e-15));
    }

    #[test]
    fn rank_one_rejects_non_unit() {
        assert!(matches!(rank_one(&Vector::from_f64(&[1.0, 1.0])), Err(Error::NonUnitVector { .. })));
    }

    #[test]
    fn span_of_coordinate_plane() {
        let p = projector_onto_span(&[Vector::from_f64(&[1.0, 0.0, 0.0]), Vector::from_f64(&[0.0, 1.0, 0.0])]).unwrap();
        assert!(close(p.matrix(), &[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 0.0]], 1e-30));
        assert_eq!(p.rank(), 2);
    }

    #[test]
    fn span_rejects_dependence() {
        let r = projector_onto_span(&[Vector::from_f64(&[1.0, 0.0]), Vector::from_f64(&[1.0, 1e-13])]);
        assert!(matches!(r, Err(Error::DegenerateSpan { .. })));
    }

    #[test]
    fn span_mixed_block() {
        let h = Real::ratio(1, 2).sqrt();
        let a = Vector::new(vec![h.clone(), h, Real::zero()]);
        let b = Vector::from_f64(&[0.0, 0.0, 1.0]);
        let p = projector_onto_span(&[a, b]).unwrap();
        assert!(close(p.matrix(), &[&[0.5, 0.5, 0.0], &[0.5, 0.5, 0.0], &[0.0, 0.0, 1.0]], 1e-30));
    }

    #[test]
    fn rotation_zero_is_identity() {
        let u = Vector::basis(3, 0);
        let w = Vector::basis(3, 2);
        let r = plane_rotation(&u, &w, &Real::zero()).unwrap();
        assert!(r.matrix().sub(&Matrix::identity(3)).max_abs().is_zero());
    }

    #[test]
    fn rotation_quarter_turn() {
        let u = Vector::basis(2, 0);
        let w = Vector::basis(2, 1);
        let r = plane_rotation(&u, &w, &(Real::pi() / Real::from_u64(2))).unwrap();
        assert!(r.apply(&u).sub(&w).max_abs().to_f64() < 1e-100);
        assert!(r.apply(&w).add(&u).max_abs().to_f64() < 1e-100);
    }

    #[test]
    fn rotation_composes_additively() {
        let u = Vector::basis(3, 0);
        let w = Vector::basis(3, 1);
        let sixth = Real::pi() / Real::from_u64(6);
        let third = Real::pi() / Real::from_u64(3);
        let r6 = plane_rotation(&u, &w, &sixth).unwrap();
        let r3 = plane_rotation(&u, &w, &third).unwrap();
        assert!(r6.compose(&r6).matrix().sub(r3.matrix()).max_abs().to_f64() < 1e-100);
    }

    #[test]
    fn rotation_rejects_non_orthogonal() {
        let u = Vector::basis(2, 0);
        let h = Real::ratio(1, 2).sqrt();
        let w = Vector::new(vec![h.clone(), h]);
        assert!(plane_rotation(&u, &w, &Real::one()).is_err());
    }

    #[test]
    fn difference_of_lines_has_norm_sine() {
        let theta = Real::pi() / Real::from_u64(4);
        let e = rank_one(&Vector::from_f64(&[1.0, 0.0])).unwrap();
        let f = rank_one(&Vector::new(vec![theta.cos(), theta.sin()])).unwrap();
        let n = op_norm(&e.op().sub(f.op())).to_f64();
        assert!((n - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((n - 0.70711).abs() < 1e-5);
    }

    #[test]
    fn zero_and_self_difference_norms() {
        assert!(op_norm(&SymOperator::zeros(3)).is_zero());
        let p = rank_one(&Vector::from_f64(&[0.6, 0.8])).unwrap();
        assert!(op_norm(&p.op().sub(p.op())).is_zero());
    }
}
