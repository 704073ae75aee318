//! Nested chains `P_0 ≤ … ≤ P_r` whose compressions `(E P_s E)^{n(s)}`
//! approximate prescribed lines `f̂_s` inside the plane of `E = ê + ê'`.
//!
//! Stage `s` rotates the complement `f'_s` of `f_s` toward the ancilla
//! `p_s` by a small angle `α_s`. For that stage alone the error is exactly
//! `cos^{2n} α_s`; the angle is shrunk until every earlier stage still meets
//! the tightened budget `(1 - 2^{-(s+1)}) ε`.

use crate::error::{Error, Result};
use crate::linalg::{
    op_norm, plane_rotation, rank_one, spectral_power, Matrix, OrthogonalMap, Projection, Real, SymOperator,
    Vector, ORTHO_TOL,
};
use crate::report::Report;
use crate::scalar::strictly_below;
use crate::wordexpr::BigExponent;

pub use crate::scalar::minimal_power;

const PLANE_TOL: f64 = 1e-10;
const NESTING_TOL: f64 = 1e-9;

/// `10^60`, the largest exponent accepted by default.
pub fn default_exponent_cap() -> BigExponent {
    BigExponent::from_decimal(&format!("1{}", "0".repeat(60))).expect("literal")
}

#[derive(Clone, Debug)]
pub struct Lemma1Input {
    pub e: Vector,
    pub e_prime: Vector,
    /// Target angles `θ_s ∈ [0, π/2]`, `f_s = e cos θ_s + e' sin θ_s`.
    pub target_angles: Vec<Real>,
    pub epsilon: f64,
    /// `p_0, …, p_r`, orthonormal and orthogonal to `e, e'`.
    pub ancillas: Vec<Vector>,
}

#[derive(Clone, Debug)]
pub struct Lemma1Options {
    pub exponent_cap: BigExponent,
    pub max_halvings: usize,
}

impl Default for Lemma1Options {
    fn default() -> Self {
        Lemma1Options { exponent_cap: default_exponent_cap(), max_halvings: 60 }
    }
}

#[derive(Clone, Debug)]
pub struct Lemma1Construction {
    pub alphas: Vec<Real>,
    pub n: Vec<BigExponent>,
    pub chain: Vec<Projection>,
    /// `d_s` with `P_s - P_{s-1} = d̂_s`, for `s = 1..=r`.
    pub increment_dirs: Vec<Vector>,
    pub achieved_errors: Vec<Real>,
    pub e_proj: Projection,
    pub targets: Vec<Vector>,
    pub complements: Vec<Vector>,
    pub epsilon: f64,
}

impl Lemma1Construction {
    pub fn r(&self) -> usize {
        self.chain.len() - 1
    }
}

/// Unit vector `f'` with `f̂ + f̂' = E`, the `+π/2` turn of `f` in the
/// oriented `(e, e')` plane.
pub fn complement_in_plane(f: &Vector, e: &Vector, e_prime: &Vector) -> Result<Vector> {
    let a = f.dot(e);
    let b = f.dot(e_prime);
    let mut in_plane = e.scaled(&a);
    in_plane.axpy(&b, e_prime);
    let residual = f.sub(&in_plane).norm().to_f64();
    if residual > PLANE_TOL {
        return Err(Error::OutsidePlane { residual });
    }
    let deviation = f.unit_defect();
    if deviation > crate::linalg::UNIT_TOL {
        return Err(Error::NonUnitVector { deviation });
    }
    let mut out = e_prime.scaled(&a);
    out.axpy(&-b, e);
    Ok(out)
}

/// `f = e cos θ + e' sin θ`.
pub fn target_vector(e: &Vector, e_prime: &Vector, theta: &Real) -> Vector {
    let mut f = e.scaled(&theta.cos());
    f.axpy(&theta.sin(), e_prime);
    f
}

/// `‖(E P E)^n - f̂‖`.
pub fn compression_error(e_proj: &Projection, p: &Matrix, n: &BigExponent, f_hat: &Projection) -> Result<Real> {
    let epe = e_proj.matrix().mul(p).mul(e_proj.matrix());
    let powered = spectral_power(&SymOperator::new(epe)?, n)?;
    Ok(op_norm(&powered.sub(f_hat.op())))
}

/// Error of a single stage in isolation: `‖(E U P U* E)^n - f̂_s‖` with
/// `P = E + p̂_0 + … + p̂_{s-1}` and `U` the rotation of `f'_s` toward `p_s`.
pub fn single_stage_error(input: &Lemma1Input, s: usize, alpha: &Real, n: &BigExponent) -> Result<Real> {
    let e_proj = plane_projection(input)?;
    let f = target_vector(&input.e, &input.e_prime, &input.target_angles[s]);
    let f_prime = complement_in_plane(&f, &input.e, &input.e_prime)?;
    let u = plane_rotation(&f_prime, &input.ancillas[s], alpha)?;
    let base = stage_base(&e_proj, &input.ancillas, s);
    let rotated = u.conjugate(&SymOperator::new(base)?);
    compression_error(&e_proj, rotated.matrix(), n, &rank_one(&f)?)
}

fn plane_projection(input: &Lemma1Input) -> Result<Projection> {
    let op = SymOperator::new(Matrix::outer(&input.e, &input.e).add(&Matrix::outer(&input.e_prime, &input.e_prime)))?;
    Projection::new(op, 2)
}

/// `E + p̂_0 + … + p̂_{s-1}`.
fn stage_base(e_proj: &Projection, ancillas: &[Vector], s: usize) -> Matrix {
    ancillas[..s].iter().fold(e_proj.matrix().clone(), |m, p| m.add(&Matrix::outer(p, p)))
}

fn validate(input: &Lemma1Input) -> Result<()> {
    if !(input.epsilon > 0.0 && input.epsilon < 1.0) {
        return Err(Error::EpsOutOfRange(input.epsilon));
    }
    if input.target_angles.is_empty() {
        return Err(Error::Precondition("no target angles".into()));
    }
    let r = input.target_angles.len() - 1;
    if input.ancillas.len() != r + 1 {
        return Err(Error::Precondition(format!("need {} ancillas, got {}", r + 1, input.ancillas.len())));
    }
    let half_pi = Real::pi().ldexp(-1).to_f64();
    for t in &input.target_angles {
        let t = t.to_f64();
        if !(t >= -1e-15 && t <= half_pi + 1e-15) {
            return Err(Error::AngleOutOfRange(t));
        }
    }
    let dim = input.e.dim();
    let mut all = vec![&input.e, &input.e_prime];
    all.extend(input.ancillas.iter());
    for v in &all {
        if v.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: v.dim() });
        }
    }
    for (i, a) in all.iter().enumerate() {
        for (j, b) in all.iter().enumerate().skip(i) {
            let want = if i == j { 1.0 } else { 0.0 };
            let defect = (a.dot(b).to_f64() - want).abs();
            if defect > ORTHO_TOL {
                return Err(Error::Precondition(format!("frame vectors {i}, {j} not orthonormal ({defect:e})")));
            }
        }
    }
    Ok(())
}

pub fn construct_lemma1(input: &Lemma1Input) -> Result<Lemma1Construction> {
    construct_lemma1_with(input, &Lemma1Options::default())
}

pub fn construct_lemma1_with(input: &Lemma1Input, opts: &Lemma1Options) -> Result<Lemma1Construction> {
    validate(input)?;
    let r = input.target_angles.len() - 1;
    let eps = Real::from_f64(input.epsilon);
    let e_proj = plane_projection(input)?;
    let targets: Vec<Vector> =
        input.target_angles.iter().map(|t| target_vector(&input.e, &input.e_prime, t)).collect();
    let complements =
        targets.iter().map(|f| complement_in_plane(f, &input.e, &input.e_prime)).collect::<Result<Vec<_>>>()?;
    let target_projs = targets.iter().map(rank_one).collect::<Result<Vec<_>>>()?;
    let quarter = Real::pi().ldexp(-2);

    let mut alphas: Vec<Real> = Vec::with_capacity(r + 1);
    let mut n: Vec<BigExponent> = Vec::with_capacity(r + 1);
    let mut rotations: Vec<OrthogonalMap> = Vec::with_capacity(r + 1);
    let mut current: Vec<Matrix> = Vec::with_capacity(r + 1);

    for s in 0..=r {
        let budget = &eps * &(Real::one() - Real::one().ldexp(-(s as i32 + 1)));
        let mut alpha = match alphas.last() {
            None => quarter.clone(),
            Some(prev) => prev.min(&quarter).ldexp(-1),
        };
        let mut halvings = 0;
        let (u, conjugated) = loop {
            let u = plane_rotation(&complements[s], &input.ancillas[s], &alpha)?;
            let conjugated: Vec<Matrix> =
                current.iter().map(|m| u.conjugate(&SymOperator::from_symmetric_unchecked(m.clone())).into_matrix()).collect();
            let mut residuals = Vec::with_capacity(s);
            for (t, m) in conjugated.iter().enumerate() {
                residuals.push(compression_error(&e_proj, m, &n[t], &target_projs[t])?);
            }
            if residuals.iter().all(|x| strictly_below(x, &budget)) {
                break (u, conjugated);
            }
            halvings += 1;
            if halvings > opts.max_halvings {
                return Err(Error::Lemma1AngleSearchFailed {
                    stage: s,
                    residuals: residuals.iter().map(Real::to_f64).collect(),
                });
            }
            alpha = alpha.ldexp(-1);
        };
        let mut ns = minimal_power(&alpha, &budget)?;
        if let Some(prev) = n.last() {
            ns = ns.max(prev.clone());
        }
        if ns > opts.exponent_cap {
            return Err(Error::ExponentCapExceeded { value: ns.to_string(), cap: opts.exponent_cap.to_string() });
        }
        let base = SymOperator::from_symmetric_unchecked(stage_base(&e_proj, &input.ancillas, s));
        current = conjugated;
        current.push(u.conjugate(&base).into_matrix());
        alphas.push(alpha);
        n.push(ns);
        rotations.push(u);
    }

    let chain = current
        .into_iter()
        .enumerate()
        .map(|(s, m)| Projection::new(SymOperator::new(m)?, s + 2))
        .collect::<Result<Vec<_>>>()?;
    let increment_dirs = (1..=r)
        .map(|s| rotations[s - 1..].iter().fold(input.ancillas[s - 1].clone(), |v, u| u.apply(&v)))
        .collect();
    let achieved_errors = (0..=r)
        .map(|s| compression_error(&e_proj, chain[s].matrix(), &n[s], &target_projs[s]))
        .collect::<Result<Vec<_>>>()?;
    if let Some((s, err)) = achieved_errors.iter().enumerate().find(|(_, x)| !strictly_below(x, &eps)) {
        return Err(Error::SelfCheck(format!("lemma1 stage {s} error {:e} not below {}", err.to_f64(), input.epsilon)));
    }
    Ok(Lemma1Construction {
        alphas,
        n,
        chain,
        increment_dirs,
        achieved_errors,
        e_proj,
        targets,
        complements,
        epsilon: input.epsilon,
    })
}

/// Recomputes every approximation error and structural property.
pub fn verify_lemma1(c: &Lemma1Construction, targets: &[Vector]) -> Report {
    let mut rep = Report::new("lemma1");
    let r = c.chain.len().saturating_sub(1);
    if targets.len() != c.chain.len() || c.n.len() != c.chain.len() {
        rep.flag("shape", false).note(format!("{} targets, {} exponents, {} chain members", targets.len(), c.n.len(), c.chain.len()));
        return rep;
    }
    for s in 0..=r {
        let name = format!("approximation[{s}]");
        let err = rank_one(&targets[s])
            .and_then(|f| compression_error(&c.e_proj, c.chain[s].matrix(), &c.n[s], &f));
        match err {
            Ok(x) => {
                rep.below(name, x.to_f64(), c.epsilon);
            }
            Err(e) => {
                rep.flag(name, false).note(e.to_string());
            }
        }
    }
    for s in 1..=r {
        rep.at_most(format!("nesting[{s}]"), c.chain[s - 1].below_defect(&c.chain[s]), NESTING_TOL);
    }
    for (s, p) in c.chain.iter().enumerate() {
        let d = p.defects();
        let rank_ok = p.rank() == s + 2;
        rep.flag(format!("rank[{s}]"), rank_ok && d.trace <= crate::linalg::TRACE_TOL)
            .note(format!("rank {} trace defect {:e}", p.rank(), d.trace));
        rep.at_most(format!("idempotence[{s}]"), d.idempotence, crate::linalg::IDEMPOTENCE_TOL);
    }
    rep.flag("exponents_nondecreasing", c.n.windows(2).all(|w| w[0] <= w[1]));
    rep
}
