//! Given a chain `P_0 ≤ … ≤ P_r` with rank-one increments `d̂_s`, build a
//! projection `Q` and exponents `m(0) > … > m(r) = 1` so that powers of
//! `P_r Q P_r` approximate every member of the chain.
//!
//! `Q = P_0 + Σ q̂_s` with `q_s = d_s cos β_s + p'_s sin β_s`, so that
//! `P_r Q P_r = P_0 + Σ cos²β_s d̂_s` and all estimates reduce to scalars.

use crate::error::{Error, Result};
use crate::lemma1::Lemma1Construction;
use crate::linalg::{
    op_norm, require_resolution, sym_eig, Matrix, Projection, Real, SymOperator, Vector, ORTHO_TOL,
};
use crate::report::Report;
use crate::scalar::{cos_power, cos_power_defect, minimal_power, strictly_below};
use crate::wordexpr::BigExponent;

/// Safety factor applied to `ε` in every scalar condition.
pub const MARGIN: f64 = 1e-3;

const DECOMPOSITION_TOL: f64 = 1e-9;
const IDENTITY_TOL: f64 = 1e-9;
const ANCILLA_TOL: f64 = 1e-10;

/// Chain members together with the unit increments `d_s`, `P_s - P_{s-1} = d̂_s`.
#[derive(Clone, Debug)]
pub struct RankOneChain {
    pub members: Vec<Projection>,
    pub increments: Vec<Vector>,
}

impl RankOneChain {
    pub fn new(members: Vec<Projection>, increments: Vec<Vector>) -> Result<Self> {
        if members.is_empty() || increments.len() + 1 != members.len() {
            return Err(Error::Precondition("chain needs r+1 members and r increments".into()));
        }
        for (s, d) in increments.iter().enumerate() {
            let diff = members[s + 1].matrix().sub(members[s].matrix());
            let defect = diff.sub(&Matrix::outer(d, d)).max_abs().to_f64();
            if defect > DECOMPOSITION_TOL {
                return Err(Error::Precondition(format!("increment {} is not rank one ({defect:e})", s + 1)));
            }
        }
        Ok(RankOneChain { members, increments })
    }

    pub fn from_lemma1(c: &Lemma1Construction) -> Self {
        RankOneChain { members: c.chain.clone(), increments: c.increment_dirs.clone() }
    }

    pub fn r(&self) -> usize {
        self.increments.len()
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn base(&self) -> &Projection {
        &self.members[0]
    }

    pub fn top(&self) -> &Projection {
        self.members.last().expect("nonempty chain")
    }
}

#[derive(Clone, Debug)]
pub struct Lemma2Options {
    pub max_halvings: usize,
}

impl Default for Lemma2Options {
    fn default() -> Self {
        Lemma2Options { max_halvings: 400 }
    }
}

#[derive(Clone, Debug)]
pub struct Lemma2Construction {
    /// `β_1, …, β_r` (index `t - 1` holds `β_t`).
    pub betas: Vec<Real>,
    pub m: Vec<BigExponent>,
    pub q: Projection,
    pub qs: Vec<Vector>,
    pub ancillas: Vec<Vector>,
    pub achieved_errors: Vec<Real>,
    pub epsilon: f64,
}

impl Lemma2Construction {
    pub fn r(&self) -> usize {
        self.betas.len()
    }

    pub fn beta(&self, t: usize) -> &Real {
        &self.betas[t - 1]
    }
}

/// `max(max_{1≤t≤s} (1 - cos^{2m}β_t), max_{t>s} cos^{2m}β_t)`, the exact
/// norm of `(P_r Q P_r)^m - P_s`.
pub fn closed_form_error(betas: &[Real], m: &BigExponent, s: usize) -> Real {
    let mut worst = Real::zero();
    for (i, b) in betas.iter().enumerate() {
        let t = i + 1;
        let term = if t <= s { cos_power_defect(b, m) } else { cos_power(b, m) };
        worst = worst.max(&term);
    }
    worst
}

/// `P_0 + Σ q̂_t` for the given angles.
pub fn assemble_q(chain: &RankOneChain, betas: &[Real], ancillas: &[Vector]) -> Result<(Projection, Vec<Vector>)> {
    let mut op = chain.base().matrix().clone();
    let mut qs = Vec::with_capacity(betas.len());
    for ((d, a), b) in chain.increments.iter().zip(ancillas).zip(betas) {
        let mut q = d.scaled(&b.cos());
        q.axpy(&b.sin(), a);
        op = op.add(&Matrix::outer(&q, &q));
        qs.push(q);
    }
    let rank = chain.base().rank() + betas.len();
    Ok((Projection::new(SymOperator::new(op)?, rank)?, qs))
}

fn validate(chain: &RankOneChain, epsilon: f64, ancillas: &[Vector]) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::EpsOutOfRange(epsilon));
    }
    if ancillas.len() != chain.r() {
        return Err(Error::Precondition(format!("need {} ancillas, got {}", chain.r(), ancillas.len())));
    }
    let top = chain.top();
    for (i, a) in ancillas.iter().enumerate() {
        if a.dim() != chain.dim() {
            return Err(Error::DimensionMismatch { expected: chain.dim(), got: a.dim() });
        }
        let inside = top.apply(a).norm().to_f64();
        if inside > ANCILLA_TOL {
            return Err(Error::Precondition(format!("ancilla {} not orthogonal to the chain ({inside:e})", i + 1)));
        }
        for (j, b) in ancillas.iter().enumerate().skip(i) {
            let want = if i == j { 1.0 } else { 0.0 };
            let defect = (a.dot(b).to_f64() - want).abs();
            if defect > ORTHO_TOL {
                return Err(Error::Precondition(format!("ancillas {}, {} not orthonormal ({defect:e})", i + 1, j + 1)));
            }
        }
    }
    Ok(())
}

pub fn construct_lemma2(chain: &RankOneChain, epsilon: f64, ancillas: &[Vector]) -> Result<Lemma2Construction> {
    construct_lemma2_with(chain, epsilon, ancillas, &Lemma2Options::default())
}

pub fn construct_lemma2_with(
    chain: &RankOneChain,
    epsilon: f64,
    ancillas: &[Vector],
    opts: &Lemma2Options,
) -> Result<Lemma2Construction> {
    validate(chain, epsilon, ancillas)?;
    let r = chain.r();
    let eps = Real::from_f64(epsilon * (1.0 - MARGIN));

    // downward induction, betas filled from index r to 1
    let mut betas_rev: Vec<Real> = Vec::with_capacity(r);
    let mut m_rev: Vec<BigExponent> = vec![BigExponent::one()];
    if r >= 1 {
        let mut beta = Real::pi().ldexp(-2);
        let one = BigExponent::one();
        let mut halvings = 0;
        while !strictly_below(&cos_power_defect(&beta, &one), &eps) {
            halvings += 1;
            if halvings > opts.max_halvings {
                return Err(Error::Lemma2AngleSearchFailed { index: r });
            }
            beta = beta.ldexp(-1);
        }
        betas_rev.push(beta);
        for s in (2..=r).rev() {
            let beta_s = betas_rev.last().expect("seeded").clone();
            let m_prev = m_rev.last().expect("seeded").clone();
            let mut m = minimal_power(&beta_s, &eps)?;
            if m <= m_prev {
                m = m_prev.add_u64(1);
            }
            let mut beta = beta_s.ldexp(-1);
            let mut halvings = 1;
            while !strictly_below(&cos_power_defect(&beta, &m), &eps) {
                halvings += 1;
                if halvings > opts.max_halvings {
                    return Err(Error::Lemma2AngleSearchFailed { index: s - 1 });
                }
                beta = beta.ldexp(-1);
            }
            m_rev.push(m);
            betas_rev.push(beta);
        }
        let beta_1 = betas_rev.last().expect("seeded");
        require_resolution(&beta_1.sin().square())?;
        let m_1 = m_rev.last().expect("seeded").clone();
        let mut m0 = minimal_power(beta_1, &eps)?;
        if m0 <= m_1 {
            m0 = m_1.add_u64(1);
        }
        m_rev.push(m0);
    }
    let betas: Vec<Real> = betas_rev.into_iter().rev().collect();
    let m: Vec<BigExponent> = m_rev.into_iter().rev().collect();
    let (q, qs) = assemble_q(chain, &betas, ancillas)?;
    let achieved_errors: Vec<Real> = (0..=r).map(|s| closed_form_error(&betas, &m[s], s)).collect();
    let bound = Real::from_f64(epsilon);
    if let Some((s, err)) = achieved_errors.iter().enumerate().find(|(_, x)| !strictly_below(x, &bound)) {
        return Err(Error::SelfCheck(format!("lemma2 index {s} error {:e} not below {epsilon}", err.to_f64())));
    }
    Ok(Lemma2Construction { betas, m, q, qs, ancillas: ancillas.to_vec(), achieved_errors, epsilon })
}

/// `P_r Q P_r`.
pub fn compressed_q(chain: &RankOneChain, q: &Projection) -> Result<SymOperator> {
    let top = chain.top().matrix();
    SymOperator::new(top.mul(q.matrix()).mul(top))
}

/// Dense recomputation of the approximation errors and all scalar laws.
pub fn verify_lemma2(c: &Lemma2Construction, chain: &RankOneChain) -> Report {
    let mut rep = Report::new("lemma2");
    let r = chain.r();
    if c.r() != r || c.m.len() != r + 1 {
        rep.flag("shape", false).note(format!("chain r = {r}, construction r = {}", c.r()));
        return rep;
    }
    let eps = c.epsilon;
    let compressed = match compressed_q(chain, &c.q) {
        Ok(op) => op,
        Err(e) => {
            rep.flag("compressed_q", false).note(e.to_string());
            return rep;
        }
    };
    let eig = sym_eig(&compressed);
    for s in 0..=r {
        let powered = match eig.power(&c.m[s]) {
            Ok(p) => p.op,
            Err(e) => {
                rep.flag(format!("approximation[{s}]"), false).note(e.to_string());
                continue;
            }
        };
        let dense = op_norm(&powered.sub(chain.members[s].op()));
        let clause = rep.below(format!("approximation[{s}]"), dense.to_f64(), eps);
        if s == 0 {
            clause.note("index 0 is checked in addition to 1..r; the bottom exponent m(0) is consumed downstream");
        }
        let closed = closed_form_error(&c.betas, &c.m[s], s);
        rep.at_most(format!("error_identity[{s}]"), (&dense - &closed).abs().to_f64(), IDENTITY_TOL);
        let mut model = chain.base().matrix().clone();
        for (t, d) in chain.increments.iter().enumerate() {
            model = model.add(&Matrix::outer(d, d).scaled(&cos_power(&c.betas[t], &c.m[s])));
        }
        rep.at_most(format!("decomposition[{s}]"), powered.matrix().sub(&model).max_abs().to_f64(), DECOMPOSITION_TOL);
    }
    let bound = Real::from_f64(eps);
    let mut keep = Real::zero();
    let mut kill = Real::zero();
    for s in 1..=r {
        for t in s..=r {
            keep = keep.max(&cos_power_defect(c.beta(s), &c.m[t]));
        }
    }
    for s in 0..=r {
        for t in s + 1..=r {
            kill = kill.max(&cos_power(c.beta(t), &c.m[s]));
        }
    }
    rep.flag("keep_conditions", strictly_below(&keep, &bound)).note(format!("max {:e}", keep.to_f64()));
    rep.flag("kill_conditions", strictly_below(&kill, &bound)).note(format!("max {:e}", kill.to_f64()));
    rep.flag("exponents_decreasing", c.m.windows(2).all(|w| w[0] > w[1]) && c.m[r] == BigExponent::one());
    rep.flag("angles_increasing", c.betas.windows(2).all(|w| w[0] < w[1]));
    let d = c.q.defects();
    rep.at_most("q_idempotence", d.idempotence, crate::linalg::IDEMPOTENCE_TOL);
    rep.at_most("q_trace", d.trace, crate::linalg::TRACE_TOL);
    match assemble_q(chain, &c.betas, &c.ancillas) {
        Ok((q, _)) => {
            rep.at_most("q_decomposition", q.matrix().sub(c.q.matrix()).max_abs().to_f64(), 1e-12);
        }
        Err(e) => {
            rep.flag("q_decomposition", false).note(e.to_string());
        }
    }
    rep
}
