//! One block: a pair `(P, Q)` with the plane projection `E = ê + ê'` and a
//! word `A(P, Q, E)` carrying `e` close to `e'`.
//!
//! The targets are the grid lines `f_s` at angles `πs/(2r)`. Each factor
//! `(E (PQP)^{m(s)} E)^{n(s)}` approximates `f̂_s`, and the product of the
//! factors, applied to `e`, walks along the grid toward `e'`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::lemma1::{construct_lemma1_with, target_vector, Lemma1Construction, Lemma1Input, Lemma1Options};
use crate::lemma2::{construct_lemma2, Lemma2Construction, RankOneChain};
use crate::linalg::{op_norm, rank_one, Matrix, Projection, Real, SymOperator, Vector};
use crate::report::Report;
use crate::scalar::strictly_below;
use crate::wordexpr::{Alphabet, BigExponent, Letters, SpectralEvaluator, Symbol, WordExpr};

/// Local coordinates of a block of dimension `2r + 3`: `e = 0`, `e' = 1`,
/// `p_s = 2 + s` for `s = 0..=r`, `p'_s = r + 2 + s` for `s = 1..=r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockFrame {
    pub r: usize,
}

impl BlockFrame {
    pub fn new(r: usize) -> Self {
        BlockFrame { r }
    }

    pub fn dim(&self) -> usize {
        2 * self.r + 3
    }

    pub fn e(&self) -> Vector {
        Vector::basis(self.dim(), 0)
    }

    pub fn e_prime(&self) -> Vector {
        Vector::basis(self.dim(), 1)
    }

    pub fn chain_ancillas(&self) -> Vec<Vector> {
        (0..=self.r).map(|s| Vector::basis(self.dim(), 2 + s)).collect()
    }

    pub fn q_ancillas(&self) -> Vec<Vector> {
        (1..=self.r).map(|s| Vector::basis(self.dim(), self.r + 2 + s)).collect()
    }
}

/// Smallest `r ≥ 1` with `cos(π/2r)^r > 1 - ε/2`.
pub fn choose_r(epsilon: f64) -> usize {
    let target = Real::from_f64(1.0 - epsilon / 2.0);
    let value = |r: usize| (Real::pi() / Real::from_u64(2 * r as u64)).cos().powu(r as u64);
    let passes = |r: usize| strictly_below(&target, &value(r));
    // cos(π/2r)^r ≈ exp(-π²/8r)
    let t = 1.0 - epsilon / 2.0;
    let estimate = if t > 0.0 && t < 1.0 { (std::f64::consts::PI.powi(2) / 8.0 / -t.ln()).floor() } else { 1.0 };
    let mut r = (estimate.max(1.0) as usize).min(1 << 20);
    while r > 1 && passes(r - 1) {
        r -= 1;
    }
    while !passes(r) {
        r += 1;
    }
    r
}

/// Grid angles `πs/(2r)`, `s = 0..=r`.
pub fn grid_targets(r: usize) -> Vec<Real> {
    let den = Real::from_u64(2 * r as u64);
    (0..=r).map(|s| Real::pi() * Real::from_u64(s as u64) / &den).collect()
}

/// `cos(π/2r)^r`, the overlap `⟨f̂_r ⋯ f̂_0 e, e'⟩` along the grid.
pub fn chain_overlap(r: usize) -> Real {
    (Real::pi() / Real::from_u64(2 * r as u64)).cos().powu(r as u64)
}

/// `(E (PQP)^m E)^n` as a word.
pub fn factor_word(m: &BigExponent, n: &BigExponent) -> WordExpr {
    let pqp = WordExpr::concat(vec![WordExpr::letter(Symbol::P), WordExpr::letter(Symbol::Q), WordExpr::letter(Symbol::P)]);
    let e = WordExpr::letter(Symbol::E);
    WordExpr::power(WordExpr::concat(vec![e.clone(), WordExpr::power(pqp, m.clone()), e]), n.clone())
}

/// Product of the factors with `s = r` leftmost and `s = 0` acting first.
pub fn block_word(pairs: &[(BigExponent, BigExponent)]) -> WordExpr {
    WordExpr::concat(pairs.iter().rev().map(|(m, n)| factor_word(m, n)).collect())
}

pub fn block_letters(p: &Projection, q: &Projection, e: &Projection) -> Letters {
    BTreeMap::from([(Symbol::P, p.clone()), (Symbol::Q, q.clone()), (Symbol::E, e.clone())])
}

#[derive(Clone, Debug)]
pub struct Corollary3Input {
    pub e: Vector,
    pub e_prime: Vector,
    pub target_angles: Vec<Real>,
    pub epsilon: f64,
    /// `p_0, …, p_r` for the chain.
    pub chain_ancillas: Vec<Vector>,
    /// `p'_1, …, p'_r` for `Q`.
    pub q_ancillas: Vec<Vector>,
}

impl Corollary3Input {
    pub fn on_frame(frame: BlockFrame, target_angles: Vec<Real>, epsilon: f64) -> Self {
        Corollary3Input {
            e: frame.e(),
            e_prime: frame.e_prime(),
            target_angles,
            epsilon,
            chain_ancillas: frame.chain_ancillas(),
            q_ancillas: frame.q_ancillas(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Corollary3Options {
    /// Fixes the chain-to-`Q` tolerance and disables refinement.
    pub epsilon1_override: Option<f64>,
    pub max_refinements: u32,
    pub lemma1: Lemma1Options,
}

impl Default for Corollary3Options {
    fn default() -> Self {
        Corollary3Options { epsilon1_override: None, max_refinements: 20, lemma1: Lemma1Options::default() }
    }
}

#[derive(Clone, Debug)]
pub struct Corollary3 {
    pub lemma1: Lemma1Construction,
    pub lemma2: Lemma2Construction,
    pub chain: RankOneChain,
    pub p: Projection,
    pub q: Projection,
    pub e: Projection,
    /// `(m(s), n(s))` for `s = 0..=r`.
    pub exponent_pairs: Vec<(BigExponent, BigExponent)>,
    pub achieved_errors: Vec<Real>,
    pub epsilon: f64,
    pub epsilon1: f64,
    pub refinements: u32,
}

/// `‖(E (PQP)^m E)^n - f̂‖` for every pair, sharing eigendecompositions.
pub fn factor_errors(
    p: &Projection,
    q: &Projection,
    e: &Projection,
    pairs: &[(BigExponent, BigExponent)],
    targets: &[Vector],
) -> Result<Vec<Real>> {
    let letters = block_letters(p, q, e);
    let mut ev = SpectralEvaluator::new(&letters);
    pairs
        .iter()
        .zip(targets)
        .map(|((m, n), f)| {
            let dense = ev.materialize(&factor_word(m, n))?;
            let f_hat = rank_one(f)?;
            Ok(op_norm(&SymOperator::new(dense)?.sub(f_hat.op())))
        })
        .collect()
}

pub fn construct_corollary3(input: &Corollary3Input, opts: &Corollary3Options) -> Result<Corollary3> {
    let lemma1 = construct_lemma1_with(
        &Lemma1Input {
            e: input.e.clone(),
            e_prime: input.e_prime.clone(),
            target_angles: input.target_angles.clone(),
            epsilon: input.epsilon / 2.0,
            ancillas: input.chain_ancillas.clone(),
        },
        &opts.lemma1,
    )?;
    let chain = RankOneChain::from_lemma1(&lemma1);
    let largest = lemma1.n.iter().max().expect("nonempty").to_real().to_f64();
    let (mut epsilon1, attempts) = match opts.epsilon1_override {
        Some(x) => (x, 1),
        None => (input.epsilon / (4.0 * largest), opts.max_refinements + 1),
    };
    let bound = Real::from_f64(input.epsilon);
    let mut residuals = Vec::new();
    for attempt in 0..attempts {
        let lemma2 = construct_lemma2(&chain, epsilon1, &input.q_ancillas)?;
        let pairs: Vec<(BigExponent, BigExponent)> =
            lemma2.m.iter().cloned().zip(lemma1.n.iter().cloned()).collect();
        let errors = factor_errors(chain.top(), &lemma2.q, &lemma1.e_proj, &pairs, &lemma1.targets)?;
        if errors.iter().all(|x| strictly_below(x, &bound)) {
            return Ok(Corollary3 {
                p: chain.top().clone(),
                q: lemma2.q.clone(),
                e: lemma1.e_proj.clone(),
                exponent_pairs: pairs,
                achieved_errors: errors,
                epsilon: input.epsilon,
                epsilon1,
                refinements: attempt,
                lemma1,
                lemma2,
                chain,
            });
        }
        residuals = errors.iter().map(Real::to_f64).collect();
        epsilon1 /= 2.0;
    }
    Err(Error::Corollary3RefinementFailed { attempts, residuals })
}

#[derive(Clone, Debug)]
pub struct BlockMonomial {
    pub r: usize,
    pub eps: f64,
    /// Per-factor tolerance `ε / (2(r + 1))`.
    pub epsilon2: f64,
    pub frame: BlockFrame,
    pub p: Projection,
    pub q: Projection,
    pub e: Projection,
    pub exponent_pairs: Vec<(BigExponent, BigExponent)>,
    pub word: WordExpr,
    /// `⟨A e, e'⟩`.
    pub eta: Real,
    pub image_norm: Real,
    pub construction: Corollary3,
}

impl BlockMonomial {
    pub fn letters(&self) -> Letters {
        block_letters(&self.p, &self.q, &self.e)
    }
}

#[derive(Clone, Debug, Default)]
pub struct MonomialOptions {
    pub corollary3: Corollary3Options,
    /// Overrides the grid size chosen from `ε`.
    pub r_override: Option<usize>,
}

pub fn construct_lemma4(epsilon: f64, opts: &MonomialOptions) -> Result<BlockMonomial> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::EpsOutOfRange(epsilon));
    }
    let r = opts.r_override.unwrap_or_else(|| choose_r(epsilon));
    if r == 0 {
        return Err(Error::Precondition("grid needs r >= 1".into()));
    }
    let frame = BlockFrame::new(r);
    let epsilon2 = epsilon / (2.0 * (r as f64 + 1.0));
    let input = Corollary3Input::on_frame(frame, grid_targets(r), epsilon2);
    let cor = construct_corollary3(&input, &opts.corollary3)?;
    let word = block_word(&cor.exponent_pairs);
    let letters = block_letters(&cor.p, &cor.q, &cor.e);
    let image = SpectralEvaluator::new(&letters).apply(&word, &frame.e())?;
    let eta = image.dot(&frame.e_prime());
    Ok(BlockMonomial {
        r,
        eps: epsilon,
        epsilon2,
        frame,
        p: cor.p.clone(),
        q: cor.q.clone(),
        e: cor.e.clone(),
        exponent_pairs: cor.exponent_pairs.clone(),
        word,
        eta,
        image_norm: image.norm(),
        construction: cor,
    })
}

/// Independent recheck of a block: factor fidelity, overlap and structure.
pub fn verify_block(b: &BlockMonomial) -> Report {
    let mut rep = Report::new("block");
    let targets: Vec<Vector> =
        grid_targets(b.r).iter().map(|t| target_vector(&b.frame.e(), &b.frame.e_prime(), t)).collect();
    match factor_errors(&b.p, &b.q, &b.e, &b.exponent_pairs, &targets) {
        Ok(errs) => {
            for (s, x) in errs.iter().enumerate() {
                rep.below(format!("factor[{s}]"), x.to_f64(), b.epsilon2);
            }
        }
        Err(e) => {
            rep.flag("factor", false).note(e.to_string());
        }
    }
    // dense product of the factors, independent of vector evaluation
    let letters = b.letters();
    let mut ev = SpectralEvaluator::new(&letters);
    match ev.materialize(&b.word) {
        Ok(a) => {
            let eta = a.apply(&b.frame.e()).dot(&b.frame.e_prime());
            rep.at_most("eta_recomputed", (&eta - &b.eta).abs().to_f64(), 1e-10);
        }
        Err(e) => {
            rep.flag("eta_recomputed", false).note(e.to_string());
        }
    }
    rep.below("eta_lower_bound", 1.0 - b.eps, b.eta.to_f64());
    rep.at_most("contraction", b.image_norm.to_f64(), 1.0 + 1e-10);
    let chain_ok = (0..=b.r).fold(b.frame.e(), |x, s| {
        let f = target_vector(&b.frame.e(), &b.frame.e_prime(), &grid_targets(b.r)[s]);
        f.scaled(&f.dot(&x))
    });
    let law = (&chain_ok.dot(&b.frame.e_prime()) - &chain_overlap(b.r)).abs().to_f64();
    rep.at_most("grid_overlap_law", law, 1e-12);
    rep.flag("alphabet", b.word.check_alphabet(Alphabet::Block).is_ok());
    let plane = Matrix::outer(&b.frame.e(), &b.frame.e()).add(&Matrix::outer(&b.frame.e_prime(), &b.frame.e_prime()));
    rep.at_most("plane_projection", b.e.matrix().sub(&plane).max_abs().to_f64(), 1e-12);
    rep
}
