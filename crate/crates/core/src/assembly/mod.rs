//! Glue `K` blocks into one space, build the five global projections, and
//! follow the checkpoint trajectory `x_k = A_k x_{k-1}` from `x_0 = e_1`.
//!
//! Even blocks contribute to `P, Q`, odd blocks to `R, S`; `E` is the sum
//! of all marker lines. Each block's word acts on its own coordinates and
//! moves the marker overlap forward by the factor `η_k`.

mod layout;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use layout::{build_layout, coordinate_projector, projected_exponent, BlockLayout};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Projection, Real, SymOperator, Vector};
use crate::monomial::{construct_lemma4, BlockMonomial, MonomialOptions};
use crate::report::Report;
use crate::wordexpr::{BigExponent, Letters, SpectralEvaluator, Symbol, WordExpr};

const OVERLAP_TOL: f64 = 1e-8;
const CONTAINMENT_TOL: f64 = 1e-9;
const NORM_SLACK: f64 = 1e-10;
const PARITY_TOL: f64 = 1e-10;
const SEPARATION_SLACK: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct GlobalOperators {
    pub p: Projection,
    pub q: Projection,
    pub r: Projection,
    pub s: Projection,
    pub e: Projection,
    /// Embedded `(P_i, Q_i)` per block.
    pub constituents: Vec<(Projection, Projection)>,
}

impl GlobalOperators {
    pub fn letters(&self) -> Letters {
        BTreeMap::from([
            (Symbol::P, self.p.clone()),
            (Symbol::Q, self.q.clone()),
            (Symbol::R, self.r.clone()),
            (Symbol::S, self.s.clone()),
            (Symbol::E, self.e.clone()),
        ])
    }

    pub fn dim(&self) -> usize {
        self.e.dim()
    }
}

/// Letters used by block `i`: even blocks read `(P, Q, E)`, odd blocks `(R, S, E)`.
pub fn global_word(i: usize, block_word: &WordExpr) -> WordExpr {
    if i % 2 == 0 {
        block_word.clone()
    } else {
        block_word.relabel(&BTreeMap::from([(Symbol::P, Symbol::R), (Symbol::Q, Symbol::S)]))
    }
}

fn parity_sum(layout: &BlockLayout, parts: &[(usize, &Projection)]) -> Result<Projection> {
    let dim = layout.global_dim;
    for (a, (i, pa)) in parts.iter().enumerate() {
        for (j, pb) in parts.iter().skip(a + 1) {
            let overlap = pa.matrix().mul(pb.matrix()).max_abs().to_f64();
            if overlap > PARITY_TOL {
                return Err(Error::Precondition(format!("blocks {i} and {j} overlap ({overlap:e})")));
            }
        }
    }
    let mut op = Matrix::zeros(dim);
    let mut rank = 0;
    for (_, p) in parts {
        op = op.add(p.matrix());
        rank += p.rank();
    }
    Projection::new(SymOperator::new(op)?, rank)
}

pub fn assemble_global(layout: &BlockLayout, blocks: &[BlockMonomial]) -> Result<GlobalOperators> {
    if blocks.len() != layout.k() {
        return Err(Error::Precondition(format!("{} blocks for a layout of {}", blocks.len(), layout.k())));
    }
    let mut constituents = Vec::with_capacity(blocks.len());
    for (idx, b) in blocks.iter().enumerate() {
        let i = idx + 1;
        if b.frame.dim() != layout.dims[idx] {
            return Err(Error::DimensionMismatch { expected: layout.dims[idx], got: b.frame.dim() });
        }
        constituents.push((layout.embed_projection(i, &b.p)?, layout.embed_projection(i, &b.q)?));
    }
    let pick = |even: bool, second: bool| -> Vec<(usize, &Projection)> {
        constituents
            .iter()
            .enumerate()
            .filter(|(idx, _)| ((idx + 1) % 2 == 0) == even)
            .map(|(idx, (p, q))| (idx + 1, if second { q } else { p }))
            .collect()
    };
    let dim = layout.global_dim;
    let zero_or = |parts: Vec<(usize, &Projection)>| -> Result<Projection> {
        if parts.is_empty() {
            Ok(Projection::zero(dim))
        } else {
            parity_sum(layout, &parts)
        }
    };
    let p = zero_or(pick(true, false))?;
    let q = zero_or(pick(true, true))?;
    let r = zero_or(pick(false, false))?;
    let s = zero_or(pick(false, true))?;
    let e = coordinate_projector(dim, &layout.markers);
    Ok(GlobalOperators { p, q, r, s, e, constituents })
}

/// Structural checks on the assembled operators.
pub fn verify_globals(layout: &BlockLayout, g: &GlobalOperators) -> Report {
    let mut rep = Report::new("globals");
    for (name, p) in [("P", &g.p), ("Q", &g.q), ("R", &g.r), ("S", &g.s), ("E", &g.e)] {
        let d = p.defects();
        rep.at_most(format!("idempotence[{name}]"), d.idempotence, crate::linalg::IDEMPOTENCE_TOL);
        rep.at_most(format!("symmetry[{name}]"), d.symmetry, crate::linalg::SYM_TOL);
        rep.at_most(format!("spectrum[{name}]"), d.spectrum, crate::linalg::SPECTRUM_TOL);
    }
    rep.flag("marker_rank", g.e.rank() == layout.k() + 1);
    for (a, x) in [("P", &g.p), ("Q", &g.q)] {
        for (b, y) in [("R", &g.r), ("S", &g.s)] {
            rep.at_most(format!("cross[{a}{b}]"), x.matrix().mul(y.matrix()).max_abs().to_f64(), PARITY_TOL);
        }
    }
    for (idx, (p, q)) in g.constituents.iter().enumerate() {
        let f = layout.block_projector(idx + 1);
        rep.at_most(format!("p_in_block[{}]", idx + 1), p.below_defect(&f), 1e-12);
        rep.at_most(format!("q_in_block[{}]", idx + 1), q.below_defect(&f), 1e-12);
        let ef = g.e.matrix().mul(f.matrix());
        let pair = coordinate_projector(layout.global_dim, &[layout.markers[idx], layout.markers[idx + 1]]);
        rep.at_most(format!("marker_pair[{}]", idx + 1), ef.sub(pair.matrix()).max_abs().to_f64(), 1e-12);
    }
    rep.extend("", layout.check_structure());
    rep
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub epsilons: Vec<f64>,
    pub etas: Vec<Real>,
    /// `x_0, …, x_K`.
    pub checkpoints: Vec<Vector>,
    /// `⟨x_k, e_{k+1}⟩` for `k = 0..=K`.
    pub overlaps: Vec<Real>,
    /// `η_1 ⋯ η_k` for `k = 0..=K`.
    pub expected_overlaps: Vec<Real>,
    pub norms: Vec<Real>,
    /// Letters applied up to and including block `k`.
    pub word_lengths: Vec<BigExponent>,
    /// Size of `x_k` outside blocks `1..=k`.
    pub containment: Vec<Real>,
    pub markers: Vec<Vector>,
}

pub fn run_trajectory(g: &GlobalOperators, layout: &BlockLayout, blocks: &[BlockMonomial]) -> Result<Trajectory> {
    let letters = g.letters();
    let mut ev = SpectralEvaluator::new(&letters);
    let markers: Vec<Vector> = (1..=layout.k() + 1).map(|j| layout.marker(j)).collect();
    let mut x = markers[0].clone();
    let mut checkpoints = vec![x.clone()];
    let mut overlaps = vec![x.dot(&markers[0])];
    let mut expected = vec![Real::one()];
    let mut norms = vec![x.norm()];
    let mut lengths = vec![BigExponent::zero()];
    let mut containment = vec![Real::zero()];
    let mut covered = vec![false; layout.global_dim];
    covered[layout.markers[0]] = true;
    for (idx, b) in blocks.iter().enumerate() {
        let i = idx + 1;
        x = ev.apply(&global_word(i, &b.word), &x)?;
        for c in layout.block_indices(i) {
            covered[c] = true;
        }
        let outside = x
            .coords()
            .iter()
            .zip(&covered)
            .filter(|(_, inside)| !**inside)
            .fold(Real::zero(), |acc, (v, _)| acc + v.square())
            .sqrt();
        overlaps.push(x.dot(&markers[i]));
        expected.push(expected.last().expect("seeded") * &b.eta);
        norms.push(x.norm());
        lengths.push(lengths.last().expect("seeded").add(&b.word.word_length()));
        containment.push(outside);
        checkpoints.push(x.clone());
    }
    Ok(Trajectory {
        epsilons: layout.epsilons.clone(),
        etas: blocks.iter().map(|b| b.eta.clone()).collect(),
        checkpoints,
        overlaps,
        expected_overlaps: expected,
        norms,
        word_lengths: lengths,
        containment,
        markers,
    })
}

/// Finite evidence that the checkpoints do not form a Cauchy sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub blocks: usize,
    pub epsilons: Vec<f64>,
    pub etas: Vec<f64>,
    pub overlaps: Vec<f64>,
    pub expected_overlaps: Vec<f64>,
    pub norms: Vec<f64>,
    /// `‖x_k - x_j‖` for `j < k`, row `k`, column `j`.
    pub separations: Vec<Vec<f64>>,
    pub min_separation: f64,
    pub eta_product: f64,
    /// `Π (1 - ε_i)`.
    pub tolerance_product: f64,
    pub total_word_length: BigExponent,
    pub log10_total_word_length: f64,
    pub report: Report,
    pub pass: bool,
}

pub fn divergence_certificate(t: &Trajectory) -> Certificate {
    let k = t.etas.len();
    let mut rep = Report::new("certificate");
    for (i, (eta, eps)) in t.etas.iter().zip(&t.epsilons).enumerate() {
        rep.below(format!("eta_bound[{}]", i + 1), 1.0 - eps, eta.to_f64());
    }
    for j in 1..=k {
        let dev = (&t.overlaps[j] - &t.expected_overlaps[j]).abs().to_f64();
        rep.at_most(format!("overlap[{j}]"), dev, OVERLAP_TOL);
        rep.at_most(format!("containment[{j}]"), t.containment[j].to_f64(), CONTAINMENT_TOL);
        let rise = (&t.norms[j] - &t.norms[j - 1]).to_f64();
        rep.at_most(format!("norm_monotone[{j}]"), rise, NORM_SLACK);
    }
    let eta_product = t.expected_overlaps[k].to_f64();
    let mut separations = vec![Vec::new(); k + 1];
    let mut min_sep = f64::INFINITY;
    for kk in 1..=k {
        for j in 0..kk {
            let diff = t.checkpoints[kk].sub(&t.checkpoints[j]);
            let along = diff.dot(&t.markers[kk]).abs().to_f64();
            rep.at_least(
                format!("marker_gap[{j},{kk}]"),
                along,
                t.expected_overlaps[kk].to_f64() - OVERLAP_TOL,
            );
            let sep = diff.norm().to_f64();
            rep.at_least(format!("separation[{j},{kk}]"), sep, eta_product - SEPARATION_SLACK);
            separations[kk].push(sep);
            min_sep = min_sep.min(sep);
        }
    }
    let total = t.word_lengths[k].clone();
    let pass = rep.all_pass();
    Certificate {
        blocks: k,
        epsilons: t.epsilons.clone(),
        etas: t.etas.iter().map(Real::to_f64).collect(),
        overlaps: t.overlaps.iter().map(Real::to_f64).collect(),
        expected_overlaps: t.expected_overlaps.iter().map(Real::to_f64).collect(),
        norms: t.norms.iter().map(Real::to_f64).collect(),
        separations,
        min_separation: if k == 0 { 0.0 } else { min_sep },
        eta_product,
        tolerance_product: t.epsilons.iter().map(|e| 1.0 - e).product(),
        log10_total_word_length: total.log10(),
        total_word_length: total,
        report: rep,
        pass,
    }
}

/// Everything produced by one end-to-end run.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub layout: BlockLayout,
    pub blocks: Vec<BlockMonomial>,
    pub globals: GlobalOperators,
    pub trajectory: Trajectory,
    pub certificate: Certificate,
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub exponent_cap: BigExponent,
    pub monomial: MonomialOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions { exponent_cap: crate::lemma1::default_exponent_cap(), monomial: MonomialOptions::default() }
    }
}

/// One block per distinct tolerance, built in parallel.
pub fn construct_blocks(epsilons: &[f64], opts: &MonomialOptions) -> Result<Vec<BlockMonomial>> {
    let mut distinct: Vec<f64> = Vec::new();
    for e in epsilons {
        if !distinct.iter().any(|d| d.to_bits() == e.to_bits()) {
            distinct.push(*e);
        }
    }
    let built: Vec<Result<BlockMonomial>> = distinct.par_iter().map(|&e| construct_lemma4(e, opts)).collect();
    let mut by_eps = Vec::with_capacity(built.len());
    for (e, b) in distinct.iter().zip(built) {
        let b = b.map_err(|err| match err {
            Error::InsufficientPrecision { .. } | Error::ExponentCapExceeded { .. } => {
                Error::ToleranceTooTight(format!("eps {e}: {err}"))
            }
            other => other,
        })?;
        by_eps.push((e.to_bits(), b));
    }
    Ok(epsilons
        .iter()
        .map(|e| by_eps.iter().find(|(bits, _)| *bits == e.to_bits()).expect("built").1.clone())
        .collect())
}

pub fn run_pipeline(epsilons: &[f64], opts: &PipelineOptions) -> Result<Pipeline> {
    let layout = build_layout(epsilons.len(), epsilons, &opts.exponent_cap)?;
    let mut mono = opts.monomial.clone();
    mono.corollary3.lemma1.exponent_cap = opts.exponent_cap.clone();
    let blocks = construct_blocks(epsilons, &mono)?;
    let globals = assemble_global(&layout, &blocks)?;
    let trajectory = run_trajectory(&globals, &layout, &blocks)?;
    let certificate = divergence_certificate(&trajectory);
    Ok(Pipeline { layout, blocks, globals, trajectory, certificate })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_block_reduces_to_its_monomial() {
        let run = run_pipeline(&[0.5], &PipelineOptions::default()).unwrap();
        let t = &run.trajectory;
        assert!((&t.overlaps[1] - &run.blocks[0].eta).abs().to_f64() < 1e-8);
        assert!(t.overlaps[1].to_f64() > 0.5);
        assert!(run.certificate.pass, "{:?}", run.certificate.report.failures());
        assert!(run.globals.p.rank() == 0 && run.globals.q.rank() == 0);
        assert_eq!(run.globals.e.rank(), 2);
    }

    #[test]
    fn two_blocks_parity() {
        let run = run_pipeline(&[0.5, 0.5], &PipelineOptions::default()).unwrap();
        let g = &run.globals;
        let f1 = run.layout.block_projector(1);
        let f2 = run.layout.block_projector(2);
        assert!(g.p.below_defect(&f2) < 1e-12);
        assert!(g.q.below_defect(&f2) < 1e-12);
        assert!(g.r.below_defect(&f1) < 1e-12);
        assert!(g.s.below_defect(&f1) < 1e-12);
        assert_eq!(g.e.rank(), 3);
        let rep = verify_globals(&run.layout, g);
        let others: Vec<_> = rep.failures().into_iter().filter(|c| !c.name.starts_with("cross")).collect();
        assert!(others.is_empty(), "{others:?}");
        assert!(run.certificate.pass, "{:?}", run.certificate.report.failures());
    }

    #[test]
    fn neighbouring_pairs_meet_at_the_shared_marker() {
        // both neighbours must act on the marker between them, so P·R cannot vanish
        let run = run_pipeline(&[0.5, 0.5], &PipelineOptions::default()).unwrap();
        let g = &run.globals;
        let m = run.layout.marker(2);
        assert!(g.r.apply(&m).norm().to_f64() > 0.99);
        assert!(g.p.apply(&m).norm().to_f64() > 0.99);
        let rep = verify_globals(&run.layout, g);
        assert!(rep.clause("cross[PR]").unwrap().residual > 0.9);
    }

    #[test]
    fn odd_blocks_use_second_pair() {
        let w = WordExpr::concat(vec![WordExpr::letter(Symbol::P), WordExpr::letter(Symbol::Q), WordExpr::letter(Symbol::E)]);
        assert_eq!(global_word(1, &w).expand(10).unwrap(), "RSE");
        assert_eq!(global_word(2, &w).expand(10).unwrap(), "PQE");
    }
}
