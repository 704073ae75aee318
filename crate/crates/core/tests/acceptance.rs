//! Acceptance run: one line per criterion, nonzero exit if any fails.

use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use projdiv::assembly::{run_pipeline, PipelineOptions};
use projdiv::cli::hygiene_report;
use projdiv::lemma1::{construct_lemma1, single_stage_error, Lemma1Construction, Lemma1Input};
use projdiv::lemma2::{closed_form_error, construct_lemma2, RankOneChain};
use projdiv::linalg::{op_norm, rank_one, Matrix, Projection, Real, SymOperator};
use projdiv::monomial::{choose_r, construct_lemma4, grid_targets, BlockFrame, MonomialOptions};
use projdiv::properties::perturbation_suite;
use projdiv::scalar::{cos_power, minimal_power};
use projdiv::wordexpr::{eval_literal, BigExponent, Letters, SpectralEvaluator, Symbol, WordExpr};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn dense_gap(a: &Matrix, b: &Matrix) -> f64 {
    op_norm(&SymOperator::new(a.sub(b)).expect("symmetric")).to_f64()
}

/// `‖A B‖` as `sqrt‖B A A B‖`, exact for symmetric `A`, `B`.
fn product_norm(a: &Projection, b: &Projection) -> f64 {
    let bab = b.matrix().mul(a.matrix()).mul(b.matrix());
    op_norm(&SymOperator::new(bab.symmetrized()).expect("symmetric")).to_f64().max(0.0).sqrt()
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let run = match run_pipeline(&[0.5; 4], &PipelineOptions::default()) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("pipeline failed: {e}")),
    };
    let secs = start.elapsed().as_secs_f64();
    let t = &run.trajectory;
    let min_eta = t.etas.iter().map(Real::to_f64).fold(f64::INFINITY, f64::min);
    let mut product = Real::one();
    let mut overlap_dev = 0.0f64;
    for k in 0..t.overlaps.len() {
        if k > 0 {
            product = &product * &t.etas[k - 1];
        }
        overlap_dev = overlap_dev.max((&t.overlaps[k] - &product).abs().to_f64());
    }
    let mut min_sep = f64::INFINITY;
    let mut pairs = 0;
    for j in 0..t.checkpoints.len() {
        for k in j + 1..t.checkpoints.len() {
            min_sep = min_sep.min(t.checkpoints[k].sub(&t.checkpoints[j]).norm().to_f64());
            pairs += 1;
        }
    }
    let pass = secs < 60.0 && min_eta > 0.5 && overlap_dev <= 1e-8 && pairs == 10 && min_sep >= 0.0625 - 1e-6;
    outcome(
        pass,
        format!("{secs:.1}s, min eta {min_eta:.6}, overlap deviation {overlap_dev:.1e}, {pairs} pairs, min separation {min_sep:.6}"),
    )
}

fn lemma1_on_frame(r: usize, eps: f64) -> (Lemma1Input, Result<Lemma1Construction, projdiv::Error>) {
    let frame = BlockFrame::new(r);
    let input = Lemma1Input {
        e: frame.e(),
        e_prime: frame.e_prime(),
        target_angles: grid_targets(r),
        epsilon: eps,
        ancillas: frame.chain_ancillas(),
    };
    let c = construct_lemma1(&input);
    (input, c)
}

fn lemma1_suite() -> (Outcome, Vec<(f64, Lemma1Construction, BlockFrame)>) {
    let mut worst_ratio = 0.0f64;
    let mut worst_stage = 0.0f64;
    let mut failures = Vec::new();
    let mut chains = Vec::new();
    for r in 1..=3 {
        for eps in [0.25, 0.5] {
            let (input, c) = lemma1_on_frame(r, eps);
            let c = match c {
                Ok(c) => c,
                Err(e) => {
                    failures.push(format!("r={r} eps={eps}: {e}"));
                    continue;
                }
            };
            for s in 0..=r {
                // (E P_s E)^n(s) through the word evaluator, independent of the construction path
                let letters: Letters = [(Symbol::P, c.chain[s].clone()), (Symbol::E, c.e_proj.clone())].into();
                let epe = WordExpr::concat(vec![
                    WordExpr::letter(Symbol::E),
                    WordExpr::letter(Symbol::P),
                    WordExpr::letter(Symbol::E),
                ]);
                let word = WordExpr::power(epe, c.n[s].clone());
                let dense = SpectralEvaluator::new(&letters).materialize(&word).expect("materialize");
                let f_hat = rank_one(&c.targets[s]).expect("unit target");
                let err = dense_gap(&dense, f_hat.matrix());
                worst_ratio = worst_ratio.max(err / eps);
                if !(err < eps) {
                    failures.push(format!("r={r} eps={eps} s={s}: error {err}"));
                }
                let single = single_stage_error(&input, s, &c.alphas[s], &c.n[s]).expect("single stage");
                let law = cos_power(&c.alphas[s], &c.n[s]);
                worst_stage = worst_stage.max((&single - &law).abs().to_f64());
            }
            chains.push((eps, c, BlockFrame::new(r)));
        }
    }
    let pass = failures.is_empty() && worst_stage <= 1e-10;
    let detail = format!("worst error/eps {worst_ratio:.4}, single-stage law deviation {worst_stage:.1e} {failures:?}");
    (outcome(pass, detail), chains)
}

fn lemma2_suite(chains: &[(f64, Lemma1Construction, BlockFrame)]) -> Outcome {
    let mut failures = Vec::new();
    let mut worst_identity = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for (eps, c1, frame) in chains {
        let chain = RankOneChain::from_lemma1(c1);
        let c2 = match construct_lemma2(&chain, *eps, &frame.q_ancillas()) {
            Ok(c) => c,
            Err(e) => {
                failures.push(format!("r={} eps={eps}: {e}", frame.r));
                continue;
            }
        };
        let letters: Letters = [(Symbol::P, chain.top().clone()), (Symbol::Q, c2.q.clone())].into();
        let pqp = WordExpr::concat(vec![WordExpr::letter(Symbol::P), WordExpr::letter(Symbol::Q), WordExpr::letter(Symbol::P)]);
        let mut ev = SpectralEvaluator::new(&letters);
        for s in 0..=frame.r {
            let dense = ev.materialize(&WordExpr::power(pqp.clone(), c2.m[s].clone())).expect("materialize");
            let err = dense_gap(&dense, chain.members[s].matrix());
            worst_ratio = worst_ratio.max(err / eps);
            if !(err < *eps) {
                failures.push(format!("r={} eps={eps} s={s}: error {err}", frame.r));
            }
            let closed = closed_form_error(&c2.betas, &c2.m[s], s).to_f64();
            worst_identity = worst_identity.max((err - closed).abs());
        }
    }
    let pass = failures.is_empty() && worst_identity <= 1e-9 && !chains.is_empty();
    outcome(pass, format!("worst error/eps {worst_ratio:.4}, closed-form deviation {worst_identity:.1e} {failures:?}"))
}

fn lemma4_overlap() -> Outcome {
    let half = match construct_lemma4(0.5, &MonomialOptions::default()) {
        Ok(b) => b,
        Err(e) => return outcome(false, format!("eps 0.5: {e}")),
    };
    let eta = half.eta.to_f64();
    let mut detail = format!("eps 0.5 eta {eta:.6}");
    let mut pass = eta > 0.5;
    match construct_lemma4(0.9, &MonomialOptions::default()) {
        Err(e) => {
            pass = false;
            detail += &format!("; eps 0.9: {e}");
        }
        Ok(b) => {
            let len = b.word.word_length();
            detail += &format!("; eps 0.9 r {} word length {len}", b.r);
            let cap = 1_000_000u64;
            if len > BigExponent::from_u64(cap) {
                pass = false;
                detail += " exceeds 10^6";
            } else {
                let letters = b.letters();
                let x = b.frame.e();
                let lit = eval_literal(&b.word, &letters, &x, cap).expect("literal");
                let spec = SpectralEvaluator::new(&letters).apply(&b.word, &x).expect("spectral");
                let gap = lit.sub(&spec).max_abs().to_f64();
                pass &= gap <= 1e-8;
                detail += &format!(", literal vs spectral {gap:.1e}");
            }
        }
    }
    outcome(pass, detail)
}

fn scalar_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = Vec::new();
    for _ in 0..100 {
        let angle = rng.gen_range(0.02..1.5);
        let target = rng.gen_range(0.005..0.995);
        let (a, t) = (Real::from_f64(angle), Real::from_f64(target));
        let n = minimal_power(&a, &t).expect("in range").to_u64().expect("small");
        let c2 = a.cos().square();
        let mut brute = 1u64;
        let mut power = c2.clone();
        while !(power < t) {
            power = &power * &c2;
            brute += 1;
        }
        let passes = |k: u64| cos_power(&a, &BigExponent::from_u64(k)) < t;
        if n != brute || !passes(n) || (n > 1 && passes(n - 1)) {
            bad.push(format!("minimal_power({angle}, {target}) = {n}, scan {brute}"));
        }
    }
    for _ in 0..100 {
        let eps: f64 = rng.gen_range(0.02..0.999);
        let r = choose_r(eps);
        let ok = |k: usize| (std::f64::consts::PI / (2.0 * k as f64)).cos().powi(k as i32) > 1.0 - eps / 2.0;
        let brute = (1..).find(|&k| ok(k)).expect("exists");
        if r != brute || !ok(r) || (r > 1 && ok(r - 1)) {
            bad.push(format!("choose_r({eps}) = {r}, scan {brute}"));
        }
    }
    outcome(bad.is_empty(), format!("200 inputs, {} mismatches {bad:?}", bad.len()))
}

fn hygiene() -> Outcome {
    let run = match run_pipeline(&[0.5; 4], &PipelineOptions::default()) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("pipeline failed: {e}")),
    };
    let rep = hygiene_report(&run, 1e-10).expect("hygiene");
    let g = &run.globals;
    let mut cross = Vec::new();
    for (a, x) in [("P", &g.p), ("Q", &g.q)] {
        for (b, y) in [("R", &g.r), ("S", &g.s)] {
            cross.push((format!("{a}{b}"), product_norm(x, y)));
        }
    }
    let worst_cross = cross.iter().map(|c| c.1).fold(0.0, f64::max);
    let pass = rep.all_pass() && worst_cross <= 1e-10;
    outcome(
        pass,
        format!(
            "{} projection clauses, {} failing; cross norms {:?}",
            rep.clauses.len(),
            rep.failures().len(),
            cross.iter().map(|(n, v)| format!("{n}={v:.3e}")).collect::<Vec<_>>()
        ),
    )
}

fn monotonicity() -> Outcome {
    let run = match run_pipeline(&[0.5; 4], &PipelineOptions::default()) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("pipeline failed: {e}")),
    };
    let norms: Vec<f64> = run.trajectory.norms.iter().map(Real::to_f64).collect();
    let worst_rise = norms.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let rep = perturbation_suite(11, 50).expect("suite");
    let pass = worst_rise <= 1e-10 && rep.all_pass() && rep.clauses.len() == 50;
    outcome(pass, format!("worst norm rise {worst_rise:.1e}, perturbation {}/50 pass", rep.clauses.len() - rep.failures().len()))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("tempdir");
    let mut outputs = Vec::new();
    for tag in ["a", "b"] {
        let out = dir.path().join(tag);
        let status = Command::new(env!("CARGO_BIN_EXE_projdiv")).arg("certify").arg("--out").arg(&out).status();
        match status {
            Ok(s) if s.code() == Some(0) => {}
            other => return outcome(false, format!("certify run {tag}: {other:?}")),
        }
        outputs.push(std::fs::read(out.join("certificate.json")).expect("certificate"));
    }
    outcome(outputs[0] == outputs[1], format!("{} bytes per run", outputs[0].len()))
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    results.push(("1 end-to-end certificate", end_to_end()));
    let (l1, chains) = lemma1_suite();
    results.push(("2 lemma1 suite", l1));
    results.push(("3 lemma2 suite", lemma2_suite(&chains)));
    results.push(("4 lemma4 overlap", lemma4_overlap()));
    results.push(("5 scalar oracles", scalar_oracles()));
    results.push(("6 projection hygiene", hygiene()));
    results.push(("7 contraction monotonicity", monotonicity()));
    results.push(("8 determinism", determinism()));
    let mut failed = 0;
    for (name, o) in &results {
        println!("criterion {name}: {} ({})", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
