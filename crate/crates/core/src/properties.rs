//! Seeded randomized checks run by `verify-all`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linalg::{op_norm, projector_onto_span, spectral_power, Matrix, Real, SymOperator, Vector};
use crate::report::Report;
use crate::wordexpr::{eval_literal, eval_spectral, BigExponent, Letters, Symbol, WordExpr};

fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    Vector::new((0..dim).map(|_| Real::from_f64(rng.gen_range(-1.0..1.0))).collect())
}

/// `M Mᵀ` scaled into the unit ball.
pub fn random_psd_contraction(rng: &mut ChaCha8Rng, dim: usize) -> SymOperator {
    let m = Matrix::from_fn(dim, |_, _| Real::from_f64(rng.gen_range(-1.0..1.0)));
    let g = SymOperator::new(m.mul(&m.transpose())).expect("gram is symmetric");
    let top = op_norm(&g);
    let scale = Real::from_f64(rng.gen_range(0.5..1.0)) / top;
    g.scaled(&scale)
}

/// `‖Aⁿ - Bⁿ‖ ≤ n ‖A - B‖` on random PSD contraction pairs.
pub fn perturbation_suite(seed: u64, cases: usize) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = Report::new("perturbation");
    for case in 0..cases {
        let dim = rng.gen_range(1..=6);
        let n = rng.gen_range(1..=1000u64);
        let a = random_psd_contraction(&mut rng, dim);
        let b = random_psd_contraction(&mut rng, dim);
        let ne = BigExponent::from_u64(n);
        let lhs = op_norm(&spectral_power(&a, &ne)?.sub(&spectral_power(&b, &ne)?)).to_f64();
        let rhs = n as f64 * op_norm(&a.sub(&b)).to_f64();
        rep.at_most(format!("pair[{case}]"), lhs - rhs, 1e-10);
    }
    Ok(rep)
}

fn random_letters(rng: &mut ChaCha8Rng, dim: usize) -> Result<Letters> {
    let mut letters = Letters::new();
    for s in [Symbol::P, Symbol::Q, Symbol::E] {
        let rank = rng.gen_range(1..=dim);
        let vs: Vec<Vector> = (0..rank).map(|_| random_vector(rng, dim)).collect();
        letters.insert(s, projector_onto_span(&vs)?);
    }
    Ok(letters)
}

fn random_letter(rng: &mut ChaCha8Rng) -> WordExpr {
    WordExpr::letter([Symbol::P, Symbol::Q, Symbol::E][rng.gen_range(0..3)])
}

/// A palindrome `L_1 … L_k … L_1`, which always materializes to a PSD contraction.
fn random_palindrome(rng: &mut ChaCha8Rng) -> WordExpr {
    let half: Vec<WordExpr> = (0..rng.gen_range(1..=3)).map(|_| random_letter(rng)).collect();
    let mut all = half.clone();
    all.extend(half.into_iter().rev().skip(1));
    WordExpr::concat(all)
}

/// Random word mixing letters, powered palindromes and sandwiched powers.
pub fn random_word(rng: &mut ChaCha8Rng) -> WordExpr {
    let pieces = (0..rng.gen_range(1..=4))
        .map(|_| match rng.gen_range(0..3) {
            0 => random_letter(rng),
            1 => WordExpr::power(random_palindrome(rng), BigExponent::from_u64(rng.gen_range(1..=40))),
            _ => {
                let outer = random_letter(rng);
                let inner = WordExpr::power(random_palindrome(rng), BigExponent::from_u64(rng.gen_range(1..=20)));
                WordExpr::power(WordExpr::concat(vec![outer.clone(), inner, outer]), BigExponent::from_u64(rng.gen_range(1..=20)))
            }
        })
        .collect();
    WordExpr::concat(pieces)
}

/// Literal and spectral evaluation agree; the result never grows.
pub fn evaluator_suite(seed: u64, cases: usize) -> Result<Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = Report::new("evaluators");
    for case in 0..cases {
        let dim = rng.gen_range(2..=8);
        let letters = random_letters(&mut rng, dim)?;
        let w = random_word(&mut rng);
        let x = random_vector(&mut rng, dim);
        let lit = eval_literal(&w, &letters, &x, 100_000)?;
        let spec = eval_spectral(&w, &letters, &x)?;
        rep.at_most(format!("agreement[{case}]"), lit.sub(&spec).max_abs().to_f64(), 1e-8);
        rep.at_most(format!("contraction[{case}]"), (spec.norm() - x.norm()).to_f64(), 1e-10);
    }
    Ok(rep)
}
