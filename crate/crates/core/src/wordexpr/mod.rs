//! Words in projection letters with big exponents, and two evaluators:
//! letter-by-letter application and spectral powering of `Power` bases.
//!
//! The rightmost factor of a `Concat` acts first on vectors.

mod exponent;
mod json;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

pub use exponent::{BigExponent, EXACT_BITS};
pub use json::WordJson;

use crate::error::{Error, Result};
use crate::linalg::{sym_eig, Matrix, Projection, SymEig, SymOperator, Vector, POWER_BASE_SYM_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    P,
    Q,
    R,
    S,
    E,
}

impl Symbol {
    pub fn as_char(self) -> char {
        match self {
            Symbol::P => 'P',
            Symbol::Q => 'Q',
            Symbol::R => 'R',
            Symbol::S => 'S',
            Symbol::E => 'E',
        }
    }

    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'P' => Ok(Symbol::P),
            'Q' => Ok(Symbol::Q),
            'R' => Ok(Symbol::R),
            'S' => Ok(Symbol::S),
            'E' => Ok(Symbol::E),
            other => Err(Error::AlphabetViolation(other)),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Letter sets: one block uses `{P, Q, E}`, the assembled system all five.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Alphabet {
    Block,
    Global,
}

impl Alphabet {
    pub fn contains(self, s: Symbol) -> bool {
        match self {
            Alphabet::Block => matches!(s, Symbol::P | Symbol::Q | Symbol::E),
            Alphabet::Global => true,
        }
    }
}

/// Assignment of projections to letters.
pub type Letters = BTreeMap<Symbol, Projection>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum WordExpr {
    Letter(Symbol),
    Concat(Vec<WordExpr>),
    Power { base: Box<WordExpr>, exp: BigExponent },
}

impl WordExpr {
    pub fn letter(s: Symbol) -> Self {
        WordExpr::Letter(s)
    }

    /// Concatenation, flattening nested `Concat` children.
    pub fn concat(children: Vec<WordExpr>) -> Self {
        let mut flat = Vec::with_capacity(children.len());
        for c in children {
            match c {
                WordExpr::Concat(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        WordExpr::Concat(flat)
    }

    pub fn power(base: WordExpr, exp: BigExponent) -> Self {
        WordExpr::Power { base: Box::new(base), exp }
    }

    /// Number of letters in the literal expansion.
    pub fn word_length(&self) -> BigExponent {
        match self {
            WordExpr::Letter(_) => BigExponent::one(),
            WordExpr::Concat(cs) => cs.iter().fold(BigExponent::zero(), |acc, c| acc.add(&c.word_length())),
            WordExpr::Power { base, exp } => base.word_length().mul(exp),
        }
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            WordExpr::Letter(s) => {
                out.insert(*s);
            }
            WordExpr::Concat(cs) => cs.iter().for_each(|c| c.collect_symbols(out)),
            WordExpr::Power { base, .. } => base.collect_symbols(out),
        }
    }

    pub fn check_alphabet(&self, alphabet: Alphabet) -> Result<()> {
        match self.symbols().into_iter().find(|s| !alphabet.contains(*s)) {
            Some(s) => Err(Error::AlphabetViolation(s.as_char())),
            None => Ok(()),
        }
    }

    /// Same word with letters renamed; unmapped letters are kept.
    pub fn relabel(&self, map: &BTreeMap<Symbol, Symbol>) -> WordExpr {
        match self {
            WordExpr::Letter(s) => WordExpr::Letter(*map.get(s).unwrap_or(s)),
            WordExpr::Concat(cs) => WordExpr::Concat(cs.iter().map(|c| c.relabel(map)).collect()),
            WordExpr::Power { base, exp } => WordExpr::power(base.relabel(map), exp.clone()),
        }
    }

    fn has_scaled_exponent(&self) -> bool {
        match self {
            WordExpr::Letter(_) => false,
            WordExpr::Concat(cs) => cs.iter().any(|c| c.has_scaled_exponent()),
            WordExpr::Power { base, exp } => !exp.is_exact() || base.has_scaled_exponent(),
        }
    }

    /// Literal letter sequence, leftmost first.
    pub fn expand(&self, cap: u64) -> Result<String> {
        self.check_literal(cap)?;
        let mut out = String::new();
        self.push_letters(&mut out);
        Ok(out)
    }

    fn push_letters(&self, out: &mut String) {
        match self {
            WordExpr::Letter(s) => out.push(s.as_char()),
            WordExpr::Concat(cs) => cs.iter().for_each(|c| c.push_letters(out)),
            WordExpr::Power { base, exp } => {
                for _ in 0..exp.to_u64().unwrap_or(0) {
                    base.push_letters(out);
                }
            }
        }
    }

    fn check_literal(&self, cap: u64) -> Result<()> {
        if self.has_scaled_exponent() {
            return Err(Error::ScaledExponent);
        }
        let length = self.word_length();
        if length > BigExponent::from_u64(cap) {
            return Err(Error::WordTooLong { length: length.to_string(), cap });
        }
        Ok(())
    }
}

impl fmt::Display for WordExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WordExpr::Letter(s) => write!(f, "{s}"),
            WordExpr::Concat(cs) => {
                write!(f, "(")?;
                for c in cs {
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
            WordExpr::Power { base, exp } => write!(f, "{base}^{exp}"),
        }
    }
}

fn letter<'a>(letters: &'a Letters, s: Symbol) -> Result<&'a Projection> {
    letters.get(&s).ok_or(Error::MissingLetter(s.as_char()))
}

/// Applies `w` to `x` one letter at a time.
pub fn eval_literal(w: &WordExpr, letters: &Letters, x: &Vector, cap: u64) -> Result<Vector> {
    w.check_literal(cap)?;
    for s in w.symbols() {
        letter(letters, s)?;
    }
    Ok(apply_literal(w, letters, x.clone()))
}

fn apply_literal(w: &WordExpr, letters: &Letters, x: Vector) -> Vector {
    match w {
        WordExpr::Letter(s) => letters[s].apply(&x),
        WordExpr::Concat(cs) => cs.iter().rev().fold(x, |acc, c| apply_literal(c, letters, acc)),
        WordExpr::Power { base, exp } => {
            let mut y = x;
            for _ in 0..exp.to_u64().unwrap_or(0) {
                y = apply_literal(base, letters, y);
            }
            y
        }
    }
}

/// Evaluator that powers `Power` bases through their spectra and caches
/// each base's eigendecomposition.
pub struct SpectralEvaluator<'a> {
    letters: &'a Letters,
    cache: HashMap<WordExpr, SymEig>,
}

impl<'a> SpectralEvaluator<'a> {
    pub fn new(letters: &'a Letters) -> Self {
        SpectralEvaluator { letters, cache: HashMap::new() }
    }

    pub fn apply(&mut self, w: &WordExpr, x: &Vector) -> Result<Vector> {
        match w {
            WordExpr::Letter(s) => Ok(letter(self.letters, *s)?.apply(x)),
            WordExpr::Concat(cs) => {
                let mut y = x.clone();
                for c in cs.iter().rev() {
                    y = self.apply(c, &y)?;
                }
                Ok(y)
            }
            WordExpr::Power { base, exp } => {
                if exp.is_zero() {
                    return Ok(x.clone());
                }
                self.base_eig(base)?;
                self.cache[base.as_ref()].apply_power(exp, x)
            }
        }
    }

    /// Dense operator of `w`.
    pub fn materialize(&mut self, w: &WordExpr) -> Result<Matrix> {
        match w {
            WordExpr::Letter(s) => Ok(letter(self.letters, *s)?.matrix().clone()),
            WordExpr::Concat(cs) => {
                let mut acc: Option<Matrix> = None;
                for c in cs {
                    let m = self.materialize(c)?;
                    acc = Some(match acc {
                        None => m,
                        Some(a) => a.mul(&m),
                    });
                }
                acc.ok_or_else(|| Error::Precondition("empty word".into()))
            }
            WordExpr::Power { base, exp } => {
                self.base_eig(base)?;
                let eig = &self.cache[base.as_ref()];
                if exp.is_zero() {
                    return Ok(Matrix::identity(eig.dim()));
                }
                Ok(eig.power(exp)?.op.into_matrix())
            }
        }
    }

    fn base_eig(&mut self, base: &WordExpr) -> Result<()> {
        if self.cache.contains_key(base) {
            return Ok(());
        }
        let m = self.materialize(base)?;
        let defect = m.symmetry_defect().to_f64();
        if defect > POWER_BASE_SYM_TOL {
            return Err(Error::NonSymmetricPowerBase { defect });
        }
        let eig = sym_eig(&SymOperator::with_tolerance(m, POWER_BASE_SYM_TOL)?);
        self.cache.insert(base.clone(), eig);
        Ok(())
    }
}

/// Applies `w` to `x`, powering every `Power` base spectrally.
pub fn eval_spectral(w: &WordExpr, letters: &Letters, x: &Vector) -> Result<Vector> {
    SpectralEvaluator::new(letters).apply(w, x)
}

/// Dense operator of `w` under `letters`.
pub fn materialize(w: &WordExpr, letters: &Letters) -> Result<Matrix> {
    SpectralEvaluator::new(letters).materialize(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rank_one, Real};

    fn pqp(m: u64) -> WordExpr {
        WordExpr::power(
            WordExpr::concat(vec![WordExpr::letter(Symbol::P), WordExpr::letter(Symbol::Q), WordExpr::letter(Symbol::P)]),
            BigExponent::from_u64(m),
        )
    }

    fn line_letters(beta: &Real) -> Letters {
        let mut l = Letters::new();
        l.insert(Symbol::P, rank_one(&Vector::from_f64(&[1.0, 0.0])).unwrap());
        l.insert(Symbol::Q, rank_one(&Vector::new(vec![beta.cos(), beta.sin()])).unwrap());
        l.insert(Symbol::E, rank_one(&Vector::from_f64(&[1.0, 0.0])).unwrap());
        l
    }

    #[test]
    fn lengths() {
        assert_eq!(WordExpr::letter(Symbol::P).word_length(), BigExponent::from_u64(1));
        assert_eq!(pqp(5).word_length(), BigExponent::from_u64(15));
        let e = WordExpr::letter(Symbol::E);
        let w = WordExpr::power(WordExpr::concat(vec![e.clone(), pqp(460), e]), BigExponent::from_u64(2));
        assert_eq!(w.word_length(), BigExponent::from_u64(2764));
    }

    #[test]
    fn concat_flattens() {
        let a = WordExpr::concat(vec![WordExpr::letter(Symbol::P), WordExpr::letter(Symbol::Q)]);
        let b = WordExpr::concat(vec![a, WordExpr::letter(Symbol::E)]);
        assert_eq!(b, WordExpr::Concat(vec![WordExpr::Letter(Symbol::P), WordExpr::Letter(Symbol::Q), WordExpr::Letter(Symbol::E)]));
    }

    #[test]
    fn literal_fixes_marker_and_idempotent() {
        let l = line_letters(&Real::from_f64(0.3));
        let x = Vector::from_f64(&[1.0, 0.0]);
        assert_eq!(eval_literal(&WordExpr::letter(Symbol::E), &l, &x, 10).unwrap(), x);
        let y = Vector::from_f64(&[0.3, -0.7]);
        let pp = WordExpr::concat(vec![WordExpr::letter(Symbol::Q), WordExpr::letter(Symbol::Q)]);
        let once = eval_literal(&WordExpr::letter(Symbol::Q), &l, &y, 10).unwrap();
        assert!(eval_literal(&pp, &l, &y, 10).unwrap().sub(&once).max_abs().to_f64() < 1e-100);
    }

    #[test]
    fn literal_rejects_long_and_scaled() {
        let l = line_letters(&Real::from_f64(0.3));
        let x = Vector::from_f64(&[1.0, 0.0]);
        assert!(matches!(eval_literal(&pqp(1000), &l, &x, 100), Err(Error::WordTooLong { .. })));
        let huge = WordExpr::power(WordExpr::letter(Symbol::E), BigExponent::scaled(1.0, 200).unwrap());
        assert_eq!(eval_literal(&huge, &l, &x, u64::MAX), Err(Error::ScaledExponent));
    }

    #[test]
    fn spectral_projection_power_is_itself() {
        let l = line_letters(&Real::from_f64(0.3));
        let x = Vector::from_f64(&[1.0, 0.0]);
        let w = WordExpr::power(WordExpr::letter(Symbol::E), BigExponent::from_decimal(&format!("1{}", "0".repeat(40))).unwrap());
        assert!(eval_spectral(&w, &l, &x).unwrap().sub(&x).max_abs().to_f64() < 1e-100);
    }

    #[test]
    fn spectral_scalar_law() {
        let l = line_letters(&(Real::pi() / Real::from_u64(4)));
        let x = Vector::from_f64(&[1.0, 0.0]);
        let y = eval_spectral(&pqp(2), &l, &x).unwrap();
        assert!((y.get(0).to_f64() - 0.25).abs() < 1e-15);
        assert!(y.get(1).to_f64().abs() < 1e-15);
    }

    #[test]
    fn evaluators_agree() {
        let l = line_letters(&Real::from_f64(0.2));
        let e = WordExpr::letter(Symbol::E);
        let w = WordExpr::concat(vec![
            WordExpr::power(WordExpr::concat(vec![e.clone(), pqp(7), e.clone()]), BigExponent::from_u64(3)),
            WordExpr::letter(Symbol::Q),
        ]);
        let x = Vector::from_f64(&[0.6, 0.8]);
        let a = eval_literal(&w, &l, &x, 1000).unwrap();
        let b = eval_spectral(&w, &l, &x).unwrap();
        assert!(a.sub(&b).max_abs().to_f64() < 1e-30);
    }

    #[test]
    fn non_symmetric_base_rejected() {
        let l = line_letters(&Real::from_f64(0.4));
        let w = WordExpr::power(
            WordExpr::concat(vec![WordExpr::letter(Symbol::P), WordExpr::letter(Symbol::Q)]),
            BigExponent::from_u64(3),
        );
        assert!(matches!(eval_spectral(&w, &l, &Vector::from_f64(&[1.0, 0.0])), Err(Error::NonSymmetricPowerBase { .. })));
    }

    #[test]
    fn alphabet_and_relabel() {
        let w = pqp(3);
        assert!(w.check_alphabet(Alphabet::Block).is_ok());
        let map = BTreeMap::from([(Symbol::P, Symbol::R), (Symbol::Q, Symbol::S)]);
        let v = w.relabel(&map);
        assert_eq!(v.check_alphabet(Alphabet::Block), Err(Error::AlphabetViolation('R')));
        assert_eq!(v.expand(100).unwrap(), "RSRRSRRSR");
    }

    #[test]
    fn missing_letter() {
        let l = Letters::new();
        assert_eq!(
            eval_spectral(&WordExpr::letter(Symbol::S), &l, &Vector::from_f64(&[1.0])),
            Err(Error::MissingLetter('S'))
        );
    }
}
