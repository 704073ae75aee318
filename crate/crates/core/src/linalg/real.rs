//! Extended-precision real scalar.
//!
//! Every operator in the construction is carried in binary floating point
//! with a process-wide working precision (default 384 bits). Spectral
//! components of the form `1 - μ` with μ far below 2^-53 must stay
//! resolvable, otherwise powers with exponents around 10^60 collapse.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::BigUint;

/// Default working precision in bits.
pub const DEFAULT_PRECISION_BITS: usize = 384;

/// Bits of headroom demanded beyond the scale of the smallest spectral gap.
pub const GUARD_BITS: usize = 96;

static PRECISION: AtomicUsize = AtomicUsize::new(DEFAULT_PRECISION_BITS);

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

/// Current working precision in bits.
pub fn precision_bits() -> usize {
    PRECISION.load(AtomicOrdering::Relaxed)
}

/// Sets the working precision. Values are rounded up to a multiple of 64
/// and clamped to at least 128 bits. Call before constructing anything.
pub fn set_precision_bits(bits: usize) {
    let bits = bits.max(128).div_ceil(64) * 64;
    PRECISION.store(bits, AtomicOrdering::Relaxed);
}

fn p() -> usize {
    precision_bits()
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// Real number at the working precision.
#[derive(Clone)]
pub struct Real(BigFloat);

impl Real {
    pub fn zero() -> Self {
        Real(BigFloat::from_u8(0, p()))
    }

    pub fn one() -> Self {
        Real(BigFloat::from_u8(1, p()))
    }

    pub fn from_f64(x: f64) -> Self {
        Real(BigFloat::from_f64(x, p()))
    }

    pub fn from_u64(x: u64) -> Self {
        Real(BigFloat::from_u64(x, p()))
    }

    pub fn from_i64(x: i64) -> Self {
        Real(BigFloat::from_i64(x, p()))
    }

    /// `num / den` at working precision.
    pub fn ratio(num: i64, den: i64) -> Self {
        Real::from_i64(num) / Real::from_i64(den)
    }

    pub fn from_biguint(n: &BigUint) -> Self {
        let two64 = Real::from_f64(18446744073709551616.0);
        let mut acc = Real::zero();
        for digit in n.to_u64_digits().iter().rev() {
            acc = &acc * &two64 + Real::from_u64(*digit);
        }
        acc
    }

    pub fn pi() -> Self {
        Real(with_consts(|cc| cc.pi(p(), RM)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        !self.0.is_zero() && self.0.is_negative()
    }

    pub fn is_finite(&self) -> bool {
        !self.0.is_nan() && !self.0.is_inf()
    }

    pub fn abs(&self) -> Self {
        Real(self.0.abs())
    }

    pub fn sqrt(&self) -> Self {
        Real(self.0.sqrt(p(), RM))
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn ln(&self) -> Self {
        Real(with_consts(|cc| self.0.ln(p(), RM, cc)))
    }

    pub fn exp(&self) -> Self {
        Real(with_consts(|cc| self.0.exp(p(), RM, cc)))
    }

    pub fn sin(&self) -> Self {
        Real(with_consts(|cc| self.0.sin(p(), RM, cc)))
    }

    pub fn cos(&self) -> Self {
        Real(with_consts(|cc| self.0.cos(p(), RM, cc)))
    }

    /// `ln(1 + x)`, accurate for tiny `x`.
    pub fn ln1p(&self) -> Self {
        if self.is_zero() {
            return Real::zero();
        }
        if self.log2_abs() < -24.0 {
            // alternating series; each term shrinks by at least 2^-24
            let terms = p() / 24 + 2;
            let mut sum = Real::zero();
            let mut power = self.clone();
            for k in 1..=terms {
                let term = &power / &Real::from_u64(k as u64);
                if k % 2 == 1 {
                    sum += &term;
                } else {
                    sum -= &term;
                }
                power = &power * self;
            }
            sum
        } else {
            (Real::one() + self).ln()
        }
    }

    /// `exp(x) - 1`, accurate for tiny `x`.
    pub fn expm1(&self) -> Self {
        if self.is_zero() {
            return Real::zero();
        }
        if self.log2_abs() < -24.0 {
            let terms = p() / 24 + 2;
            let mut sum = Real::zero();
            let mut term = self.clone();
            for k in 1..=terms {
                sum += &term;
                term = &(&term * self) / &Real::from_u64(k as u64 + 1);
            }
            sum
        } else {
            self.exp() - Real::one()
        }
    }

    /// Multiplies by 2^k exactly.
    pub fn ldexp(&self, k: i32) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut out = self.0.clone();
        if let Some(e) = out.exponent() {
            out.set_exponent(e + k);
        }
        Real(out)
    }

    /// Approximate `log2 |x|`; `-inf` for zero.
    pub fn log2_abs(&self) -> f64 {
        match self.0.as_raw_parts() {
            Some((words, _, _, e, _)) if !self.0.is_zero() => {
                let top = *words.last().unwrap_or(&0);
                if top == 0 {
                    return f64::NEG_INFINITY;
                }
                (top as f64).log2() - 64.0 + e as f64
            }
            _ => f64::NEG_INFINITY,
        }
    }

    /// Correctly rounded conversion to `f64` (saturating outside range).
    pub fn to_f64(&self) -> f64 {
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf() {
            return if self.0.is_inf_pos() { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        let Some((words, _, sign, e, _)) = self.0.as_raw_parts() else {
            return f64::NAN;
        };
        if self.0.is_zero() || words.is_empty() {
            return 0.0;
        }
        let mut top = words[words.len() - 1];
        if words[..words.len() - 1].iter().any(|w| *w != 0) {
            top |= 1;
        }
        // value = top * 2^(e - 64); split the scaling to stay in range
        let shift = e as i64 - 64;
        let mut value = top as f64;
        let mut remaining = shift;
        while remaining > 1000 {
            value *= 2f64.powi(1000);
            remaining -= 1000;
        }
        while remaining < -1000 {
            value *= 2f64.powi(-1000);
            remaining += 1000;
        }
        value *= 2f64.powi(remaining as i32);
        if sign == Sign::Neg {
            -value
        } else {
            value
        }
    }

    /// Smallest integer not below `self`, for nonnegative finite values.
    pub fn ceil_to_biguint(&self) -> Option<BigUint> {
        if !self.is_finite() || self.is_negative() {
            return None;
        }
        let c = self.0.ceil();
        if c.is_zero() {
            return Some(BigUint::from(0u8));
        }
        let (words, _, _, e, _) = c.as_raw_parts()?;
        let mantissa = BigUint::from_slice(
            &words.iter().flat_map(|w| [(*w & 0xffff_ffff) as u32, (*w >> 32) as u32]).collect::<Vec<_>>(),
        );
        let shift = e as i64 - 64 * words.len() as i64;
        Some(if shift >= 0 {
            mantissa << shift as usize
        } else {
            mantissa >> (-shift) as usize
        })
    }

    pub fn max(&self, other: &Real) -> Real {
        if self >= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    pub fn min(&self, other: &Real) -> Real {
        if self <= other {
            self.clone()
        } else {
            other.clone()
        }
    }

    /// `self^k` by repeated squaring.
    pub fn powu(&self, mut k: u64) -> Real {
        let mut base = self.clone();
        let mut acc = Real::one();
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }
}

impl Default for Real {
    fn default() -> Self {
        Real::zero()
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}

impl From<f64> for Real {
    fn from(x: f64) -> Self {
        Real::from_f64(x)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $inner:ident) => {
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                Real(self.0.$inner(&rhs.0, p(), RM))
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                Real(self.0.$inner(&rhs.0, p(), RM))
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $method(self, rhs: &Real) -> Real {
                Real(self.0.$inner(&rhs.0, p(), RM))
            }
        }
        impl $tr<Real> for &Real {
            type Output = Real;
            fn $method(self, rhs: Real) -> Real {
                Real(self.0.$inner(&rhs.0, p(), RM))
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl AddAssign<&Real> for Real {
    fn add_assign(&mut self, rhs: &Real) {
        self.0 = self.0.add(&rhs.0, p(), RM);
    }
}

impl AddAssign<Real> for Real {
    fn add_assign(&mut self, rhs: Real) {
        self.0 = self.0.add(&rhs.0, p(), RM);
    }
}

impl SubAssign<&Real> for Real {
    fn sub_assign(&mut self, rhs: &Real) {
        self.0 = self.0.sub(&rhs.0, p(), RM);
    }
}

impl MulAssign<&Real> for Real {
    fn mul_assign(&mut self, rhs: &Real) {
        self.0 = self.0.mul(&rhs.0, p(), RM);
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(self.0.neg())
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(self.0.clone().neg())
    }
}

impl std::iter::Sum for Real {
    fn sum<I: Iterator<Item = Real>>(iter: I) -> Real {
        iter.fold(Real::zero(), |acc, x| acc + x)
    }
}
