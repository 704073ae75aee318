//! Scalar laws for powers of `cos²` at tiny angles.
//!
//! `ln cos²α` is formed as `ln1p(-sin²α)` and `1 - cos^{2n}α` as
//! `-expm1(n ln cos²α)`, so both stay accurate when `α` is far below
//! the working epsilon's square root.

use crate::error::{Error, Result};
use crate::linalg::real::precision_bits;
use crate::linalg::Real;
use crate::wordexpr::BigExponent;

/// `ln cos²α`.
pub fn ln_cos_sq(angle: &Real) -> Real {
    (-angle.sin().square()).ln1p()
}

/// `cos^{2n} α`.
pub fn cos_power(angle: &Real, n: &BigExponent) -> Real {
    (n.to_real() * ln_cos_sq(angle)).exp()
}

/// `1 - cos^{2n} α`.
pub fn cos_power_defect(angle: &Real, n: &BigExponent) -> Real {
    -(n.to_real() * ln_cos_sq(angle)).expm1()
}

/// Strict `a < b`, treating values within a few ulps of `b` as equal so
/// that exact boundary cases such as `cos⁴(π/4) < 1/4` resolve as false.
pub fn strictly_below(a: &Real, b: &Real) -> bool {
    let slack = b.abs().ldexp(-(precision_bits() as i32 - 40));
    a < &(b - &slack)
}

/// Smallest `n ≥ 1` with `cos^{2n}(angle) < target`.
pub fn minimal_power(angle: &Real, target: &Real) -> Result<BigExponent> {
    let half_pi = Real::pi().ldexp(-1);
    if !(angle > &Real::zero() && angle < &half_pi) {
        return Err(Error::AngleOutOfRange(angle.to_f64()));
    }
    if !(target > &Real::zero() && target < &Real::one()) {
        return Err(Error::TargetOutOfRange(target.to_f64()));
    }
    let guess = (target.ln() / ln_cos_sq(angle)).ceil_to_biguint().unwrap_or_default();
    let mut n = BigExponent::exact(guess).max(BigExponent::one());
    while !strictly_below(&cos_power(angle, &n), target) {
        n = n.add_u64(1);
    }
    loop {
        let prev = match n.as_exact() {
            Some(v) if n > BigExponent::one() => BigExponent::exact(v - 1u32),
            _ => break,
        };
        if strictly_below(&cos_power(angle, &prev), target) {
            n = prev;
        } else {
            break;
        }
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(angle: f64, target: f64) -> u64 {
        let c2 = angle.cos().powi(2);
        let mut n = 1;
        while c2.powi(n as i32) >= target {
            n += 1;
        }
        n
    }

    #[test]
    fn third_of_pi() {
        let n = minimal_power(&(Real::pi() / Real::from_u64(3)), &Real::from_f64(0.5)).unwrap();
        assert_eq!(n, BigExponent::from_u64(1));
    }

    #[test]
    fn tenth_radian() {
        let n = minimal_power(&Real::from_f64(0.1), &Real::from_f64(0.01)).unwrap();
        assert_eq!(n, BigExponent::from_u64(460));
        assert_eq!(brute(0.1, 0.01), 460);
    }

    #[test]
    fn quarter_pi_boundaries() {
        let q = Real::pi() / Real::from_u64(4);
        assert_eq!(minimal_power(&q, &Real::from_f64(0.3)).unwrap(), BigExponent::from_u64(2));
        // cos⁴(π/4) = 1/4 exactly, so strictness forces a third factor
        assert_eq!(minimal_power(&q, &Real::from_f64(0.25)).unwrap(), BigExponent::from_u64(3));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(minimal_power(&Real::zero(), &Real::from_f64(0.5)), Err(Error::AngleOutOfRange(_))));
        assert!(matches!(minimal_power(&Real::pi().ldexp(-1), &Real::from_f64(0.5)), Err(Error::AngleOutOfRange(_))));
        assert!(matches!(minimal_power(&Real::from_f64(0.3), &Real::one()), Err(Error::TargetOutOfRange(_))));
    }

    #[test]
    fn tiny_angle_defect() {
        let a = Real::from_f64(1e-34);
        let n = BigExponent::from_u64(1);
        let d = cos_power_defect(&a, &n).to_f64();
        assert!((d / 1e-68 - 1.0).abs() < 1e-12);
        let huge = BigExponent::from_decimal(&format!("1{}", "0".repeat(68))).unwrap();
        assert!((cos_power(&a, &huge).to_f64() - (-1.0f64).exp()).abs() < 1e-12);
    }
}
