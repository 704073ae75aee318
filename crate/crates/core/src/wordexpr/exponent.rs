use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::Real;

/// Exponents below this bit length must be stored exactly.
pub const EXACT_BITS: u64 = 127;

/// Nonnegative integer exponent, possibly astronomically large.
///
/// `Scaled` holds `mantissa · 2^exp2` with `mantissa ∈ [1, 2)` and is only
/// legal for values of at least 2^127.
#[derive(Clone, Debug)]
pub enum BigExponent {
    Exact(BigUint),
    Scaled { mantissa: f64, exp2: i64 },
}

impl BigExponent {
    pub fn from_u64(n: u64) -> Self {
        BigExponent::Exact(BigUint::from(n))
    }

    pub fn zero() -> Self {
        BigExponent::Exact(BigUint::zero())
    }

    pub fn one() -> Self {
        BigExponent::Exact(BigUint::one())
    }

    pub fn exact(n: BigUint) -> Self {
        BigExponent::Exact(n)
    }

    pub fn scaled(mantissa: f64, exp2: i64) -> Result<Self> {
        if !(mantissa.is_finite() && mantissa > 0.0) {
            return Err(Error::InvalidExponent(format!("mantissa {mantissa}")));
        }
        let (m, e) = normalize(mantissa, exp2);
        if e < EXACT_BITS as i64 {
            return Err(Error::ScaledTooSmall);
        }
        Ok(BigExponent::Scaled { mantissa: m, exp2: e })
    }

    /// Parses `"460"` (exact) or `"1.5*2^230"` (scaled).
    pub fn from_decimal(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((m, e)) = s.split_once("*2^") {
            let mantissa: f64 = m.parse().map_err(|_| Error::InvalidExponent(s.to_string()))?;
            let exp2: i64 = e.parse().map_err(|_| Error::InvalidExponent(s.to_string()))?;
            return BigExponent::scaled(mantissa, exp2);
        }
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::InvalidExponent(s.to_string()));
        }
        BigUint::parse_bytes(s.as_bytes(), 10)
            .map(BigExponent::Exact)
            .ok_or_else(|| Error::InvalidExponent(s.to_string()))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, BigExponent::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&BigUint> {
        match self {
            BigExponent::Exact(n) => Some(n),
            BigExponent::Scaled { .. } => None,
        }
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.as_exact().and_then(|n| n.to_u64())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, BigExponent::Exact(n) if n.is_zero())
    }

    pub fn to_real(&self) -> Real {
        match self {
            BigExponent::Exact(n) => Real::from_biguint(n),
            BigExponent::Scaled { mantissa, exp2 } => Real::from_f64(*mantissa).ldexp(*exp2 as i32),
        }
    }

    /// `(mantissa, exp2)` view, mantissa in [1, 2); `None` for zero.
    fn parts(&self) -> Option<(f64, i64)> {
        match self {
            BigExponent::Scaled { mantissa, exp2 } => Some((*mantissa, *exp2)),
            BigExponent::Exact(n) if n.is_zero() => None,
            BigExponent::Exact(n) => {
                let bits = n.bits() as i64;
                let shift = (bits - 64).max(0);
                let top = (n >> shift as usize).to_u64().unwrap_or(u64::MAX);
                Some(normalize(top as f64, shift))
            }
        }
    }

    pub fn log10(&self) -> f64 {
        match self.parts() {
            None => f64::NEG_INFINITY,
            Some((m, e)) => m.log10() + e as f64 * std::f64::consts::LOG10_2,
        }
    }

    pub fn mul(&self, other: &BigExponent) -> BigExponent {
        match (self, other) {
            (BigExponent::Exact(a), BigExponent::Exact(b)) => BigExponent::Exact(a * b),
            _ => match (self.parts(), other.parts()) {
                (Some((m1, e1)), Some((m2, e2))) => from_parts(m1 * m2, e1 + e2),
                _ => BigExponent::zero(),
            },
        }
    }

    pub fn add(&self, other: &BigExponent) -> BigExponent {
        match (self, other) {
            (BigExponent::Exact(a), BigExponent::Exact(b)) => BigExponent::Exact(a + b),
            _ => match (self.parts(), other.parts()) {
                (Some((m1, e1)), Some((m2, e2))) => {
                    let (hi, lo) = if e1 >= e2 { ((m1, e1), (m2, e2)) } else { ((m2, e2), (m1, e1)) };
                    let gap = (hi.1 - lo.1).min(2000) as i32;
                    from_parts(hi.0 + lo.0 * 2f64.powi(-gap), hi.1)
                }
                (Some(_), None) => self.clone(),
                (None, _) => other.clone(),
            },
        }
    }

    pub fn add_u64(&self, k: u64) -> BigExponent {
        self.add(&BigExponent::from_u64(k))
    }

    pub fn mul_u64(&self, k: u64) -> BigExponent {
        self.mul(&BigExponent::from_u64(k))
    }
}

fn normalize(mut m: f64, mut e: i64) -> (f64, i64) {
    while m >= 2.0 {
        m /= 2.0;
        e += 1;
    }
    while m < 1.0 {
        m *= 2.0;
        e -= 1;
    }
    (m, e)
}

fn from_parts(m: f64, e: i64) -> BigExponent {
    let (m, e) = normalize(m, e);
    if e >= EXACT_BITS as i64 {
        BigExponent::Scaled { mantissa: m, exp2: e }
    } else {
        // small enough to be exact; the mantissa carries 53 bits
        let bits = m.to_bits();
        let frac = (bits & ((1u64 << 52) - 1)) | (1u64 << 52);
        let n = BigUint::from(frac);
        BigExponent::Exact(if e >= 52 { n << (e - 52) as usize } else { n >> (52 - e) as usize })
    }
}

impl PartialEq for BigExponent {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for BigExponent {}

impl PartialOrd for BigExponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BigExponent {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (BigExponent::Exact(a), BigExponent::Exact(b)) => a.cmp(b),
            _ => match (self.parts(), other.parts()) {
                (None, None) => Ordering::Equal,
                (None, Some(_)) => Ordering::Less,
                (Some(_), None) => Ordering::Greater,
                (Some((m1, e1)), Some((m2, e2))) => {
                    e1.cmp(&e2).then(m1.partial_cmp(&m2).unwrap_or(Ordering::Equal))
                }
            },
        }
    }
}

impl Hash for BigExponent {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            BigExponent::Exact(n) => {
                0u8.hash(state);
                n.hash(state);
            }
            BigExponent::Scaled { mantissa, exp2 } => {
                1u8.hash(state);
                mantissa.to_bits().hash(state);
                exp2.hash(state);
            }
        }
    }
}

impl fmt::Display for BigExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BigExponent::Exact(n) => write!(f, "{n}"),
            BigExponent::Scaled { mantissa, exp2 } => write!(f, "{mantissa}*2^{exp2}"),
        }
    }
}

impl FromStr for BigExponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BigExponent::from_decimal(s)
    }
}

impl From<u64> for BigExponent {
    fn from(n: u64) -> Self {
        BigExponent::from_u64(n)
    }
}

impl From<BigUint> for BigExponent {
    fn from(n: BigUint) -> Self {
        BigExponent::Exact(n)
    }
}

impl serde::Serialize for BigExponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for BigExponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        BigExponent::from_decimal(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_round_trip() {
        let s = "1188800000000000000000000000000000000000000000000000000000000000000000";
        let n = BigExponent::from_decimal(s).unwrap();
        assert!(n.is_exact());
        assert_eq!(n.to_string(), s);
    }

    #[test]
    fn scaled_requires_large_values() {
        assert_eq!(BigExponent::scaled(1.5, 100), Err(Error::ScaledTooSmall));
        let big = BigExponent::scaled(1.5, 230).unwrap();
        assert_eq!(big.to_string(), "1.5*2^230");
        assert_eq!(BigExponent::from_decimal("1.5*2^230").unwrap(), big);
    }

    #[test]
    fn arithmetic_and_ordering() {
        let a = BigExponent::from_u64(460);
        let b = a.mul_u64(3).add_u64(2);
        assert_eq!(b, BigExponent::from_u64(1382));
        assert!(a < b);
        let s = BigExponent::scaled(1.0, 200).unwrap();
        assert!(s > b);
        assert!(s.mul(&a) > s);
        assert!((BigExponent::from_u64(1000).log10() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_garbage() {
        assert!(BigExponent::from_decimal("-3").is_err());
        assert!(BigExponent::from_decimal("").is_err());
        assert!(BigExponent::from_decimal("1e5").is_err());
    }
}
