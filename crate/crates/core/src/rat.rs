//! Exact rational scalars.
//!
//! [`Rat`] wraps an arbitrary-precision `BigRational`, which is always kept in
//! lowest terms with a positive denominator. Every numeric quantity in the
//! library is a `Rat`; floats only appear when rendering reports.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// An exact rational number in canonical form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self, Error> {
        let den = den.into();
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Rat(BigRational::new(num.into(), den)))
    }

    /// `num/den` for machine integers. Panics on a zero denominator.
    pub fn frac(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rat(BigRational::new(num.into(), den.into()))
    }

    pub fn int(v: i64) -> Self {
        Rat(BigRational::from_integer(v.into()))
    }

    pub fn from_bigint(v: BigInt) -> Self {
        Rat(BigRational::from_integer(v))
    }

    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    /// `2^-k`.
    pub fn pow2_neg(k: u32) -> Self {
        Rat(BigRational::new(BigInt::one(), BigInt::one() << k))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rat(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        Rat(self.0.recip())
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn signum(&self) -> Ordering {
        self.0.numer().sign().cmp(&Sign::NoSign)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    /// Bits of the numerator magnitude plus bits of the denominator. Zero
    /// counts as one bit so that `0/1` has complexity 2.
    pub fn bit_complexity(&self) -> u64 {
        bits(self.numer()) + bits(self.denom())
    }

    /// The simplest rational (smallest denominator, then smallest numerator
    /// magnitude) in the closed interval `[lo, hi]`.
    pub fn simplest_between(lo: &Rat, hi: &Rat) -> Rat {
        assert!(lo <= hi, "empty interval");
        if lo.is_negative() && !hi.is_negative() {
            return Rat::zero();
        }
        if hi.is_negative() {
            return -Rat::simplest_between(&-hi.clone(), &-lo.clone());
        }
        simplest_nonneg(lo.clone(), hi.clone())
    }

    /// Canonical `num/den` rendering used in every JSON artifact.
    pub fn to_canonical_string(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    /// Parses `num/den`, rejecting anything that is not already canonical.
    pub fn parse_canonical(s: &str) -> Result<Self, Error> {
        let bad = || Error::Parse(format!("non-canonical rational {s:?}"));
        let (n, d) = s.split_once('/').ok_or_else(bad)?;
        if n.is_empty() || d.is_empty() || d.starts_with(['-', '+']) || n.starts_with('+') {
            return Err(bad());
        }
        let num = BigInt::from_str(n).map_err(|_| bad())?;
        let den = BigInt::from_str(d).map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        if !den.is_positive() || !num.gcd(&den).is_one() {
            return Err(bad());
        }
        // Reject leading zeros and "-0".
        let round_trip = format!("{num}/{den}");
        if round_trip != s {
            return Err(bad());
        }
        Ok(Rat(BigRational::new_raw(num, den)))
    }

    /// Decimal rendering with 12 significant digits.
    pub fn to_decimal(&self) -> String {
        format_sig(self.to_f64(), 12)
    }
}

fn bits(v: &BigInt) -> u64 {
    v.bits().max(1)
}

fn simplest_nonneg(lo: Rat, hi: Rat) -> Rat {
    // Continued-fraction descent: if an integer fits, take the smallest one,
    // otherwise recurse on the reciprocals of the fractional parts.
    let fl = lo.floor();
    let lo_is_int = lo.is_integer();
    let cand = if lo_is_int { fl.clone() } else { &fl + 1 };
    if Rat::from_bigint(cand.clone()) <= hi {
        return Rat::from_bigint(cand);
    }
    let base = Rat::from_bigint(fl);
    let lo_f = &lo - &base;
    let hi_f = &hi - &base;
    // lo_f > 0 here because lo is not an integer.
    let inner = simplest_nonneg(hi_f.recip(), lo_f.recip());
    base + inner.recip()
}

fn format_sig(v: f64, sig: i32) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v.is_finite() { "0".into() } else { format!("{v}") };
    }
    let mag = v.abs().log10().floor() as i32;
    let decimals = (sig - 1 - mag).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        let t = s.trim_end_matches('0').trim_end_matches('.');
        if t == "-0" { "0".into() } else { t.to_string() }
    } else {
        s
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_canonical_string())
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Rat::parse_canonical(&s).map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Rat {
    fn from(v: i64) -> Self {
        Rat::int(v)
    }
}

impl From<BigRational> for Rat {
    fn from(v: BigRational) -> Self {
        Rat(v)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                Rat(self.0.$m(rhs.0))
            }
        }
        impl $tr<&Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: &Rat) -> Rat {
                Rat(self.0.$m(&rhs.0))
            }
        }
        impl $tr<&Rat> for &Rat {
            type Output = Rat;
            fn $m(self, rhs: &Rat) -> Rat {
                Rat((&self.0).$m(&rhs.0))
            }
        }
        impl $tr<Rat> for &Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                Rat((&self.0).$m(rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl AddAssign<&Rat> for Rat {
    fn add_assign(&mut self, rhs: &Rat) {
        self.0 += &rhs.0;
    }
}

impl AddAssign<Rat> for Rat {
    fn add_assign(&mut self, rhs: Rat) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rat> for Rat {
    fn sub_assign(&mut self, rhs: &Rat) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rat> for Rat {
    fn mul_assign(&mut self, rhs: &Rat) {
        self.0 *= &rhs.0;
    }
}

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Neg for &Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-&self.0)
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |acc, x| acc + x)
    }
}

/// Dot product of two equal-length vectors.
pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = BigRational::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc += &x.0 * &y.0;
        }
    }
    Rat(acc)
}

/// Least common multiple of the denominators of a vector.
pub fn common_denominator(v: &[Rat]) -> BigInt {
    v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Parses a whole vector of canonical rationals.
pub fn parse_vec(items: &[String]) -> Result<Vec<Rat>, Error> {
    items.iter().map(|s| Rat::parse_canonical(s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_after_arithmetic() {
        let a = Rat::frac(2, 4);
        assert_eq!(a.numer(), &BigInt::from(1));
        assert_eq!(a.denom(), &BigInt::from(2));
        let b = Rat::frac(3, -6);
        assert_eq!(b.to_canonical_string(), "-1/2");
        assert!((a + b).is_zero());
    }

    #[test]
    fn parse_rejects_non_canonical() {
        assert!(Rat::parse_canonical("1/2").is_ok());
        assert!(Rat::parse_canonical("0/1").is_ok());
        assert!(Rat::parse_canonical("-3/7").is_ok());
        for bad in ["2/4", "3/0", "1/-2", "1", "1.5", "01/2", "-0/1", "+1/2", "1/ 2", ""] {
            assert!(Rat::parse_canonical(bad).is_err(), "{bad} accepted");
        }
    }

    #[test]
    fn bit_complexity_counts_both_parts() {
        assert_eq!(Rat::zero().bit_complexity(), 2);
        assert_eq!(Rat::frac(3, 4).bit_complexity(), 2 + 3);
        assert_eq!(Rat::frac(-5, 8).bit_complexity(), 3 + 4);
    }

    #[test]
    fn simplest_between_examples() {
        assert_eq!(Rat::simplest_between(&Rat::frac(1, 3), &Rat::frac(1, 2)), Rat::frac(1, 2));
        assert_eq!(Rat::simplest_between(&Rat::frac(3, 10), &Rat::frac(34, 100)), Rat::frac(1, 3));
        assert_eq!(Rat::simplest_between(&Rat::frac(-1, 3), &Rat::frac(1, 5)), Rat::zero());
        assert_eq!(Rat::simplest_between(&Rat::frac(-7, 5), &Rat::frac(-4, 3)), Rat::frac(-4, 3));
        assert_eq!(Rat::simplest_between(&Rat::frac(5, 2), &Rat::frac(5, 2)), Rat::frac(5, 2));
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(Rat::frac(1, 3).to_decimal(), "0.333333333333");
        assert_eq!(Rat::int(12).to_decimal(), "12");
        assert_eq!(Rat::frac(-5, 2).to_decimal(), "-2.5");
        assert_eq!(Rat::zero().to_decimal(), "0");
    }

    proptest::proptest! {
        #[test]
        fn simplest_lies_inside(a in -1000i64..1000, b in 1i64..200, c in 0i64..1000, d in 1i64..200) {
            let lo = Rat::frac(a, b);
            let hi = &lo + Rat::frac(c, d);
            let s = Rat::simplest_between(&lo, &hi);
            proptest::prop_assert!(lo <= s && s <= hi);
            // No rational with a smaller denominator fits.
            let den = s.denom().to_i64().unwrap();
            for q in 1..den {
                let k = (&lo * Rat::int(q)).ceil();
                proptest::prop_assert!(Rat::from_bigint(k) / Rat::int(q) > hi);
            }
        }

        #[test]
        fn canonical_string_round_trips(a in -100000i64..100000, b in 1i64..100000) {
            let r = Rat::frac(a, b);
            proptest::prop_assert_eq!(Rat::parse_canonical(&r.to_canonical_string()).unwrap(), r);
        }
    }
}
