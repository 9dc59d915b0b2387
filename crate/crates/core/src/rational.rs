//! Exact rationals over arbitrary-precision integers.
//!
//! Values are always stored reduced with a positive denominator, so equality
//! is structural and the textual form is canonical.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::PolyError;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct BigRat {
    num: BigInt,
    den: BigInt,
}

impl BigRat {
    /// Builds `p/q` in lowest terms. Fails when `q` is zero.
    pub fn new(p: BigInt, q: BigInt) -> Result<Self, PolyError> {
        if q.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        Ok(Self::reduce(p, q))
    }

    pub fn from_ints(p: i64, q: i64) -> Result<Self, PolyError> {
        Self::new(BigInt::from(p), BigInt::from(q))
    }

    pub fn from_int<T: Into<BigInt>>(v: T) -> Self {
        BigRat { num: v.into(), den: BigInt::one() }
    }

    pub fn zero() -> Self {
        BigRat { num: BigInt::zero(), den: BigInt::one() }
    }

    pub fn one() -> Self {
        BigRat { num: BigInt::one(), den: BigInt::one() }
    }

    fn reduce(mut p: BigInt, mut q: BigInt) -> Self {
        if q.is_negative() {
            p = -p;
            q = -q;
        }
        if p.is_zero() {
            return Self::zero();
        }
        if !q.is_one() {
            let g = p.gcd(&q);
            if !g.is_one() {
                p /= &g;
                q /= &g;
            }
        }
        BigRat { num: p, den: q }
    }

    pub fn numer(&self) -> &BigInt {
        &self.num
    }

    pub fn denom(&self) -> &BigInt {
        &self.den
    }

    pub fn into_parts(self) -> (BigInt, BigInt) {
        (self.num, self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.den.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.num.is_positive()
    }

    pub fn signum(&self) -> i32 {
        match self.num.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        BigRat { num: self.num.abs(), den: self.den.clone() }
    }

    pub fn inv(&self) -> Result<Self, PolyError> {
        if self.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        Ok(Self::reduce(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, other: &BigRat) -> Result<Self, PolyError> {
        if other.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        Ok(Self::reduce(&self.num * &other.den, &self.den * &other.num))
    }

    pub fn pow(&self, e: u32) -> Self {
        BigRat { num: num_traits::pow(self.num.clone(), e as usize), den: num_traits::pow(self.den.clone(), e as usize) }
    }

    /// Bit length of numerator plus denominator, used by the resource guard.
    pub fn bits(&self) -> u64 {
        self.num.bits() + self.den.bits()
    }

    pub fn to_f64(&self) -> f64 {
        match (self.num.to_f64(), self.den.to_f64()) {
            (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
            _ => {
                // Shift both down so the quotient fits in a double.
                let shift = self.num.bits().max(self.den.bits()).saturating_sub(1000);
                let a = (&self.num >> shift).to_f64().unwrap_or(f64::NAN);
                let b = (&self.den >> shift).to_f64().unwrap_or(f64::NAN);
                a / b
            }
        }
    }
}

impl Default for BigRat {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for BigRat {
    fn from(v: i64) -> Self {
        Self::from_int(v)
    }
}

impl From<BigInt> for BigRat {
    fn from(v: BigInt) -> Self {
        Self::from_int(v)
    }
}

impl fmt::Display for BigRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for BigRat {
    type Err = PolyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || PolyError::Parse(format!("bad rational literal '{s}'"));
        match s.split_once('/') {
            Some((a, b)) => {
                let p = BigInt::from_str(a.trim()).map_err(|_| bad())?;
                let q = BigInt::from_str(b.trim()).map_err(|_| bad())?;
                BigRat::new(p, q)
            }
            None => Ok(BigRat::from_int(BigInt::from_str(s).map_err(|_| bad())?)),
        }
    }
}

impl PartialOrd for BigRat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BigRat {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.den == other.den {
            return self.num.cmp(&other.num);
        }
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

impl<'a> Add<&'a BigRat> for &'a BigRat {
    type Output = BigRat;
    fn add(self, rhs: &BigRat) -> BigRat {
        if self.den.is_one() && rhs.den.is_one() {
            return BigRat { num: &self.num + &rhs.num, den: BigInt::one() };
        }
        if self.den == rhs.den {
            return BigRat::reduce(&self.num + &rhs.num, self.den.clone());
        }
        BigRat::reduce(&self.num * &rhs.den + &rhs.num * &self.den, &self.den * &rhs.den)
    }
}

impl<'a> Sub<&'a BigRat> for &'a BigRat {
    type Output = BigRat;
    fn sub(self, rhs: &BigRat) -> BigRat {
        if self.den.is_one() && rhs.den.is_one() {
            return BigRat { num: &self.num - &rhs.num, den: BigInt::one() };
        }
        if self.den == rhs.den {
            return BigRat::reduce(&self.num - &rhs.num, self.den.clone());
        }
        BigRat::reduce(&self.num * &rhs.den - &rhs.num * &self.den, &self.den * &rhs.den)
    }
}

impl<'a> Mul<&'a BigRat> for &'a BigRat {
    type Output = BigRat;
    fn mul(self, rhs: &BigRat) -> BigRat {
        if self.den.is_one() && rhs.den.is_one() {
            return BigRat { num: &self.num * &rhs.num, den: BigInt::one() };
        }
        if self.is_zero() || rhs.is_zero() {
            return BigRat::zero();
        }
        // Cross-cancel first to keep the intermediate products small.
        let g1 = self.num.gcd(&rhs.den);
        let g2 = rhs.num.gcd(&self.den);
        BigRat {
            num: (&self.num / &g1) * (&rhs.num / &g2),
            den: (&self.den / &g2) * (&rhs.den / &g1),
        }
    }
}

impl<'a> Div<&'a BigRat> for &'a BigRat {
    type Output = BigRat;
    /// Panics on division by zero; use [`BigRat::checked_div`] for a fallible form.
    fn div(self, rhs: &BigRat) -> BigRat {
        self.checked_div(rhs).expect("rational division by zero")
    }
}

impl Neg for BigRat {
    type Output = BigRat;
    fn neg(self) -> BigRat {
        BigRat { num: -self.num, den: self.den }
    }
}

impl Neg for &BigRat {
    type Output = BigRat;
    fn neg(self) -> BigRat {
        BigRat { num: -&self.num, den: self.den.clone() }
    }
}

impl AddAssign<&BigRat> for BigRat {
    fn add_assign(&mut self, rhs: &BigRat) {
        if self.den.is_one() && rhs.den.is_one() {
            self.num += &rhs.num;
        } else {
            *self = &*self + rhs;
        }
    }
}

impl SubAssign<&BigRat> for BigRat {
    fn sub_assign(&mut self, rhs: &BigRat) {
        if self.den.is_one() && rhs.den.is_one() {
            self.num -= &rhs.num;
        } else {
            *self = &*self - rhs;
        }
    }
}

impl MulAssign<&BigRat> for BigRat {
    fn mul_assign(&mut self, rhs: &BigRat) {
        if self.den.is_one() && rhs.den.is_one() {
            self.num *= &rhs.num;
        } else {
            *self = &*self * rhs;
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<BigRat> for BigRat {
            type Output = BigRat;
            fn $m(self, rhs: BigRat) -> BigRat {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a BigRat> for BigRat {
            type Output = BigRat;
            fn $m(self, rhs: &BigRat) -> BigRat {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

/// Convenience constructor used throughout tests and table construction.
pub fn rat(p: i64, q: i64) -> BigRat {
    BigRat::from_ints(p, q).expect("zero denominator")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_reduces() {
        let r = BigRat::from_ints(6, 4).unwrap();
        assert_eq!(r.to_string(), "3/2");
        assert_eq!(BigRat::from_ints(3, -6).unwrap().to_string(), "-1/2");
        assert_eq!(BigRat::from_ints(0, -5).unwrap(), BigRat::zero());
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(matches!(BigRat::from_ints(1, 0), Err(PolyError::DivisionByZero)));
        assert!(BigRat::zero().inv().is_err());
    }

    #[test]
    fn arithmetic() {
        assert_eq!(rat(1, 2) + rat(1, 3), rat(5, 6));
        assert_eq!(rat(1, 2) - rat(1, 2), BigRat::zero());
        assert_eq!(rat(2, 3) * rat(9, 4), rat(3, 2));
        assert_eq!(rat(2, 3) / rat(4, 9), rat(3, 2));
        assert!(rat(-1, 3) < rat(1, 4));
        assert_eq!(rat(-2, 3).pow(3), rat(-8, 27));
    }

    #[test]
    fn parse_round_trip() {
        for s in ["0", "-7", "3/2", "-25/6", "123456789012345678901234567891/7"] {
            assert_eq!(s.parse::<BigRat>().unwrap().to_string(), s);
        }
        assert_eq!("4/6".parse::<BigRat>().unwrap().to_string(), "2/3");
        assert!("1/0".parse::<BigRat>().is_err());
        assert!("x".parse::<BigRat>().is_err());
    }
}
