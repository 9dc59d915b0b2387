//! Word-size prime-field arithmetic used by the multi-modular resultant and
//! by the certificate checker's specialization trials.

use std::sync::Mutex;

use num_bigint::{BigInt, Sign};
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::rational::BigRat;

/// Arithmetic modulo an odd prime below 2^63, values kept in Montgomery form.
#[derive(Clone, Copy, Debug)]
pub struct Field {
    p: u64,
    ninv: u64,
    r2: u64,
}

impl Field {
    pub fn new(p: u64) -> Self {
        assert!(p % 2 == 1 && p < (1 << 63));
        // Newton iteration for p^{-1} mod 2^64.
        let mut inv: u64 = 1;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r as u128 * r as u128) % p as u128) as u64;
        Field { p, ninv: inv.wrapping_neg(), r2 }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.ninv);
        let u = ((t + m as u128 * self.p as u128) >> 64) as u64;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        self.redc(a as u128 * b as u128)
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    pub fn from_u64(&self, a: u64) -> u64 {
        self.mul(a % self.p, self.r2)
    }

    pub fn to_u64(&self, a: u64) -> u64 {
        self.redc(a as u128)
    }

    pub fn one(&self) -> u64 {
        self.from_u64(1)
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let mut base = a;
        let mut acc = self.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        if a == 0 {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }

    pub fn from_bigint(&self, x: &BigInt) -> u64 {
        let (sign, mag) = (x.sign(), x.magnitude());
        let r = (mag % self.p).to_u64().expect("residue fits in u64");
        let r = self.from_u64(r);
        if sign == Sign::Minus {
            self.neg(r)
        } else {
            r
        }
    }

    /// Image of a rational, or `None` when the denominator vanishes mod p.
    pub fn from_rat(&self, x: &BigRat) -> Option<u64> {
        let n = self.from_bigint(x.numer());
        if x.denom().is_one() {
            return Some(n);
        }
        let d = self.inv(self.from_bigint(x.denom()))?;
        Some(self.mul(n, d))
    }
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let f = Field::new(n);
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let one = f.one();
    let minus_one = f.neg(one);
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = f.pow(f.from_u64(a), d);
        if x == one || x == minus_one {
            continue;
        }
        for _ in 1..s {
            x = f.mul(x, x);
            if x == minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

static PRIMES: Mutex<Vec<u64>> = Mutex::new(Vec::new());

/// The `i`-th prime in a fixed descending list starting just below 2^62.
pub fn prime(i: usize) -> u64 {
    let mut list = PRIMES.lock().expect("prime table poisoned");
    let mut cand = list.last().copied().unwrap_or((1u64 << 62) + 1);
    while list.len() <= i {
        cand -= 2;
        while !is_prime_u64(cand) {
            cand -= 2;
        }
        list.push(cand);
    }
    list[i]
}

/// A random prime in [2^61, 2^62).
pub fn random_prime<R: Rng>(rng: &mut R) -> u64 {
    loop {
        let c = rng.gen_range((1u64 << 61)..(1u64 << 62)) | 1;
        if is_prime_u64(c) {
            return c;
        }
    }
}

fn trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

/// Remainder of `a` by `b` (ascending coefficient order, `b` with nonzero lead).
fn rem(f: &Field, a: &mut Vec<u64>, b: &[u64]) {
    let db = b.len() - 1;
    let lead_inv = f.inv(b[db]).expect("nonzero leading coefficient");
    while a.len() > db {
        let top = *a.last().expect("non-empty");
        if top != 0 {
            let q = f.mul(top, lead_inv);
            let shift = a.len() - 1 - db;
            for (k, &bk) in b.iter().enumerate() {
                a[shift + k] = f.sub(a[shift + k], f.mul(q, bk));
            }
        }
        a.pop();
    }
    trim(a);
}

/// Resultant of two univariate polynomials over the field, given in ascending
/// coefficient order with nonzero leading coefficients.
pub fn univariate_resultant(f: &Field, a: &[u64], b: &[u64]) -> u64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut acc = f.one();
    loop {
        let m = a.len() - 1;
        let n = b.len() - 1;
        if n == 0 {
            return f.mul(acc, f.pow(b[0], m as u64));
        }
        if m == 0 {
            return f.mul(acc, f.pow(a[0], n as u64));
        }
        let mut r = a;
        rem(f, &mut r, &b);
        if r.is_empty() {
            return 0;
        }
        let k = r.len() - 1;
        if (m * n) % 2 == 1 {
            acc = f.neg(acc);
        }
        acc = f.mul(acc, f.pow(b[n], (m - k) as u64));
        a = b;
        b = r;
    }
}

/// Determinant of a dense square matrix over the field by Gaussian elimination.
pub fn determinant(f: &Field, mut m: Vec<Vec<u64>>) -> u64 {
    let n = m.len();
    let mut det = f.one();
    for k in 0..n {
        let Some(piv) = (k..n).find(|&i| m[i][k] != 0) else {
            return 0;
        };
        if piv != k {
            m.swap(piv, k);
            det = f.neg(det);
        }
        det = f.mul(det, m[k][k]);
        let inv = f.inv(m[k][k]).expect("pivot is nonzero");
        for i in k + 1..n {
            if m[i][k] == 0 {
                continue;
            }
            let factor = f.mul(m[i][k], inv);
            let (top, bottom) = m.split_at_mut(i);
            let pivot_row = &top[k];
            let row = &mut bottom[0];
            for j in k..n {
                row[j] = f.sub(row[j], f.mul(factor, pivot_row[j]));
            }
        }
    }
    det
}

/// Newton interpolation: the coefficients (ascending) of the unique
/// polynomial of degree < len through the points `(xs[i], ys[i])`.
pub fn interpolate(f: &Field, xs: &[u64], ys: &[u64]) -> Vec<u64> {
    let n = xs.len();
    let mut dd = ys.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            let num = f.sub(dd[i], dd[i - 1]);
            let den = f.sub(xs[i], xs[i - j]);
            dd[i] = f.mul(num, f.inv(den).expect("distinct nodes"));
        }
    }
    let mut coeffs = vec![0u64; n];
    for i in (0..n).rev() {
        // coeffs = coeffs * (x - xs[i]) + dd[i]
        for k in (1..n).rev() {
            coeffs[k] = f.sub(coeffs[k - 1], f.mul(coeffs[k], xs[i]));
        }
        coeffs[0] = f.sub(dd[i], f.mul(coeffs[0], xs[i]));
    }
    coeffs
}

/// Incremental Chinese remaindering of one integer.
#[derive(Clone, Debug)]
pub struct Crt {
    value: BigInt,
    modulus: BigInt,
}

impl Default for Crt {
    fn default() -> Self {
        Crt { value: BigInt::zero(), modulus: BigInt::one() }
    }
}

impl Crt {
    /// Adds the residue `r` (plain form, not Montgomery) modulo `p`.
    pub fn push(&mut self, r: u64, p: u64) {
        let f = Field::new(p);
        let cur = f.from_bigint(&self.value);
        let minv = f.inv(f.from_bigint(&self.modulus)).expect("moduli are coprime");
        let t = f.mul(f.sub(f.from_u64(r), cur), minv);
        let t = f.to_u64(t);
        self.value += &self.modulus * BigInt::from(t);
        self.modulus *= BigInt::from(p);
    }

    pub fn modulus_bits(&self) -> u64 {
        self.modulus.bits()
    }

    /// Representative in the symmetric range.
    pub fn symmetric(&self) -> BigInt {
        let half: BigInt = &self.modulus >> 1;
        if self.value > half {
            &self.value - &self.modulus
        } else {
            self.value.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn montgomery_matches_plain() {
        let p = prime(0);
        let f = Field::new(p);
        let (a, b) = (123456789012345u64, 987654321098765u64);
        let plain = ((a as u128 * b as u128) % p as u128) as u64;
        assert_eq!(f.to_u64(f.mul(f.from_u64(a), f.from_u64(b))), plain);
        let x = f.from_u64(a);
        assert_eq!(f.mul(x, f.inv(x).unwrap()), f.one());
    }

    #[test]
    fn primes_are_prime_and_distinct() {
        assert!(is_prime_u64(1_000_000_007));
        assert!(!is_prime_u64(1_000_000_007 * 3));
        let ps: Vec<u64> = (0..20).map(prime).collect();
        assert!(ps.windows(2).all(|w| w[0] > w[1]));
        assert!(ps.iter().all(|&p| p < (1 << 62)));
    }

    #[test]
    fn small_resultants() {
        let f = Field::new(prime(1));
        let e = |v: i64| f.from_bigint(&BigInt::from(v));
        // Res(x^2 + 1, x - 1) = 2
        let r = univariate_resultant(&f, &[e(1), e(0), e(1)], &[e(-1), e(1)]);
        assert_eq!(r, e(2));
        // Res(x^2 - 1, x - 1) = 0
        assert_eq!(univariate_resultant(&f, &[e(-1), e(0), e(1)], &[e(-1), e(1)]), 0);
    }

    #[test]
    fn determinant_small() {
        let f = Field::new(prime(2));
        let e = |v: i64| f.from_bigint(&BigInt::from(v));
        let m = vec![vec![e(1), e(0), e(1)], vec![e(1), e(-1), e(0)], vec![e(0), e(1), e(-1)]];
        assert_eq!(determinant(&f, m), e(2));
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let f = Field::new(prime(3));
        let coeffs = [5u64, 0, 7, 3].map(|c| f.from_u64(c));
        let xs: Vec<u64> = (1..=4).map(|x| f.from_u64(x)).collect();
        let ys: Vec<u64> = xs
            .iter()
            .map(|&x| coeffs.iter().rev().fold(0, |acc, &c| f.add(f.mul(acc, x), c)))
            .collect();
        assert_eq!(interpolate(&f, &xs, &ys), coeffs.to_vec());
    }

    #[test]
    fn crt_reconstructs_negative() {
        let target = BigInt::from(-123456789123456789i64) * BigInt::from(1u64 << 40);
        let mut crt = Crt::default();
        let mut i = 0;
        while crt.modulus_bits() < target.bits() + 2 {
            let p = prime(i);
            let f = Field::new(p);
            crt.push(f.to_u64(f.from_bigint(&target)), p);
            i += 1;
        }
        assert_eq!(crt.symmetric(), target);
    }
}
