//! Field arithmetic: word-sized prime fields and exact rationals behind a
//! common trait, plus prime sampling with deterministic Miller-Rabin.

use crate::error::Error;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use std::cell::Cell;
use std::fmt::Debug;

/// Largest prime below 2^62, used as the modulus cap for sampled fields.
pub const P62: u64 = 4_611_686_018_427_387_847;

/// Exact field arithmetic dispatched through a context object, so the same
/// elimination code runs over F_p and over the rationals.
pub trait Field {
    type Elem: Clone + PartialEq + Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse; inverting zero is an error.
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem, Error>;
    fn is_zero(&self, a: &Self::Elem) -> bool {
        *a == self.zero()
    }
    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem, Error> {
        Ok(self.mul(a, &self.inv(b)?))
    }
    /// Embedding of small signed integers, enough for +-1 chain entries.
    fn from_i64(&self, x: i64) -> Self::Elem;
}

/// Prime field with a word-sized modulus (p < 2^62 so products fit in u128).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, Error> {
        if !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(PrimeField { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn element(&self, x: u64) -> u64 {
        x % self.p
    }

    /// Uniform element of the field, including zero.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> u64 {
        rng.gen_range(0..self.p)
    }
}

impl Field for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 * *b as u128) % self.p as u128) as u64
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn inv(&self, a: &u64) -> Result<u64, Error> {
        if *a == 0 {
            return Err(Error::DivisionByZero);
        }
        // extended Euclid on (a, p)
        let (mut old_r, mut r) = (*a as i128, self.p as i128);
        let (mut old_s, mut s) = (1i128, 0i128);
        while r != 0 {
            let q = old_r / r;
            (old_r, r) = (r, old_r - q * r);
            (old_s, s) = (s, old_s - q * s);
        }
        debug_assert_eq!(old_r, 1);
        let mut x = old_s % self.p as i128;
        if x < 0 {
            x += self.p as i128;
        }
        Ok(x as u64)
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn from_i64(&self, x: i64) -> u64 {
        let r = x.rem_euclid(self.p as i64);
        r as u64
    }
}

/// Exact rational numbers; the cross-validation backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> Result<BigRational, Error> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(a.recip())
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn from_i64(&self, x: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(x))
    }
}

/// Parses "num" or "num/den" into a rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    match s.split_once('/') {
        Some((n, d)) => {
            let num: BigInt = n.parse().ok()?;
            let den: BigInt = d.parse().ok()?;
            if den.is_zero() {
                return None;
            }
            Some(BigRational::new(num, den))
        }
        None => {
            let num: BigInt = s.parse().ok()?;
            Some(BigRational::from_integer(num))
        }
    }
}

pub fn format_rational(x: &BigRational) -> String {
    if x.denom().is_one() {
        format!("{}", x.numer())
    } else if x.denom().is_negative() {
        // normalized BigRational keeps the denominator positive, but be safe
        format!("{}/{}", -x.numer(), -x.denom())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Field wrapper that counts operations; used by the measurement harness.
#[derive(Debug)]
pub struct Counting<F: Field> {
    pub inner: F,
    count: Cell<u64>,
}

impl<F: Field> Counting<F> {
    pub fn new(inner: F) -> Self {
        Counting { inner, count: Cell::new(0) }
    }
    pub fn ops(&self) -> u64 {
        self.count.get()
    }
    fn tick(&self) {
        self.count.set(self.count.get() + 1);
    }
}

impl<F: Field> Field for Counting<F> {
    type Elem = F::Elem;

    fn zero(&self) -> F::Elem {
        self.inner.zero()
    }
    fn one(&self) -> F::Elem {
        self.inner.one()
    }
    fn add(&self, a: &F::Elem, b: &F::Elem) -> F::Elem {
        self.tick();
        self.inner.add(a, b)
    }
    fn sub(&self, a: &F::Elem, b: &F::Elem) -> F::Elem {
        self.tick();
        self.inner.sub(a, b)
    }
    fn mul(&self, a: &F::Elem, b: &F::Elem) -> F::Elem {
        self.tick();
        self.inner.mul(a, b)
    }
    fn neg(&self, a: &F::Elem) -> F::Elem {
        self.tick();
        self.inner.neg(a)
    }
    fn inv(&self, a: &F::Elem) -> Result<F::Elem, Error> {
        self.tick();
        self.inner.inv(a)
    }
    fn is_zero(&self, a: &F::Elem) -> bool {
        self.tick();
        self.inner.is_zero(a)
    }
    fn from_i64(&self, x: i64) -> F::Elem {
        self.inner.from_i64(x)
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin; the witness set is complete for all u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d & 1 == 0 {
        d >>= 1;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Samples a prime uniformly-ish from [lo, hi) by rejection.
pub fn sample_prime<R: Rng>(lo: u64, hi: u64, rng: &mut R) -> Result<u64, Error> {
    if lo >= hi || hi > (1 << 62) {
        return Err(Error::EmptyPrimeRange);
    }
    for _ in 0..4096 {
        let x = rng.gen_range(lo..hi);
        if is_prime_u64(x) {
            return Ok(x);
        }
    }
    // fall back to a scan so short ranges still succeed
    (lo..hi).find(|&x| is_prime_u64(x)).ok_or(Error::EmptyPrimeRange)
}

/// Smallest prime >= lo, capped at P62.
pub fn first_prime_at_least(lo: u128) -> u64 {
    if lo >= P62 as u128 {
        return P62;
    }
    let mut x = lo as u64;
    loop {
        if is_prime_u64(x) {
            return x;
        }
        x += 1;
    }
}
