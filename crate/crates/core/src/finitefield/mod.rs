//! Exact arithmetic in prime fields `F_p` and their extensions `F_{p^m}`.
//!
//! An extension is described by an explicit monic irreducible modulus over
//! `F_p`; every element carries a shared handle to its [`FqContext`], and
//! combining elements of different contexts is rejected.
//!
//! The raw representation ([`Raw`]) is a coefficient vector of length `m`
//! in the power basis `1, t, ..., t^{m-1}`. Polynomial code stores raw
//! coefficients and one shared context rather than a context per term.

mod roots;
mod unipoly;

pub use roots::{find_irreducible, is_irreducible, roots_in_ext};
pub use unipoly::UniPoly;

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigUint;
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Coefficient vector of a field element, without its context.
pub type Raw = SmallVec<[u64; 2]>;

/// A prime `p < 2^32`, checked at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeModulus(u64);

impl PrimeModulus {
    pub fn new(p: u64) -> Result<Self> {
        if p >= 1 << 32 || !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(PrimeModulus(p))
    }

    pub fn get(self) -> u64 {
        self.0
    }
}

impl fmt::Display for PrimeModulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn mul_mod_u128(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod_u128(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod_u128(acc, b, m);
        }
        b = mul_mod_u128(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &BASES {
        let mut x = pow_mod_u128(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod_u128(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// `F_{p^m}` presented as `F_p[t]/(modulus)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FqContext {
    p: u64,
    /// Monic, low-to-high, length `m + 1`.
    modulus: Vec<u64>,
}

impl FqContext {
    /// The prime field, presented with modulus `t`.
    pub fn prime(p: PrimeModulus) -> Arc<Self> {
        Arc::new(FqContext {
            p: p.get(),
            modulus: vec![0, 1],
        })
    }

    /// `F_{p^m}` with the canonical (lexicographically smallest) modulus.
    pub fn extension(p: PrimeModulus, m: usize) -> Result<Arc<Self>> {
        if m == 0 {
            return Err(Error::InvalidInput("extension degree must be >= 1".into()));
        }
        if m == 1 {
            return Ok(Self::prime(p));
        }
        let modulus = find_irreducible(p, m)?;
        Ok(Arc::new(FqContext {
            p: p.get(),
            modulus: modulus.coeffs().iter().map(|c| c[0]).collect(),
        }))
    }

    /// A context for an explicit modulus; it must be monic and irreducible.
    pub fn with_modulus(p: PrimeModulus, modulus: &[u64]) -> Result<Arc<Self>> {
        let mut modulus: Vec<u64> = modulus.iter().map(|c| c % p.get()).collect();
        while modulus.last() == Some(&0) {
            modulus.pop();
        }
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 {
            return Err(Error::InvalidInput(format!(
                "modulus {modulus:?} must be monic of degree >= 1"
            )));
        }
        let base = Self::prime(p);
        let poly = UniPoly::from_u64s(&base, &modulus);
        if !is_irreducible(&poly)? {
            return Err(Error::InvalidInput(format!(
                "modulus {modulus:?} is reducible over F_{p}"
            )));
        }
        Ok(Arc::new(FqContext { p: p.get(), modulus }))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn prime_modulus(&self) -> PrimeModulus {
        PrimeModulus(self.p)
    }

    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    /// Modulus coefficients, low to high, monic.
    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    /// Field size `p^m`, or `None` if it does not fit in a `u64`.
    pub fn order(&self) -> Option<u64> {
        let mut q: u64 = 1;
        for _ in 0..self.degree() {
            q = q.checked_mul(self.p)?;
        }
        Some(q)
    }

    pub fn order_big(&self) -> BigUint {
        BigUint::from(self.p).pow(self.degree() as u32)
    }

    /// Whether elements of `other` may be combined with elements of `self`.
    pub fn same_as(&self, other: &FqContext) -> bool {
        self.p == other.p && self.modulus == other.modulus
    }

    pub fn describe(&self) -> String {
        if self.degree() == 1 {
            format!("F_{}", self.p)
        } else {
            format!("F_{}^{} mod {:?}", self.p, self.degree(), self.modulus)
        }
    }

    // ---- raw arithmetic ----------------------------------------------------

    pub fn raw_zero(&self) -> Raw {
        SmallVec::from_elem(0, self.degree())
    }

    pub fn raw_one(&self) -> Raw {
        self.raw_from_u64(1)
    }

    pub fn raw_from_u64(&self, c: u64) -> Raw {
        let mut r = self.raw_zero();
        r[0] = c % self.p;
        r
    }

    /// Reduce an arbitrary-length coefficient vector modulo `p` and the modulus.
    pub fn raw_from_coeffs(&self, coeffs: &[u64]) -> Raw {
        let p = self.p;
        let mut t: Vec<u64> = coeffs.iter().map(|c| c % p).collect();
        self.reduce_in_place(&mut t);
        let mut r = self.raw_zero();
        for (i, c) in t.into_iter().enumerate().take(self.degree()) {
            r[i] = c;
        }
        r
    }

    pub fn raw_is_zero(&self, a: &Raw) -> bool {
        a.iter().all(|&c| c == 0)
    }

    pub fn raw_is_one(&self, a: &Raw) -> bool {
        a[0] == 1 && a[1..].iter().all(|&c| c == 0)
    }

    pub fn raw_add(&self, a: &Raw, b: &Raw) -> Raw {
        let p = self.p;
        a.iter().zip(b).map(|(x, y)| (x + y) % p).collect()
    }

    pub fn raw_add_assign(&self, a: &mut Raw, b: &Raw) {
        let p = self.p;
        for (x, y) in a.iter_mut().zip(b) {
            *x = (*x + y) % p;
        }
    }

    pub fn raw_sub(&self, a: &Raw, b: &Raw) -> Raw {
        let p = self.p;
        a.iter().zip(b).map(|(x, y)| (x + p - y) % p).collect()
    }

    pub fn raw_neg(&self, a: &Raw) -> Raw {
        let p = self.p;
        a.iter().map(|x| (p - x) % p).collect()
    }

    pub fn raw_mul(&self, a: &Raw, b: &Raw) -> Raw {
        let p = self.p;
        let m = self.degree();
        if m == 1 {
            let mut r = Raw::new();
            r.push(a[0] * b[0] % p);
            return r;
        }
        let mut t = vec![0u64; 2 * m - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                t[i + j] = (t[i + j] + x * y % p) % p;
            }
        }
        self.reduce_in_place(&mut t);
        t.truncate(m);
        SmallVec::from_vec(t)
    }

    /// Multiply by a prime-field scalar.
    pub fn raw_scale(&self, a: &Raw, c: u64) -> Raw {
        let p = self.p;
        let c = c % p;
        a.iter().map(|x| x * c % p).collect()
    }

    fn reduce_in_place(&self, t: &mut Vec<u64>) {
        let p = self.p;
        let m = self.degree();
        if t.len() <= m {
            t.resize(m, 0);
            return;
        }
        for i in (m..t.len()).rev() {
            let c = t[i];
            if c == 0 {
                continue;
            }
            t[i] = 0;
            for j in 0..m {
                let sub = c * self.modulus[j] % p;
                t[i - m + j] = (t[i - m + j] + p - sub) % p;
            }
        }
        t.truncate(m);
    }

    pub fn raw_pow(&self, a: &Raw, exp: &BigUint) -> Raw {
        let mut acc = self.raw_one();
        for i in (0..exp.bits()).rev() {
            acc = self.raw_mul(&acc, &acc);
            if exp.bit(i) {
                acc = self.raw_mul(&acc, a);
            }
        }
        acc
    }

    pub fn raw_pow_u64(&self, a: &Raw, exp: u64) -> Raw {
        let mut acc = self.raw_one();
        let mut base = a.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.raw_mul(&acc, &base);
            }
            e >>= 1;
            if e > 0 {
                base = self.raw_mul(&base, &base);
            }
        }
        acc
    }

    pub fn raw_inv(&self, a: &Raw) -> Result<Raw> {
        if self.raw_is_zero(a) {
            return Err(Error::DivisionByZero);
        }
        if self.degree() == 1 {
            let mut r = Raw::new();
            r.push(inv_mod_prime(a[0], self.p));
            return Ok(r);
        }
        let e = self.order_big() - BigUint::from(2u32);
        Ok(self.raw_pow(a, &e))
    }

    /// The element with base-`p` digits of `index` as coefficients (`c_0` least
    /// significant). Enumerates the field for `index < p^m`.
    pub fn raw_from_index(&self, mut index: u64) -> Raw {
        let mut r = self.raw_zero();
        for c in r.iter_mut() {
            *c = index % self.p;
            index /= self.p;
        }
        r
    }

    pub fn raw_index(&self, a: &Raw) -> u128 {
        a.iter().rev().fold(0u128, |acc, &c| acc * self.p as u128 + c as u128)
    }

    /// Lift a prime-field value into this context.
    pub fn embed_prime(self: &Arc<Self>, c: u64) -> FqElem {
        FqElem::from_raw(self.clone(), self.raw_from_u64(c))
    }

    pub fn zero(self: &Arc<Self>) -> FqElem {
        FqElem::from_raw(self.clone(), self.raw_zero())
    }

    pub fn one(self: &Arc<Self>) -> FqElem {
        FqElem::from_raw(self.clone(), self.raw_one())
    }

    /// The generator `t` of the power basis (equals the constant 0 when `m = 1`,
    /// because the prime field is presented modulo `t`).
    pub fn generator(self: &Arc<Self>) -> FqElem {
        FqElem::from_raw(self.clone(), self.raw_from_coeffs(&[0, 1]))
    }

    pub fn element(self: &Arc<Self>, coeffs: &[u64]) -> FqElem {
        FqElem::from_raw(self.clone(), self.raw_from_coeffs(coeffs))
    }

    pub fn from_index(self: &Arc<Self>, index: u64) -> FqElem {
        FqElem::from_raw(self.clone(), self.raw_from_index(index))
    }

    /// All field elements in index order. Panics if the field does not fit in `u64`.
    pub fn elements(self: &Arc<Self>) -> impl Iterator<Item = FqElem> + '_ {
        let q = self.order().expect("field too large to enumerate");
        (0..q).map(move |i| self.from_index(i))
    }
}

fn inv_mod_prime(a: u64, p: u64) -> u64 {
    let (mut r0, mut r1) = (p as i128, a as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    s0.rem_euclid(p as i128) as u64
}

/// An element of `F_{p^m}` tied to its context.
#[derive(Clone)]
pub struct FqElem {
    ctx: Arc<FqContext>,
    v: Raw,
}

impl FqElem {
    pub fn from_raw(ctx: Arc<FqContext>, v: Raw) -> Self {
        debug_assert_eq!(v.len(), ctx.degree());
        FqElem { ctx, v }
    }

    pub fn ctx(&self) -> &Arc<FqContext> {
        &self.ctx
    }

    pub fn raw(&self) -> &Raw {
        &self.v
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.v
    }

    pub fn is_zero(&self) -> bool {
        self.ctx.raw_is_zero(&self.v)
    }

    pub fn is_one(&self) -> bool {
        self.ctx.raw_is_one(&self.v)
    }

    /// `Some(c)` when the element lies in the prime field.
    pub fn as_prime(&self) -> Option<u64> {
        if self.v[1..].iter().all(|&c| c == 0) {
            Some(self.v[0])
        } else {
            None
        }
    }

    pub fn index(&self) -> u128 {
        self.ctx.raw_index(&self.v)
    }

    fn check(&self, other: &FqElem) -> Result<()> {
        if Arc::ptr_eq(&self.ctx, &other.ctx) || self.ctx.same_as(&other.ctx) {
            Ok(())
        } else {
            Err(Error::ContextMismatch(
                self.ctx.describe(),
                other.ctx.describe(),
            ))
        }
    }

    pub fn checked_add(&self, other: &FqElem) -> Result<FqElem> {
        self.check(other)?;
        Ok(FqElem::from_raw(self.ctx.clone(), self.ctx.raw_add(&self.v, &other.v)))
    }

    pub fn checked_sub(&self, other: &FqElem) -> Result<FqElem> {
        self.check(other)?;
        Ok(FqElem::from_raw(self.ctx.clone(), self.ctx.raw_sub(&self.v, &other.v)))
    }

    pub fn checked_mul(&self, other: &FqElem) -> Result<FqElem> {
        self.check(other)?;
        Ok(FqElem::from_raw(self.ctx.clone(), self.ctx.raw_mul(&self.v, &other.v)))
    }

    pub fn checked_div(&self, other: &FqElem) -> Result<FqElem> {
        self.check(other)?;
        let inv = self.ctx.raw_inv(&other.v)?;
        Ok(FqElem::from_raw(self.ctx.clone(), self.ctx.raw_mul(&self.v, &inv)))
    }

    pub fn inv(&self) -> Result<FqElem> {
        Ok(FqElem::from_raw(self.ctx.clone(), self.ctx.raw_inv(&self.v)?))
    }

    /// Square-and-multiply with an arbitrary-size exponent.
    pub fn pow(&self, exp: &BigUint) -> FqElem {
        FqElem::from_raw(self.ctx.clone(), self.ctx.raw_pow(&self.v, exp))
    }

    pub fn pow_u64(&self, exp: u64) -> FqElem {
        FqElem::from_raw(self.ctx.clone(), self.ctx.raw_pow_u64(&self.v, exp))
    }

    /// The Frobenius image `x^p`.
    pub fn frobenius(&self) -> FqElem {
        self.pow_u64(self.ctx.p)
    }
}

impl PartialEq for FqElem {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same_as(&other.ctx) && self.v == other.v
    }
}

impl Eq for FqElem {}

impl std::hash::Hash for FqElem {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.ctx.p.hash(state);
        self.v.hash(state);
    }
}

/// Index order: coefficient vectors compared from the top degree down.
/// Elements of different contexts are ordered by context first.
impl Ord for FqElem {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.ctx.p, &self.ctx.modulus)
            .cmp(&(other.ctx.p, &other.ctx.modulus))
            .then_with(|| self.v.iter().rev().cmp(other.v.iter().rev()))
    }
}

impl PartialOrd for FqElem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for FqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in {}", self, self.ctx.describe())
    }
}

/// Prime-field elements print as an integer, others as their coefficient tuple.
impl fmt::Display for FqElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ctx.degree() == 1 {
            write!(f, "{}", self.v[0])
        } else {
            let parts: Vec<String> = self.v.iter().map(|c| c.to_string()).collect();
            write!(f, "({})", parts.join(","))
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&FqElem> for &FqElem {
            type Output = FqElem;
            fn $method(self, rhs: &FqElem) -> FqElem {
                self.$checked(rhs).expect("mixed field contexts")
            }
        }
        impl $trait<FqElem> for FqElem {
            type Output = FqElem;
            fn $method(self, rhs: FqElem) -> FqElem {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for &FqElem {
    type Output = FqElem;
    fn neg(self) -> FqElem {
        FqElem::from_raw(self.ctx.clone(), self.ctx.raw_neg(&self.v))
    }
}

impl Neg for FqElem {
    type Output = FqElem;
    fn neg(self) -> FqElem {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prime(p: u64) -> Arc<FqContext> {
        FqContext::prime(PrimeModulus::new(p).unwrap())
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..40).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
        assert!(is_prime(4_294_967_291));
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
        assert!(PrimeModulus::new(1).is_err());
        assert!(PrimeModulus::new(91).is_err());
        assert!(PrimeModulus::new(4_294_967_311).is_err());
    }

    #[test]
    fn prime_field_examples() {
        let f5 = prime(5);
        assert_eq!(&f5.embed_prime(3) * &f5.embed_prime(4), f5.embed_prime(2));
        let f3 = prime(3);
        assert_eq!(f3.embed_prime(2).inv().unwrap(), f3.embed_prime(2));
    }

    #[test]
    fn explicit_modulus_forces_square() {
        let p5 = PrimeModulus::new(5).unwrap();
        // t^2 - 2 = t^2 + 3
        let ctx = FqContext::with_modulus(p5, &[3, 0, 1]).unwrap();
        let t = ctx.generator();
        assert_eq!(&t * &t, ctx.embed_prime(2));
        assert!(FqContext::with_modulus(p5, &[1, 0, 1]).is_err()); // t^2+1 = (t-2)(t+2)
    }

    #[test]
    fn division_and_mismatch_errors() {
        let f5 = prime(5);
        let f7 = prime(7);
        assert_eq!(
            f5.one().checked_div(&f5.zero()).unwrap_err(),
            Error::DivisionByZero
        );
        assert!(matches!(
            f5.one().checked_add(&f7.one()),
            Err(Error::ContextMismatch(..))
        ));
        let f25 = FqContext::extension(PrimeModulus::new(5).unwrap(), 2).unwrap();
        assert!(f25.one().checked_mul(&f5.one()).is_err());
    }

    #[test]
    fn frobenius_fixes_every_element_and_inverses_exist() {
        for (p, m) in [(2, 3), (3, 2), (5, 2), (7, 1), (2, 4)] {
            let ctx = FqContext::extension(PrimeModulus::new(p).unwrap(), m).unwrap();
            let q = BigUint::from(ctx.order().unwrap());
            for a in ctx.elements() {
                assert_eq!(a.pow(&q), a);
                if !a.is_zero() {
                    assert!((&a * &a.inv().unwrap()).is_one());
                }
            }
        }
    }

    #[test]
    fn index_round_trip_and_order() {
        let ctx = FqContext::extension(PrimeModulus::new(3).unwrap(), 2).unwrap();
        let all: Vec<FqElem> = ctx.elements().collect();
        for (i, a) in all.iter().enumerate() {
            assert_eq!(a.index(), i as u128);
        }
        let mut sorted = all.clone();
        sorted.reverse();
        sorted.sort();
        assert_eq!(sorted, all);
    }

    #[test]
    fn big_exponent_pow() {
        let f7 = prime(7);
        let a = f7.embed_prime(3);
        // 3^(6k+1) = 3 in F_7 for huge k.
        let e = BigUint::from(6u32) * BigUint::from(10u32).pow(30) + BigUint::from(1u32);
        assert_eq!(a.pow(&e), a);
    }
}
