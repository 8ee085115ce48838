use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;

use super::{FqContext, FqElem, Raw};
use crate::error::{Error, Result};

/// Dense univariate polynomial over a field context, coefficients low to high.
/// The zero polynomial has no coefficients; otherwise the top one is nonzero.
#[derive(Clone)]
pub struct UniPoly {
    ctx: Arc<FqContext>,
    coeffs: Vec<Raw>,
}

impl UniPoly {
    pub fn new(ctx: &Arc<FqContext>, coeffs: Vec<Raw>) -> Self {
        let mut p = UniPoly {
            ctx: ctx.clone(),
            coeffs,
        };
        p.trim();
        p
    }

    pub fn from_u64s(ctx: &Arc<FqContext>, coeffs: &[u64]) -> Self {
        Self::new(ctx, coeffs.iter().map(|&c| ctx.raw_from_u64(c)).collect())
    }

    pub fn from_elems(ctx: &Arc<FqContext>, coeffs: &[FqElem]) -> Result<Self> {
        for c in coeffs {
            if !c.ctx().same_as(ctx) {
                return Err(Error::ContextMismatch(c.ctx().describe(), ctx.describe()));
            }
        }
        Ok(Self::new(ctx, coeffs.iter().map(|c| c.raw().clone()).collect()))
    }

    pub fn zero(ctx: &Arc<FqContext>) -> Self {
        UniPoly {
            ctx: ctx.clone(),
            coeffs: Vec::new(),
        }
    }

    pub fn one(ctx: &Arc<FqContext>) -> Self {
        Self::new(ctx, vec![ctx.raw_one()])
    }

    /// The indeterminate `X`.
    pub fn x(ctx: &Arc<FqContext>) -> Self {
        Self::new(ctx, vec![ctx.raw_zero(), ctx.raw_one()])
    }

    fn trim(&mut self) {
        while let Some(c) = self.coeffs.last() {
            if self.ctx.raw_is_zero(c) {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn ctx(&self) -> &Arc<FqContext> {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[Raw] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> FqElem {
        let raw = self.coeffs.get(i).cloned().unwrap_or_else(|| self.ctx.raw_zero());
        FqElem::from_raw(self.ctx.clone(), raw)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn check(&self, other: &UniPoly) -> Result<()> {
        if self.ctx.same_as(&other.ctx) {
            Ok(())
        } else {
            Err(Error::ContextMismatch(
                self.ctx.describe(),
                other.ctx.describe(),
            ))
        }
    }

    pub fn add(&self, other: &UniPoly) -> Result<UniPoly> {
        self.check(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = self.ctx.raw_zero();
        let coeffs = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).unwrap_or(&zero);
                let b = other.coeffs.get(i).unwrap_or(&zero);
                self.ctx.raw_add(a, b)
            })
            .collect();
        Ok(UniPoly::new(&self.ctx, coeffs))
    }

    pub fn sub(&self, other: &UniPoly) -> Result<UniPoly> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> UniPoly {
        UniPoly::new(
            &self.ctx,
            self.coeffs.iter().map(|c| self.ctx.raw_neg(c)).collect(),
        )
    }

    pub fn mul(&self, other: &UniPoly) -> Result<UniPoly> {
        self.check(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(UniPoly::zero(&self.ctx));
        }
        let mut out = vec![self.ctx.raw_zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if self.ctx.raw_is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                let prod = self.ctx.raw_mul(a, b);
                self.ctx.raw_add_assign(&mut out[i + j], &prod);
            }
        }
        Ok(UniPoly::new(&self.ctx, out))
    }

    pub fn scale(&self, c: &Raw) -> UniPoly {
        UniPoly::new(
            &self.ctx,
            self.coeffs.iter().map(|a| self.ctx.raw_mul(a, c)).collect(),
        )
    }

    /// Quotient and remainder; errors on division by zero.
    pub fn div_rem(&self, divisor: &UniPoly) -> Result<(UniPoly, UniPoly)> {
        self.check(divisor)?;
        let dd = divisor.degree().ok_or(Error::DivisionByZero)?;
        let lead_inv = self.ctx.raw_inv(&divisor.coeffs[dd])?;
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((UniPoly::zero(&self.ctx), self.clone()));
        }
        let mut quot = vec![self.ctx.raw_zero(); rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            if self.ctx.raw_is_zero(&rem[i]) {
                continue;
            }
            let c = self.ctx.raw_mul(&rem[i], &lead_inv);
            for (j, d) in divisor.coeffs.iter().enumerate() {
                let prod = self.ctx.raw_mul(&c, d);
                rem[i - dd + j] = self.ctx.raw_sub(&rem[i - dd + j], &prod);
            }
            quot[i - dd] = c;
        }
        rem.truncate(dd);
        Ok((UniPoly::new(&self.ctx, quot), UniPoly::new(&self.ctx, rem)))
    }

    pub fn rem(&self, divisor: &UniPoly) -> Result<UniPoly> {
        Ok(self.div_rem(divisor)?.1)
    }

    pub fn monic(&self) -> Result<UniPoly> {
        match self.coeffs.last() {
            None => Ok(self.clone()),
            Some(lead) => Ok(self.scale(&self.ctx.raw_inv(lead)?)),
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &UniPoly) -> Result<UniPoly> {
        self.check(other)?;
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b)?;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `self^exp mod modulus`.
    pub fn pow_mod(&self, exp: &BigUint, modulus: &UniPoly) -> Result<UniPoly> {
        let base = self.rem(modulus)?;
        let mut acc = UniPoly::one(&self.ctx).rem(modulus)?;
        for i in (0..exp.bits()).rev() {
            acc = acc.mul(&acc)?.rem(modulus)?;
            if exp.bit(i) {
                acc = acc.mul(&base)?.rem(modulus)?;
            }
        }
        Ok(acc)
    }

    pub fn eval(&self, x: &FqElem) -> Result<FqElem> {
        if !x.ctx().same_as(&self.ctx) {
            return Err(Error::ContextMismatch(x.ctx().describe(), self.ctx.describe()));
        }
        Ok(FqElem::from_raw(self.ctx.clone(), self.eval_raw(x.raw())))
    }

    pub fn eval_raw(&self, x: &Raw) -> Raw {
        let mut acc = self.ctx.raw_zero();
        for c in self.coeffs.iter().rev() {
            acc = self.ctx.raw_mul(&acc, x);
            self.ctx.raw_add_assign(&mut acc, c);
        }
        acc
    }

    /// Map a prime-field polynomial into an extension with the same characteristic.
    pub fn lift(&self, target: &Arc<FqContext>) -> Result<UniPoly> {
        if self.ctx.degree() != 1 || self.ctx.p() != target.p() {
            return Err(Error::ContextMismatch(self.ctx.describe(), target.describe()));
        }
        Ok(UniPoly::new(
            target,
            self.coeffs.iter().map(|c| target.raw_from_u64(c[0])).collect(),
        ))
    }
}

impl PartialEq for UniPoly {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same_as(&other.ctx) && self.coeffs == other.coeffs
    }
}

impl Eq for UniPoly {}

impl fmt::Debug for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} over {}", self, self.ctx.describe())
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if self.ctx.raw_is_zero(c) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let e = FqElem::from_raw(self.ctx.clone(), c.clone());
            match (i, e.is_one()) {
                (0, _) => write!(f, "{e}")?,
                (1, true) => write!(f, "X")?,
                (1, false) => write!(f, "{e}*X")?,
                (_, true) => write!(f, "X^{i}")?,
                (_, false) => write!(f, "{e}*X^{i}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finitefield::PrimeModulus;

    fn fp(p: u64) -> Arc<FqContext> {
        FqContext::prime(PrimeModulus::new(p).unwrap())
    }

    #[test]
    fn div_rem_reconstructs() {
        let k = fp(7);
        let a = UniPoly::from_u64s(&k, &[3, 0, 5, 1, 6]);
        let b = UniPoly::from_u64s(&k, &[1, 2, 3]);
        let (q, r) = a.div_rem(&b).unwrap();
        assert!(r.degree().unwrap_or(0) < 2);
        assert_eq!(q.mul(&b).unwrap().add(&r).unwrap(), a);
    }

    #[test]
    fn gcd_of_products() {
        let k = fp(5);
        let common = UniPoly::from_u64s(&k, &[2, 1]); // X + 2
        let a = common.mul(&UniPoly::from_u64s(&k, &[1, 0, 1])).unwrap();
        let b = common.mul(&UniPoly::from_u64s(&k, &[1, 1])).unwrap();
        assert_eq!(a.gcd(&b).unwrap(), common);
        assert!(UniPoly::zero(&k).is_zero());
        assert_eq!(UniPoly::zero(&k).degree(), None);
    }

    #[test]
    fn pow_mod_matches_repeated_multiplication() {
        let k = fp(3);
        let m = UniPoly::from_u64s(&k, &[1, 1, 0, 1]);
        let x = UniPoly::x(&k);
        let mut slow = UniPoly::one(&k);
        for _ in 0..11 {
            slow = slow.mul(&x).unwrap().rem(&m).unwrap();
        }
        assert_eq!(x.pow_mod(&BigUint::from(11u32), &m).unwrap(), slow);
    }

    #[test]
    fn display() {
        let k = fp(5);
        assert_eq!(UniPoly::from_u64s(&k, &[1, 4, 1]).to_string(), "X^2 + 4*X + 1");
    }
}
