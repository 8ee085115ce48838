//! Sparse multivariate polynomials over `F_{p^m}` and reduction modulo
//! Frobenius-power ideals `(x_1^q, ..., x_r^q)`.
//!
//! Membership of `f` in `(x_1^q, ..., x_r^q)` is decided termwise: the ideal is
//! monomial, so `f` lies in it iff every monomial of `f` has some exponent
//! `>= q`. Since the ideal absorbs multiplication by anything, powers can be
//! pruned after every multiplication without changing the residue class.
//!
//! Terms are stored keyed by exponent vectors. Products of polynomials in at
//! most four variables with exponents below `2^16` are accumulated under a
//! packed `u64` key.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{invalid, resource, Error, Result};
use crate::finitefield::{FqContext, FqElem, Raw};

/// Coefficient field plus ordered variable names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyRing {
    field: Arc<FqContext>,
    vars: Vec<String>,
}

impl PolyRing {
    pub fn new(field: &Arc<FqContext>, vars: &[&str]) -> Arc<Self> {
        Arc::new(PolyRing {
            field: field.clone(),
            vars: vars.iter().map(|v| v.to_string()).collect(),
        })
    }

    pub fn field(&self) -> &Arc<FqContext> {
        &self.field
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    fn compatible(&self, other: &PolyRing) -> bool {
        self.field.same_as(&other.field) && self.vars == other.vars
    }
}

/// Exponent vector, one entry per ring variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial(pub Vec<u64>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn exps(&self) -> &[u64] {
        &self.0
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Whether some exponent reaches `q`, i.e. the monomial lies in `(x_i^q)`.
    pub fn in_frobenius_power(&self, q: u64) -> bool {
        self.0.iter().any(|&e| e >= q)
    }
}

const PACK_BITS: u32 = 16;
const PACK_MASK: u64 = (1 << PACK_BITS) - 1;
const PACK_MAX_VARS: usize = 4;

fn pack(exps: &[u64]) -> u64 {
    exps.iter()
        .enumerate()
        .fold(0, |acc, (i, &e)| acc | (e << (PACK_BITS * i as u32)))
}

fn unpack(key: u64, nvars: usize) -> Monomial {
    Monomial(
        (0..nvars)
            .map(|i| (key >> (PACK_BITS * i as u32)) & PACK_MASK)
            .collect(),
    )
}

fn packed_below(key: u64, nvars: usize, q: u64) -> bool {
    (0..nvars).all(|i| (key >> (PACK_BITS * i as u32)) & PACK_MASK < q)
}

/// Sparse polynomial; no stored coefficient is zero.
#[derive(Clone)]
pub struct SparsePoly {
    ring: Arc<PolyRing>,
    terms: BTreeMap<Monomial, Raw>,
}

impl SparsePoly {
    pub fn zero(ring: &Arc<PolyRing>) -> Self {
        SparsePoly {
            ring: ring.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ring: &Arc<PolyRing>) -> Self {
        Self::constant(ring, &ring.field.one())
    }

    pub fn constant(ring: &Arc<PolyRing>, c: &FqElem) -> Self {
        Self::monomial(ring, Monomial::one(ring.nvars()), c)
    }

    pub fn var(ring: &Arc<PolyRing>, i: usize) -> Self {
        let mut e = vec![0; ring.nvars()];
        e[i] = 1;
        Self::monomial(ring, Monomial(e), &ring.field.one())
    }

    pub fn monomial(ring: &Arc<PolyRing>, m: Monomial, c: &FqElem) -> Self {
        let mut p = Self::zero(ring);
        p.add_term(m, c.raw().clone());
        p
    }

    /// Build from `(exponents, prime-field coefficient)` pairs; repeated
    /// monomials are summed.
    pub fn from_u64_terms(ring: &Arc<PolyRing>, terms: &[(&[u64], u64)]) -> Self {
        let mut p = Self::zero(ring);
        for (e, c) in terms {
            assert_eq!(e.len(), ring.nvars(), "exponent vector length");
            p.add_term(Monomial(e.to_vec()), ring.field.raw_from_u64(*c));
        }
        p
    }

    pub fn from_terms(ring: &Arc<PolyRing>, terms: Vec<(Monomial, FqElem)>) -> Result<Self> {
        let mut p = Self::zero(ring);
        for (m, c) in terms {
            if m.0.len() != ring.nvars() {
                return Err(invalid("exponent vector length does not match the ring"));
            }
            if !c.ctx().same_as(&ring.field) {
                return Err(Error::ContextMismatch(c.ctx().describe(), ring.field.describe()));
            }
            p.add_term(m, c.raw().clone());
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Monomial, c: Raw) {
        let field = &self.ring.field;
        if field.raw_is_zero(&c) {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(existing) => {
                field.raw_add_assign(existing, &c);
                if field.raw_is_zero(existing) {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn ring(&self) -> &Arc<PolyRing> {
        &self.ring
    }

    pub fn field(&self) -> &Arc<FqContext> {
        &self.ring.field
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, FqElem)> + '_ {
        self.terms
            .iter()
            .map(|(m, c)| (m, FqElem::from_raw(self.ring.field.clone(), c.clone())))
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> + '_ {
        self.terms.keys()
    }

    /// The stored coefficient of `m`, or zero.
    pub fn coefficient_of(&self, m: &Monomial) -> Result<FqElem> {
        if m.0.len() != self.ring.nvars() {
            return Err(invalid("monomial length does not match the ring"));
        }
        let raw = self
            .terms
            .get(m)
            .cloned()
            .unwrap_or_else(|| self.ring.field.raw_zero());
        Ok(FqElem::from_raw(self.ring.field.clone(), raw))
    }

    pub fn constant_term(&self) -> FqElem {
        self.coefficient_of(&Monomial::one(self.ring.nvars()))
            .expect("length matches")
    }

    pub fn total_degree(&self) -> Option<u64> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Lowest total degree of a term: the multiplicity at the origin.
    pub fn order_at_origin(&self) -> Option<u64> {
        self.terms.keys().map(Monomial::degree).min()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(Monomial::degree);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    fn check(&self, other: &SparsePoly) -> Result<()> {
        if Arc::ptr_eq(&self.ring, &other.ring) || self.ring.compatible(&other.ring) {
            Ok(())
        } else {
            Err(Error::ContextMismatch(
                format!("{:?} over {}", self.ring.vars, self.ring.field.describe()),
                format!("{:?} over {}", other.ring.vars, other.ring.field.describe()),
            ))
        }
    }

    pub fn add(&self, other: &SparsePoly) -> Result<SparsePoly> {
        self.check(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> SparsePoly {
        let field = &self.ring.field;
        SparsePoly {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), field.raw_neg(c)))
                .collect(),
        }
    }

    pub fn sub(&self, other: &SparsePoly) -> Result<SparsePoly> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &FqElem) -> Result<SparsePoly> {
        if !c.ctx().same_as(&self.ring.field) {
            return Err(Error::ContextMismatch(c.ctx().describe(), self.ring.field.describe()));
        }
        let mut out = SparsePoly::zero(&self.ring);
        for (m, a) in &self.terms {
            out.add_term(m.clone(), self.ring.field.raw_mul(a, c.raw()));
        }
        Ok(out)
    }

    /// Exact product, within the default term budget.
    pub fn mul(&self, other: &SparsePoly) -> Result<SparsePoly> {
        self.mul_with(other, None, &Config::default())
    }

    /// Product with every monomial lying in `(x_i^q)` discarded when `q` is
    /// given. Errors if the accumulator outgrows `cfg.term_budget`.
    pub fn mul_with(&self, other: &SparsePoly, q: Option<u64>, cfg: &Config) -> Result<SparsePoly> {
        self.check(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(SparsePoly::zero(&self.ring));
        }
        let n = self.ring.nvars();
        let packable = n <= PACK_MAX_VARS
            && (0..n).all(|i| {
                let ma = self.terms.keys().map(|m| m.0[i]).max().unwrap_or(0);
                let mb = other.terms.keys().map(|m| m.0[i]).max().unwrap_or(0);
                ma + mb <= PACK_MASK
            });
        if packable {
            self.mul_packed(other, q, cfg)
        } else {
            self.mul_wide(other, q, cfg)
        }
    }

    fn mul_packed(&self, other: &SparsePoly, q: Option<u64>, cfg: &Config) -> Result<SparsePoly> {
        let n = self.ring.nvars();
        let field = &self.ring.field;
        let left: Vec<(u64, &Raw)> = self.terms.iter().map(|(m, c)| (pack(&m.0), c)).collect();
        let right: Vec<(u64, &Raw)> = other.terms.iter().map(|(m, c)| (pack(&m.0), c)).collect();
        let budget_err = || resource(format!("polynomial product exceeds {} terms", cfg.term_budget));
        let mut out = SparsePoly::zero(&self.ring);

        if field.degree() == 1 {
            let p = field.p();
            let mut acc: FxHashMap<u64, u64> = FxHashMap::default();
            for &(ka, ca) in &left {
                for &(kb, cb) in &right {
                    let key = ka + kb;
                    if let Some(q) = q {
                        if !packed_below(key, n, q) {
                            continue;
                        }
                    }
                    let prod = ca[0] * cb[0] % p;
                    let slot = acc.entry(key).or_insert(0);
                    *slot = (*slot + prod) % p;
                }
                if acc.len() > cfg.term_budget {
                    return Err(budget_err());
                }
            }
            for (key, c) in acc {
                if c != 0 {
                    out.terms.insert(unpack(key, n), field.raw_from_u64(c));
                }
            }
        } else {
            let mut acc: FxHashMap<u64, Raw> = FxHashMap::default();
            for &(ka, ca) in &left {
                for &(kb, cb) in &right {
                    let key = ka + kb;
                    if let Some(q) = q {
                        if !packed_below(key, n, q) {
                            continue;
                        }
                    }
                    let prod = field.raw_mul(ca, cb);
                    acc.entry(key)
                        .and_modify(|s| field.raw_add_assign(s, &prod))
                        .or_insert(prod);
                }
                if acc.len() > cfg.term_budget {
                    return Err(budget_err());
                }
            }
            for (key, c) in acc {
                if !field.raw_is_zero(&c) {
                    out.terms.insert(unpack(key, n), c);
                }
            }
        }
        Ok(out)
    }

    fn mul_wide(&self, other: &SparsePoly, q: Option<u64>, cfg: &Config) -> Result<SparsePoly> {
        let field = &self.ring.field;
        let mut acc: FxHashMap<Monomial, Raw> = FxHashMap::default();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                if let Some(q) = q {
                    if m.in_frobenius_power(q) {
                        continue;
                    }
                }
                let prod = field.raw_mul(ca, cb);
                acc.entry(m)
                    .and_modify(|s| field.raw_add_assign(s, &prod))
                    .or_insert(prod);
            }
            if acc.len() > cfg.term_budget {
                return Err(resource(format!(
                    "polynomial product exceeds {} terms",
                    cfg.term_budget
                )));
            }
        }
        let mut out = SparsePoly::zero(&self.ring);
        out.terms = acc
            .into_iter()
            .filter(|(_, c)| !field.raw_is_zero(c))
            .collect();
        Ok(out)
    }

    /// Delete every monomial with some exponent `>= q`. The result is zero iff
    /// `self` lies in `(x_1^q, ..., x_r^q)`.
    pub fn reduce_mod_frobpower(&self, q: u64) -> SparsePoly {
        SparsePoly {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| !m.in_frobenius_power(q))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// `self^k` reduced modulo `(x_1^q, ..., x_r^q)`, by square-and-multiply
    /// with pruning after every multiplication.
    pub fn pow_mod_frobpower(&self, k: &BigUint, q: u64, cfg: &Config) -> Result<SparsePoly> {
        if q == 0 {
            return Err(invalid("Frobenius power q must be >= 1"));
        }
        let base = self.reduce_mod_frobpower(q);
        let mut acc = SparsePoly::one(&self.ring).reduce_mod_frobpower(q);
        for i in (0..k.bits()).rev() {
            if acc.is_zero() {
                break;
            }
            acc = acc.mul_with(&acc, Some(q), cfg)?;
            if k.bit(i) {
                acc = acc.mul_with(&base, Some(q), cfg)?;
            }
        }
        Ok(acc)
    }

    /// Exact power by square-and-multiply.
    pub fn pow(&self, k: u64, cfg: &Config) -> Result<SparsePoly> {
        let mut acc = SparsePoly::one(&self.ring);
        for i in (0..u64::BITS - k.leading_zeros()).rev() {
            acc = acc.mul_with(&acc, None, cfg)?;
            if (k >> i) & 1 == 1 {
                acc = acc.mul_with(self, None, cfg)?;
            }
        }
        Ok(acc)
    }

    /// Replace variable `i` by `sum_j matrix[i][j] * x_j`. The matrix must be
    /// square of the ring's size and invertible.
    pub fn substitute_linear(&self, matrix: &[Vec<FqElem>], cfg: &Config) -> Result<SparsePoly> {
        let n = self.ring.nvars();
        let field = &self.ring.field;
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(invalid(format!("substitution matrix must be {n}x{n}")));
        }
        for row in matrix {
            for c in row {
                if !c.ctx().same_as(field) {
                    return Err(Error::ContextMismatch(c.ctx().describe(), field.describe()));
                }
            }
        }
        if !is_invertible(field, matrix) {
            return Err(invalid("substitution matrix is singular"));
        }
        let forms: Vec<SparsePoly> = matrix
            .iter()
            .map(|row| {
                let mut l = SparsePoly::zero(&self.ring);
                for (j, c) in row.iter().enumerate() {
                    let mut e = vec![0; n];
                    e[j] = 1;
                    l.add_term(Monomial(e), c.raw().clone());
                }
                l
            })
            .collect();
        // powers[i][e] = forms[i]^e
        let mut powers: Vec<Vec<SparsePoly>> = vec![vec![SparsePoly::one(&self.ring)]; n];
        let mut out = SparsePoly::zero(&self.ring);
        for (m, c) in &self.terms {
            let mut term = SparsePoly::monomial(
                &self.ring,
                Monomial::one(n),
                &FqElem::from_raw(field.clone(), c.clone()),
            );
            for (i, &e) in m.0.iter().enumerate() {
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul_with(&forms[i], None, cfg)?;
                    powers[i].push(next);
                }
                term = term.mul_with(&powers[i][e as usize], None, cfg)?;
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Formal partial derivative in variable `i`.
    pub fn derivative(&self, i: usize) -> SparsePoly {
        let field = &self.ring.field;
        let mut out = SparsePoly::zero(&self.ring);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm.0[i] -= 1;
            out.add_term(dm, field.raw_scale(c, e % field.p()));
        }
        out
    }

    /// Set variable `i` to the constant `value`, keeping the ring.
    pub fn specialize(&self, i: usize, value: &FqElem) -> Result<SparsePoly> {
        let field = &self.ring.field;
        if !value.ctx().same_as(field) {
            return Err(Error::ContextMismatch(value.ctx().describe(), field.describe()));
        }
        let mut out = SparsePoly::zero(&self.ring);
        for (m, c) in &self.terms {
            let mut dm = m.clone();
            let e = std::mem::replace(&mut dm.0[i], 0);
            let factor = field.raw_pow_u64(value.raw(), e);
            out.add_term(dm, field.raw_mul(c, &factor));
        }
        Ok(out)
    }

    /// Monomial substitution: variable `i` becomes the monomial `images[i]`,
    /// so an exponent vector `e` maps to `sum_i e_i * images[i]`.
    pub fn substitute_monomials(&self, images: &[Monomial]) -> Result<SparsePoly> {
        let n = self.ring.nvars();
        if images.len() != n || images.iter().any(|m| m.0.len() != n) {
            return Err(invalid("monomial substitution needs one image per variable"));
        }
        let mut out = SparsePoly::zero(&self.ring);
        for (m, c) in &self.terms {
            let mut e = vec![0u64; n];
            for (i, &k) in m.0.iter().enumerate() {
                for (slot, &d) in e.iter_mut().zip(&images[i].0) {
                    *slot += k * d;
                }
            }
            out.add_term(Monomial(e), c.clone());
        }
        Ok(out)
    }

    /// Exact quotient by a monomial, `None` if some term is not divisible.
    pub fn divide_by_monomial(&self, d: &Monomial) -> Option<SparsePoly> {
        let mut out = SparsePoly::zero(&self.ring);
        for (m, c) in &self.terms {
            let mut e = Vec::with_capacity(m.0.len());
            for (a, b) in m.0.iter().zip(&d.0) {
                e.push(a.checked_sub(*b)?);
            }
            out.terms.insert(Monomial(e), c.clone());
        }
        Some(out)
    }

    /// Evaluate at a point given as raw coordinates in the polynomial's field.
    pub fn eval_raw(&self, point: &[Raw]) -> Raw {
        let field = &self.ring.field;
        let mut acc = field.raw_zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t = field.raw_mul(&t, &field.raw_pow_u64(x, e));
                }
            }
            field.raw_add_assign(&mut acc, &t);
        }
        acc
    }

    pub fn eval(&self, point: &[FqElem]) -> Result<FqElem> {
        if point.len() != self.ring.nvars() {
            return Err(invalid("point dimension does not match the ring"));
        }
        for x in point {
            if !x.ctx().same_as(&self.ring.field) {
                return Err(Error::ContextMismatch(x.ctx().describe(), self.ring.field.describe()));
            }
        }
        let raws: Vec<Raw> = point.iter().map(|x| x.raw().clone()).collect();
        Ok(FqElem::from_raw(self.ring.field.clone(), self.eval_raw(&raws)))
    }

    /// Re-express a prime-field polynomial over an extension of the same
    /// characteristic (same variable names).
    pub fn extend_scalars(&self, target: &Arc<FqContext>) -> Result<SparsePoly> {
        let field = &self.ring.field;
        if field.same_as(target) {
            return Ok(self.clone());
        }
        if field.degree() != 1 || field.p() != target.p() {
            return Err(Error::ContextMismatch(field.describe(), target.describe()));
        }
        let names: Vec<&str> = self.ring.vars.iter().map(String::as_str).collect();
        let ring = PolyRing::new(target, &names);
        let mut out = SparsePoly::zero(&ring);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), target.raw_from_u64(c[0]));
        }
        Ok(out)
    }
}

impl PartialEq for SparsePoly {
    fn eq(&self, other: &Self) -> bool {
        self.ring.compatible(&other.ring) && self.terms == other.terms
    }
}

impl Eq for SparsePoly {}

impl fmt::Debug for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} over {}", self, self.ring.field.describe())
    }
}

/// Terms in decreasing exponent order, e.g. `x^2*y + 4*z^3`.
impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let coeff = FqElem::from_raw(self.ring.field.clone(), c.clone());
            let vars: Vec<String> = m
                .0
                .iter()
                .zip(&self.ring.vars)
                .filter(|(e, _)| **e > 0)
                .map(|(e, v)| if *e == 1 { v.clone() } else { format!("{v}^{e}") })
                .collect();
            match (vars.is_empty(), coeff.is_one()) {
                (true, _) => write!(f, "{coeff}")?,
                (false, true) => write!(f, "{}", vars.join("*"))?,
                (false, false) => write!(f, "{coeff}*{}", vars.join("*"))?,
            }
        }
        Ok(())
    }
}

/// Gaussian elimination rank test.
pub fn is_invertible(field: &Arc<FqContext>, matrix: &[Vec<FqElem>]) -> bool {
    let n = matrix.len();
    let mut a: Vec<Vec<Raw>> = matrix
        .iter()
        .map(|row| row.iter().map(|c| c.raw().clone()).collect())
        .collect();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !field.raw_is_zero(&a[r][col])) else {
            return false;
        };
        a.swap(col, pivot);
        let inv = field.raw_inv(&a[col][col]).expect("pivot is nonzero");
        for r in col + 1..n {
            if field.raw_is_zero(&a[r][col]) {
                continue;
            }
            let factor = field.raw_mul(&a[r][col], &inv);
            for c in col..n {
                let sub = field.raw_mul(&factor, &a[col][c]);
                a[r][c] = field.raw_sub(&a[r][c], &sub);
            }
        }
    }
    true
}
