//! Frobenius-splitting criteria on P^1 and for hypersurfaces at the origin.
//!
//! A pair `(P^1, Δ)` with `Δ = Σ a_i P_i` is split at level `e` (with
//! `q = p^e`) iff, for `d_i = ⌊(q-1) a_i⌋`, the degree `Σ d_i` is at most
//! `2(q-1)` and `Π ℓ_i^{d_i} ∉ (s^q, t^q)`, where `ℓ_i` is the linear form
//! vanishing at `P_i`: `t` at infinity, `s - λ t` at the finite point `λ`.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{invalid, Error, Result};
use crate::finitefield::{roots_in_ext, FqContext, FqElem, PrimeModulus, UniPoly};
use crate::polyfrob::{Monomial, PolyRing, SparsePoly};
use crate::rational::{self, Q};

/// A point of P^1: infinity or a finite coordinate `λ = s/t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum P1Point {
    Infinity,
    Finite(FqElem),
}

impl P1Point {
    fn lift(&self, ctx: &Arc<FqContext>) -> Result<P1Point> {
        match self {
            P1Point::Infinity => Ok(P1Point::Infinity),
            P1Point::Finite(x) if x.ctx().same_as(ctx) => Ok(self.clone()),
            P1Point::Finite(x) => match x.as_prime() {
                Some(c) if x.ctx().p() == ctx.p() => Ok(P1Point::Finite(ctx.embed_prime(c))),
                _ => Err(Error::ContextMismatch(x.ctx().describe(), ctx.describe())),
            },
        }
    }
}

/// `inf`, an integer for prime-field points, or `ext:c0,c1,...`.
impl fmt::Display for P1Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            P1Point::Infinity => write!(f, "inf"),
            P1Point::Finite(x) => match x.as_prime() {
                Some(c) => write!(f, "{c}"),
                None => {
                    let parts: Vec<String> = x.coeffs().iter().map(u64::to_string).collect();
                    write!(f, "ext:{}", parts.join(","))
                }
            },
        }
    }
}

/// A Q-divisor on P^1 over `F_{p^m}`: distinct points with coefficients `>= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DivisorP1 {
    ctx: Arc<FqContext>,
    entries: Vec<(P1Point, Q)>,
}

impl DivisorP1 {
    pub fn zero(ctx: &Arc<FqContext>) -> Self {
        DivisorP1 {
            ctx: ctx.clone(),
            entries: Vec::new(),
        }
    }

    pub fn new(ctx: &Arc<FqContext>, entries: Vec<(P1Point, Q)>) -> Result<Self> {
        let mut out: Vec<(P1Point, Q)> = Vec::with_capacity(entries.len());
        for (pt, c) in entries {
            if c.is_negative() {
                return Err(invalid(format!("negative coefficient {} at {pt}", rational::to_string(&c))));
            }
            let pt = pt.lift(ctx)?;
            if out.iter().any(|(q, _)| *q == pt) {
                return Err(invalid(format!("point {pt} repeated in divisor")));
            }
            out.push((pt, c));
        }
        Ok(DivisorP1 {
            ctx: ctx.clone(),
            entries: out,
        })
    }

    /// `c` times the reduced sum of the given points.
    pub fn uniform(ctx: &Arc<FqContext>, points: Vec<P1Point>, c: &Q) -> Result<Self> {
        Self::new(ctx, points.into_iter().map(|p| (p, c.clone())).collect())
    }

    /// Parse `COEFF@POINT,...` where `POINT` is `inf`, an integer (taken mod
    /// p) or `ext:c0,c1,...` in the canonical modulus of `F_{p^m}`. Commas
    /// inside an `ext:` list are continued until the next `@`-token.
    pub fn parse(p: PrimeModulus, text: &str, cfg: &Config) -> Result<Self> {
        let text = text.trim();
        let mut raw: Vec<(String, String)> = Vec::new();
        if !text.is_empty() {
            for tok in text.split(',').map(str::trim) {
                match tok.split_once('@') {
                    Some((c, pt)) => raw.push((c.trim().to_string(), pt.trim().to_string())),
                    None => match raw.last_mut() {
                        Some((_, pt)) if pt.starts_with("ext:") && !tok.is_empty() => {
                            pt.push(',');
                            pt.push_str(tok);
                        }
                        _ => return Err(Error::Parse(format!("expected COEFF@POINT, got {tok:?}"))),
                    },
                }
            }
        }
        let parse_int = |s: &str| -> Result<u64> {
            let v: BigInt = s
                .parse()
                .map_err(|_| Error::Parse(format!("not an integer: {s:?}")))?;
            Ok(v.mod_floor(&BigInt::from(p.get())).to_u64().expect("reduced mod p"))
        };
        let mut m = 1usize;
        for (_, pt) in &raw {
            if let Some(list) = pt.strip_prefix("ext:") {
                let len = list.split(',').count();
                if m != 1 && len != m {
                    return Err(Error::Parse("ext: points must all have the same length".into()));
                }
                m = len;
            }
        }
        if m > cfg.max_ext_degree {
            return Err(Error::Parse(format!(
                "extension degree {m} exceeds the configured maximum {}",
                cfg.max_ext_degree
            )));
        }
        let ctx = FqContext::extension(p, m)?;
        let mut entries = Vec::with_capacity(raw.len());
        for (c, pt) in raw {
            let coeff = rational::parse(&c)?;
            let point = if pt == "inf" {
                P1Point::Infinity
            } else if let Some(list) = pt.strip_prefix("ext:") {
                let coords: Vec<u64> = list.split(',').map(|s| parse_int(s.trim())).collect::<Result<_>>()?;
                P1Point::Finite(ctx.element(&coords))
            } else {
                P1Point::Finite(ctx.embed_prime(parse_int(&pt)?))
            };
            entries.push((point, coeff));
        }
        Self::new(&ctx, entries).map_err(|e| match e {
            Error::InvalidInput(msg) => Error::Parse(msg),
            other => other,
        })
    }

    pub fn ctx(&self) -> &Arc<FqContext> {
        &self.ctx
    }

    pub fn entries(&self) -> &[(P1Point, Q)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|(_, c)| c.is_zero())
    }

    pub fn degree(&self) -> Q {
        self.entries.iter().map(|(_, c)| c.clone()).sum()
    }

    pub fn coefficient_at(&self, pt: &P1Point) -> Q {
        self.entries
            .iter()
            .find(|(q, _)| q == pt)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Q::zero)
    }

    /// Re-express over `ctx`, embedding prime-field points.
    pub fn lift_to(&self, ctx: &Arc<FqContext>) -> Result<Self> {
        Self::new(ctx, self.entries.clone())
    }

    /// Entrywise `self <= other`.
    pub fn le(&self, other: &DivisorP1) -> bool {
        self.entries
            .iter()
            .all(|(pt, c)| *c <= other.coefficient_at(pt))
    }
}

impl fmt::Display for DivisorP1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(pt, c)| format!("{}@{pt}", rational::to_string(c)))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Outcome of the Fedder-type test on P^1 for integer multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitReport {
    pub split: bool,
    pub q: u64,
    /// Multiplicity of each linear form, in divisor order.
    pub multiplicities: Vec<u64>,
    pub degree: u64,
    /// A surviving monomial `s^a t^b`, `a, b < q`, when split.
    pub witness: Option<(u64, u64)>,
    /// Set when `Σ d_i > 2(q-1)`.
    pub degree_exceeded: bool,
}

/// `C(n, k) mod p` by Lucas' theorem.
pub fn binomial_mod_p(mut n: u64, mut k: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    while n > 0 || k > 0 {
        let (ni, ki) = (n % p, k % p);
        if ki > ni {
            return 0;
        }
        let mut c = 1u128;
        for j in 0..ki {
            c = c * ((ni - j) as u128) % p as u128;
            c = c * inv_mod((j + 1) % p, p) as u128 % p as u128;
        }
        acc = (acc as u128 * c % p as u128) as u64;
        n /= p;
        k /= p;
    }
    acc % p
}

fn inv_mod(a: u64, p: u64) -> u64 {
    let mut acc = 1u128;
    let (mut b, mut e) = (a as u128 % p as u128, p - 2);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % p as u128;
        }
        b = b * b % p as u128;
        e >>= 1;
    }
    acc as u64
}

fn st_ring(ctx: &Arc<FqContext>) -> Arc<PolyRing> {
    PolyRing::new(ctx, &["s", "t"])
}

/// `ℓ^m mod (s^q, t^q)` for the linear form of `pt`, expanded by Lucas.
fn linear_form_power(ring: &Arc<PolyRing>, pt: &P1Point, m: u64, q: u64) -> SparsePoly {
    let ctx = ring.field();
    match pt {
        P1Point::Infinity => {
            if m >= q {
                SparsePoly::zero(ring)
            } else {
                SparsePoly::monomial(ring, Monomial(vec![0, m]), &ctx.one())
            }
        }
        P1Point::Finite(lambda) => {
            // (s - λt)^m = Σ_a C(m,a) s^a (-λ)^{m-a} t^{m-a}
            let neg = -lambda.clone();
            let terms: Vec<(Monomial, FqElem)> = (m.saturating_sub(q - 1)..=m.min(q - 1))
                .filter_map(|a| {
                    let b = binomial_mod_p(m, a, ctx.p());
                    (b != 0).then(|| (Monomial(vec![a, m - a]), &neg.pow_u64(m - a) * &ctx.embed_prime(b)))
                })
                .collect();
            SparsePoly::from_terms(ring, terms).expect("valid terms")
        }
    }
}

/// Test `Π ℓ_i^{m_i} ∉ (s^q, t^q)` together with `Σ m_i <= 2(q-1)`.
pub fn split_test_multiplicities(
    ctx: &Arc<FqContext>,
    points: &[(P1Point, u64)],
    q: u64,
    cfg: &Config,
) -> Result<SplitReport> {
    let ring = st_ring(ctx);
    let multiplicities: Vec<u64> = points.iter().map(|(_, m)| *m).collect();
    let degree: u64 = multiplicities.iter().sum();
    let mut report = SplitReport {
        split: false,
        q,
        multiplicities,
        degree,
        witness: None,
        degree_exceeded: degree > 2 * (q - 1),
    };
    if report.degree_exceeded {
        return Ok(report);
    }
    let mut acc = SparsePoly::one(&ring);
    for (pt, m) in points {
        let pt = pt.lift(ctx)?;
        let factor = linear_form_power(&ring, &pt, *m, q);
        acc = acc.mul_with(&factor, Some(q), cfg)?;
        if acc.is_zero() {
            return Ok(report);
        }
    }
    report.witness = acc.monomials().next().map(|m| (m.0[0], m.0[1]));
    report.split = report.witness.is_some();
    Ok(report)
}

/// How `(p^e-1)Δ` is rounded to an integral divisor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rounding {
    /// `⌊(p^e-1)Δ⌋`: global F-splitting.
    Floor,
    /// `⌈(p^e-1)Δ⌉`: global sharp F-splitting.
    Ceil,
}

/// Level-`e` splitting report for `(P^1, Δ)`, with `d_i = ⌊(p^e-1) a_i⌋`.
pub fn level_split_report(p: PrimeModulus, e: u32, delta: &DivisorP1, cfg: &Config) -> Result<SplitReport> {
    level_split_report_with(p, e, delta, Rounding::Floor, cfg)
}

pub fn level_split_report_with(
    p: PrimeModulus,
    e: u32,
    delta: &DivisorP1,
    rounding: Rounding,
    cfg: &Config,
) -> Result<SplitReport> {
    if e == 0 {
        return Err(invalid("level e must be >= 1"));
    }
    if delta.ctx().p() != p.get() {
        return Err(Error::ContextMismatch(delta.ctx().describe(), format!("F_{p}")));
    }
    let q = cfg.checked_power(p.get(), e as u64)?;
    let qm1 = BigRational::from_integer(BigInt::from(q - 1));
    let mut points = Vec::with_capacity(delta.entries().len());
    for (pt, a) in delta.entries() {
        if !rational::in_unit_interval(a) {
            return Err(invalid(format!(
                "coefficient {} at {pt} lies outside [0, 1]",
                rational::to_string(a)
            )));
        }
        let scaled = a * &qm1;
        let d = match rounding {
            Rounding::Floor => scaled.floor(),
            Rounding::Ceil => scaled.ceil(),
        };
        points.push((pt.clone(), d.to_integer().to_u64().expect("0 <= d < q")));
    }
    split_test_multiplicities(delta.ctx(), &points, q, cfg)
}

pub fn level_split_test(p: PrimeModulus, e: u32, delta: &DivisorP1, cfg: &Config) -> Result<bool> {
    Ok(level_split_report(p, e, delta, cfg)?.split)
}

pub fn level_sharp_split_test(p: PrimeModulus, e: u32, delta: &DivisorP1, cfg: &Config) -> Result<bool> {
    Ok(level_split_report_with(p, e, delta, Rounding::Ceil, cfg)?.split)
}

/// `Σ_{i=0}^n C(n,i)^2 μ^i` over `F_p`, `n = (p-1)/2`.
pub fn lemma_polynomial(p: PrimeModulus) -> Result<UniPoly> {
    let p = p.get();
    if p == 2 {
        return Err(invalid("the μ-polynomial is defined for odd p"));
    }
    let n = (p - 1) / 2;
    let ctx = FqContext::prime(PrimeModulus::new(p)?);
    let coeffs: Vec<u64> = (0..=n)
        .map(|i| {
            let c = binomial_mod_p(n, i, p);
            c * c % p
        })
        .collect();
    Ok(UniPoly::from_u64s(&ctx, &coeffs))
}

/// Result of the μ search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MuChoice {
    /// `p = 2`: every four distinct points give a non-split pair.
    Any,
    Found(FqElem),
}

/// The four points `∞, 0, -1, -μ`.
pub fn four_point_configuration(mu: &FqElem) -> Vec<P1Point> {
    let ctx = mu.ctx();
    vec![
        P1Point::Infinity,
        P1Point::Finite(ctx.zero()),
        P1Point::Finite(-ctx.one()),
        P1Point::Finite(-mu.clone()),
    ]
}

pub fn half_configuration(mu: &FqElem) -> Result<DivisorP1> {
    DivisorP1::uniform(mu.ctx(), four_point_configuration(mu), &rational::q(1, 2))
}

/// A root `μ ∉ {0,1}` of the μ-polynomial, largest in index order, from
/// `F_p` if possible, else from `F_{p^2}`. Checks the half-configuration is
/// not split at level 1.
pub fn find_nonsplit_mu(p: PrimeModulus, cfg: &Config) -> Result<MuChoice> {
    if p.get() == 2 {
        return Ok(MuChoice::Any);
    }
    let h = lemma_polynomial(p)?;
    let admissible = |mu: &FqElem| !mu.is_zero() && !mu.is_one();
    let mut mu = roots_in_ext(&h, 1, cfg)?.into_iter().filter(admissible).max();
    if mu.is_none() {
        mu = roots_in_ext(&h, 2, cfg)?
            .into_iter()
            .filter(|x| admissible(x) && x.as_prime().is_none())
            .max();
    }
    let mu = mu.ok_or_else(|| Error::Internal(format!("no root of the μ-polynomial in F_{{{p}^2}}")))?;
    if level_split_test(p, 1, &half_configuration(&mu)?, cfg)? {
        return Err(Error::Internal(format!("μ = {mu} gives a split configuration")));
    }
    Ok(MuChoice::Found(mu))
}

/// `y^2 z - x(x - z)(x - λ z)` in variables `x, y, z` over `λ`'s field.
pub fn legendre_cubic(lambda: &FqElem) -> SparsePoly {
    let ctx = lambda.ctx();
    let ring = PolyRing::new(ctx, &["x", "y", "z"]);
    // x(x-z)(x-λz) = x^3 - (1+λ) x^2 z + λ x z^2
    let one = ctx.one();
    let terms = vec![
        (Monomial(vec![0, 2, 1]), one.clone()),
        (Monomial(vec![3, 0, 0]), -one.clone()),
        (Monomial(vec![2, 0, 1]), &one + lambda),
        (Monomial(vec![1, 0, 2]), -lambda.clone()),
    ];
    SparsePoly::from_terms(&ring, terms).expect("consistent ring")
}

/// Coefficient of `(xyz)^{p-1}` in `f^{p-1}` for a plane cubic `f(x,y,z)`.
pub fn hasse_invariant(p: PrimeModulus, cubic: &SparsePoly, cfg: &Config) -> Result<FqElem> {
    let p = p.get();
    if p <= 3 {
        return Err(invalid("the Hasse invariant is computed for p > 3"));
    }
    if cubic.field().p() != p {
        return Err(Error::ContextMismatch(cubic.field().describe(), format!("F_{p}")));
    }
    if cubic.ring().nvars() != 3 {
        return Err(invalid("a plane cubic needs exactly three variables"));
    }
    if cubic.is_zero() || !cubic.is_homogeneous() || cubic.total_degree() != Some(3) {
        return Err(invalid("input is not a homogeneous cubic"));
    }
    let power = cubic.pow_mod_frobpower(&BigUint::from(p - 1), p, cfg)?;
    power.coefficient_of(&Monomial(vec![p - 1; 3]))
}

/// Projective point count of `y^2 = x(x-1)(x-λ)` over `F_p`.
pub fn point_count_legendre(p: PrimeModulus, lambda: &FqElem) -> Result<u64> {
    let pv = p.get();
    if pv < 5 {
        return Err(invalid("point counts are taken for p >= 5"));
    }
    let l = match lambda.as_prime() {
        Some(l) if lambda.ctx().p() == pv => l,
        _ => return Err(invalid("λ must lie in the prime field")),
    };
    if l == 0 || l == 1 {
        return Err(invalid("λ must avoid 0 and 1"));
    }
    let half = (pv - 1) / 2;
    let mut count = 1u64;
    for x in 0..pv {
        let v = (x as u128 * ((x + pv - 1) % pv) as u128 % pv as u128 * ((x + pv - l) % pv) as u128
            % pv as u128) as u64;
        count += if v == 0 {
            1
        } else if pow_mod(v, half, pv) == 1 {
            2
        } else {
            0
        };
    }
    let dev = count as i128 - pv as i128 - 1;
    if dev * dev > 4 * pv as i128 {
        return Err(Error::Internal(format!("point count {count} violates the Hasse bound")));
    }
    Ok(count)
}

fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
    let (mut acc, mut b, m) = (1u128, (b % m) as u128, m as u128);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc as u64
}

/// Fedder's test at the origin: `f^{p-1} ∉ (x_1^p, ..., x_r^p)`.
pub fn fedder_hypersurface(p: PrimeModulus, f: &SparsePoly, cfg: &Config) -> Result<bool> {
    let p = p.get();
    if f.field().p() != p {
        return Err(Error::ContextMismatch(f.field().describe(), format!("F_{p}")));
    }
    if !f.constant_term().is_zero() {
        return Err(invalid("the origin is not on the hypersurface"));
    }
    Ok(!f.pow_mod_frobpower(&BigUint::from(p - 1), p, cfg)?.is_zero())
}

/// Multiplicities `(q-1)Δ + sD` over the union of supports, as integers.
fn scaled_points(
    ctx: &Arc<FqContext>,
    delta: &DivisorP1,
    d: &DivisorP1,
    q: u64,
) -> Result<(Vec<(P1Point, u64)>, Vec<u64>)> {
    let qm1 = BigRational::from_integer(BigInt::from(q - 1));
    let mut pts: Vec<P1Point> = Vec::new();
    for (pt, _) in delta.entries().iter().chain(d.entries()) {
        let pt = pt.lift(ctx)?;
        if !pts.contains(&pt) {
            pts.push(pt);
        }
    }
    let mut base = Vec::with_capacity(pts.len());
    let mut step = Vec::with_capacity(pts.len());
    for pt in &pts {
        let a = delta.lift_to(ctx)?.coefficient_at(pt) * &qm1;
        if !a.is_integer() {
            return Err(invalid(format!("(q-1)Δ is not integral at {pt} for q = {q}")));
        }
        let b = d.lift_to(ctx)?.coefficient_at(pt);
        if !b.is_integer() {
            return Err(invalid(format!("D must have integer coefficients, got {} at {pt}", rational::to_string(&b))));
        }
        base.push((pt.clone(), a.to_integer().to_u64().ok_or_else(|| invalid("multiplicity too large"))?));
        step.push(b.to_integer().to_u64().ok_or_else(|| invalid("multiplicity too large"))?);
    }
    Ok((base, step))
}

fn common_ctx(a: &DivisorP1, b: &DivisorP1) -> Result<Arc<FqContext>> {
    if a.ctx().same_as(b.ctx()) || b.ctx().degree() == 1 {
        Ok(a.ctx().clone())
    } else if a.ctx().degree() == 1 {
        Ok(b.ctx().clone())
    } else {
        Err(Error::ContextMismatch(a.ctx().describe(), b.ctx().describe()))
    }
}

/// Largest `s >= 0` with `(q-1)Δ + sD` split at `q = p^e`, or `-1` if `s = 0`
/// already fails. Scans downward from the degree bound.
pub fn nu(p: PrimeModulus, e: u32, delta: &DivisorP1, d: &DivisorP1, cfg: &Config) -> Result<i64> {
    if e == 0 {
        return Err(invalid("level e must be >= 1"));
    }
    if d.is_zero() {
        return Err(invalid("D must be nonzero"));
    }
    let q = cfg.checked_power(p.get(), e as u64)?;
    let ctx = common_ctx(delta, d)?;
    let (base, step) = scaled_points(&ctx, delta, d, q)?;
    let base_deg: u64 = base.iter().map(|(_, m)| m).sum();
    let step_deg: u64 = step.iter().sum();
    let bound = 2 * (q - 1);
    if base_deg > bound {
        return Ok(-1);
    }
    let s_max = (bound - base_deg) / step_deg;
    let test = |s: u64| -> Result<bool> {
        let pts: Vec<(P1Point, u64)> = base
            .iter()
            .zip(&step)
            .map(|((pt, m), k)| (pt.clone(), m + s * k))
            .collect();
        Ok(split_test_multiplicities(&ctx, &pts, q, cfg)?.split)
    };
    for s in (0..=s_max).rev() {
        if test(s)? {
            if s > 0 && !test(s - 1)? {
                return Err(Error::Internal(format!("splitting is not monotone at s = {s}")));
            }
            return Ok(s as i64);
        }
    }
    Ok(-1)
}

/// Bracketing of the F-split threshold by the levels `e <= e_max` at which
/// `(q-1)Δ` is integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FstInterval {
    #[serde(with = "rational::as_str")]
    pub lower: Q,
    #[serde(with = "rational::as_str")]
    pub upper: Q,
    /// `(e, ν(e))` for every valid level.
    pub per_e: Vec<(u32, i64)>,
}

impl FstInterval {
    pub fn contains(&self, c: &Q) -> bool {
        self.lower <= *c && *c <= self.upper
    }

    pub fn within(&self, other: &FstInterval) -> bool {
        other.lower <= self.lower && self.upper <= other.upper
    }
}

/// Whether `(p^e - 1)Δ` is integral.
pub fn level_is_valid(p: PrimeModulus, e: u32, delta: &DivisorP1, cfg: &Config) -> Result<bool> {
    let q = cfg.checked_power(p.get(), e as u64)?;
    let qm1 = BigRational::from_integer(BigInt::from(q - 1));
    Ok(delta.entries().iter().all(|(_, a)| (a * &qm1).is_integer()))
}

pub fn fst_bounds(p: PrimeModulus, delta: &DivisorP1, d: &DivisorP1, e_max: u32, cfg: &Config) -> Result<FstInterval> {
    if d.is_zero() {
        return Err(invalid("D must be nonzero"));
    }
    let mut per_e = Vec::new();
    let mut lower: Option<Q> = None;
    let mut upper: Option<Q> = None;
    for e in 1..=e_max {
        if !level_is_valid(p, e, delta, cfg)? {
            continue;
        }
        let v = nu(p, e, delta, d, cfg)?;
        if v < 0 {
            return Err(invalid(format!("(P^1, Δ) is not split at level {e}")));
        }
        let q = cfg.checked_power(p.get(), e as u64)?;
        let qm1 = BigInt::from(q - 1);
        let lo = BigRational::new(BigInt::from(v), qm1.clone());
        let hi = BigRational::new(BigInt::from(v + 1), qm1);
        lower = Some(lower.map_or(lo.clone(), |l| l.max(lo)));
        upper = Some(upper.map_or(hi.clone(), |u| u.min(hi)));
        per_e.push((e, v));
    }
    let (lower, upper) = match (lower, upper) {
        (Some(l), Some(u)) => (l, u),
        _ => return Err(invalid(format!("no level e <= {e_max} makes (p^e-1)Δ integral"))),
    };
    if lower > upper {
        return Err(Error::Internal("empty F-split threshold interval".into()));
    }
    Ok(FstInterval { lower, upper, per_e })
}

/// Exact `(p^e - 1)` as a rational, for bracketing checks.
pub fn level_scale(p: PrimeModulus, e: u32, cfg: &Config) -> Result<Q> {
    Ok(Q::from_integer(BigInt::from(cfg.checked_power(p.get(), e as u64)? - 1)))
}

/// Whether `ν ≤ (q-1)c ≤ ν+1`.
pub fn bracketing_holds(nu: i64, scale: &Q, c: &Q) -> bool {
    let v = Q::from_integer(BigInt::from(nu));
    let x = scale * c;
    v <= x && x <= v + Q::one()
}
