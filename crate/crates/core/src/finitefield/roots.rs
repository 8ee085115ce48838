use std::sync::Arc;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{FqContext, FqElem, PrimeModulus, Raw, UniPoly};
use crate::config::Config;
use crate::error::{invalid, resource, Error, Result};

/// Fixed seed so that equal-degree splitting is reproducible.
const SPLIT_SEED: u64 = 0x5eed_f00d;

fn prime_factors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's test for a polynomial over a prime field.
pub fn is_irreducible(f: &UniPoly) -> Result<bool> {
    let ctx = f.ctx();
    if ctx.degree() != 1 {
        return Err(invalid("irreducibility test expects a prime-field polynomial"));
    }
    let m = match f.degree() {
        None | Some(0) => return Ok(false),
        Some(1) => return Ok(true),
        Some(m) => m,
    };
    let p = BigUint::from(ctx.p());
    let x = UniPoly::x(ctx);
    // frob[k] = X^(p^k) mod f
    let mut frob = Vec::with_capacity(m + 1);
    frob.push(x.rem(f)?);
    for k in 1..=m {
        let next = frob[k - 1].pow_mod(&p, f)?;
        frob.push(next);
    }
    if frob[m] != x.rem(f)? {
        return Ok(false);
    }
    for r in prime_factors(m) {
        let g = f.gcd(&frob[m / r].sub(&x)?)?;
        if g.degree() != Some(0) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The monic irreducible polynomial of degree `m` over `F_p` whose coefficient
/// vector `(c_{m-1}, ..., c_0)` is lexicographically smallest; equivalently the
/// one minimising `sum c_i p^i`.
pub fn find_irreducible(p: PrimeModulus, m: usize) -> Result<UniPoly> {
    if m == 0 {
        return Err(invalid("degree must be >= 1"));
    }
    let ctx = FqContext::prime(p);
    if m == 1 {
        return Ok(UniPoly::x(&ctx));
    }
    let q = ctx_order(p.get(), m).ok_or_else(|| resource(format!("{p}^{m} overflows")))?;
    for index in 0..q {
        let mut coeffs: Vec<u64> = Vec::with_capacity(m + 1);
        let mut rest = index;
        for _ in 0..m {
            coeffs.push(rest % p.get());
            rest /= p.get();
        }
        coeffs.push(1);
        let f = UniPoly::from_u64s(&ctx, &coeffs);
        if is_irreducible(&f)? {
            return Ok(f);
        }
    }
    Err(Error::Internal(format!(
        "no irreducible polynomial of degree {m} over F_{p}"
    )))
}

fn ctx_order(p: u64, m: usize) -> Option<u64> {
    (0..m).try_fold(1u64, |acc, _| acc.checked_mul(p))
}

/// All roots in `F_{p^m}` of a nonzero polynomial over `F_p`, in index order.
///
/// The part of `g` splitting over `F_{p^m}` is `gcd(g, X^{p^m} - X)`; its roots
/// are found by enumeration when the field is small and by randomized
/// equal-degree splitting (fixed seed) otherwise.
pub fn roots_in_ext(g: &UniPoly, m: usize, cfg: &Config) -> Result<Vec<FqElem>> {
    let base = g.ctx();
    if base.degree() != 1 {
        return Err(invalid("roots_in_ext expects a polynomial over the prime field"));
    }
    if g.is_zero() {
        return Err(invalid("the zero polynomial has every element as a root"));
    }
    let p = base.prime_modulus();
    let q = cfg.checked_power(p.get(), m as u64)?;
    let ext = FqContext::extension(p, m)?;

    let x = UniPoly::x(base);
    let mut frob = x.rem(g)?;
    let pb = BigUint::from(p.get());
    for _ in 0..m {
        frob = frob.pow_mod(&pb, g)?;
    }
    let split_part = g.gcd(&frob.sub(&x.rem(g)?)?)?;
    if split_part.degree().unwrap_or(0) == 0 {
        return Ok(Vec::new());
    }
    let h = split_part.lift(&ext)?;

    let mut roots: Vec<FqElem> = if q <= cfg.exhaustive_root_limit {
        (0..q)
            .map(|i| ext.raw_from_index(i))
            .filter(|r| ext.raw_is_zero(&h.eval_raw(r)))
            .map(|r| FqElem::from_raw(ext.clone(), r))
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(SPLIT_SEED);
        let mut attempts = cfg.split_attempts;
        split_linear(&h, &mut rng, &mut attempts)?
            .into_iter()
            .map(|r| FqElem::from_raw(ext.clone(), r))
            .collect()
    };
    roots.sort();
    if roots.len() != h.degree().unwrap() {
        return Err(Error::Internal(format!(
            "found {} roots of a split squarefree polynomial of degree {}",
            roots.len(),
            h.degree().unwrap()
        )));
    }
    Ok(roots)
}

fn random_raw(ctx: &Arc<FqContext>, rng: &mut ChaCha8Rng) -> Raw {
    (0..ctx.degree()).map(|_| rng.gen_range(0..ctx.p())).collect()
}

/// Roots of a monic squarefree polynomial that splits into linear factors.
fn split_linear(h: &UniPoly, rng: &mut ChaCha8Rng, attempts: &mut u32) -> Result<Vec<Raw>> {
    let ctx = h.ctx().clone();
    match h.degree() {
        None | Some(0) => return Ok(Vec::new()),
        Some(1) => {
            let c0 = h.coeff(0);
            let c1 = h.coeff(1);
            return Ok(vec![(-c0.checked_div(&c1)?).raw().clone()]);
        }
        _ => {}
    }
    let x = UniPoly::x(&ctx);
    let q = ctx.order_big();
    loop {
        if *attempts == 0 {
            return Err(resource("equal-degree splitting exhausted its attempt budget"));
        }
        *attempts -= 1;
        let a = random_raw(&ctx, rng);
        let witness = if ctx.p() == 2 {
            // absolute trace of a*X, which is F_2-valued on every root
            let mut y = x.scale(&a).rem(h)?;
            let mut trace = y.clone();
            for _ in 1..ctx.degree() {
                y = y.mul(&y)?.rem(h)?;
                trace = trace.add(&y)?;
            }
            trace
        } else {
            let shifted = x.add(&UniPoly::new(&ctx, vec![a]))?;
            let e = (&q - BigUint::from(1u32)) / BigUint::from(2u32);
            shifted.pow_mod(&e, h)?.sub(&UniPoly::one(&ctx))?
        };
        let d = h.gcd(&witness)?;
        let dd = d.degree().unwrap_or(0);
        if dd > 0 && Some(dd) < h.degree() {
            let (cofactor, _) = h.div_rem(&d)?;
            let mut out = split_linear(&d, rng, attempts)?;
            out.extend(split_linear(&cofactor.monic()?, rng, attempts)?);
            return Ok(out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pm(p: u64) -> PrimeModulus {
        PrimeModulus::new(p).unwrap()
    }

    /// Oracle: a polynomial of degree 2 or 3 is irreducible iff it has no root.
    fn has_root(f: &UniPoly) -> bool {
        f.ctx().elements().any(|a| f.eval(&a).unwrap().is_zero())
    }

    #[test]
    fn canonical_moduli() {
        let t = find_irreducible(pm(2), 1).unwrap();
        assert_eq!(t.to_string(), "X");
        // Scan of all monic quadratics over F_5 in index order: X^2+2 is first without roots.
        let ctx5 = FqContext::prime(pm(5));
        let first5 = (0..25u64)
            .map(|i| UniPoly::from_u64s(&ctx5, &[i % 5, i / 5, 1]))
            .find(|f| !has_root(f))
            .unwrap();
        assert_eq!(find_irreducible(pm(5), 2).unwrap(), first5);
        assert_eq!(first5.to_string(), "X^2 + 2");
        let ctx3 = FqContext::prime(pm(3));
        let first3 = (0..9u64)
            .map(|i| UniPoly::from_u64s(&ctx3, &[i % 3, i / 3, 1]))
            .find(|f| !has_root(f))
            .unwrap();
        assert_eq!(find_irreducible(pm(3), 2).unwrap(), first3);
        assert_eq!(first3.to_string(), "X^2 + 1");
    }

    #[test]
    fn irreducibility_matches_root_oracle_for_cubics() {
        let ctx = FqContext::prime(pm(3));
        for i in 0..27u64 {
            let f = UniPoly::from_u64s(&ctx, &[i % 3, (i / 3) % 3, i / 9, 1]);
            assert_eq!(is_irreducible(&f).unwrap(), !has_root(&f), "{f}");
        }
    }

    #[test]
    fn irreducible_has_no_roots_in_proper_subfields() {
        for (p, m) in [(2, 4), (3, 4), (2, 6), (5, 3)] {
            let f = find_irreducible(pm(p), m).unwrap();
            for k in 1..m {
                if m % k == 0 {
                    let roots = roots_in_ext(&f, k, &Config::default()).unwrap();
                    assert!(roots.is_empty(), "p={p} m={m} k={k}");
                }
            }
            assert_eq!(roots_in_ext(&f, m, &Config::default()).unwrap().len(), m);
        }
    }

    #[test]
    fn root_examples() {
        let cfg = Config::default();
        let f3 = FqContext::prime(pm(3));
        let r = roots_in_ext(&UniPoly::from_u64s(&f3, &[1, 1]), 1, &cfg).unwrap();
        assert_eq!(r, vec![f3.embed_prime(2)]);

        let f5 = FqContext::prime(pm(5));
        let g = UniPoly::from_u64s(&f5, &[1, 4, 1]);
        assert!(roots_in_ext(&g, 1, &cfg).unwrap().is_empty());
        let r2 = roots_in_ext(&g, 2, &cfg).unwrap();
        assert_eq!(r2.len(), 2);
        // exhaustive oracle over all 25 elements
        let ext = FqContext::extension(pm(5), 2).unwrap();
        let brute: Vec<FqElem> = ext
            .elements()
            .filter(|a| g.lift(&ext).unwrap().eval(a).unwrap().is_zero())
            .collect();
        assert_eq!(r2, brute);
        assert!(roots_in_ext(&UniPoly::zero(&f5), 1, &cfg).is_err());
    }

    #[test]
    fn splitting_path_agrees_with_enumeration() {
        let forced = Config {
            exhaustive_root_limit: 0,
            ..Config::default()
        };
        for (p, m, coeffs) in [
            (5u64, 2usize, vec![1u64, 4, 1]),
            (7, 2, vec![1, 2, 2, 1]),
            (2, 3, vec![1, 1, 0, 1]),
            (2, 4, vec![0, 1, 1, 0, 1, 1]),
            (11, 2, vec![1, 3, 1, 1, 3, 1]),
        ] {
            let base = FqContext::prime(pm(p));
            let g = UniPoly::from_u64s(&base, &coeffs);
            assert_eq!(
                roots_in_ext(&g, m, &forced).unwrap(),
                roots_in_ext(&g, m, &Config::default()).unwrap(),
                "p={p} m={m}"
            );
        }
    }

    #[test]
    fn large_field_uses_splitting() {
        // 1009^2 > 10^6, so this goes through equal-degree splitting.
        let base = FqContext::prime(pm(1009));
        // (X - 3)(X - 500)(X^2 + 1); X^2+1 splits over F_{1009^2}
        let g = UniPoly::from_u64s(&base, &[1006, 1])
            .mul(&UniPoly::from_u64s(&base, &[509, 1]))
            .unwrap()
            .mul(&UniPoly::from_u64s(&base, &[1, 0, 1]))
            .unwrap();
        let roots = roots_in_ext(&g, 2, &Config::default()).unwrap();
        assert_eq!(roots.len(), 4);
        let lifted = g.lift(roots[0].ctx()).unwrap();
        for r in &roots {
            assert!(lifted.eval(r).unwrap().is_zero());
        }
    }
}
