//! The invariant suite behind `frobsplit selftest`.

use std::time::Instant;

use frobsplit_core::certificate;
use frobsplit_core::finitefield::{is_prime, FqContext, PrimeModulus};
use frobsplit_core::splitcrit::{self, DivisorP1, MuChoice};
use frobsplit_core::surfcalc::build_del_pezzo_tower;
use frobsplit_core::threefold::{self, ConeFamily, Verdict};
use frobsplit_core::Config;

type Check = fn(&Config) -> Result<String, String>;

pub const CHECKS: &[(&str, Check)] = &[
    ("lemma_polynomial", lemma_polynomial),
    ("mu", mu),
    ("deuring", deuring),
    ("fedder", fedder),
    ("nu_bracketing", nu_bracketing),
    ("tower", tower),
    ("chain", chain),
    ("reduction", reduction),
    ("certificates", certificates),
];

fn pm(p: u64) -> PrimeModulus {
    PrimeModulus::new(p).expect("prime")
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn odd_primes(upto: u64) -> impl Iterator<Item = u64> {
    (3..=upto).filter(|&p| is_prime(p))
}

fn lemma_polynomial(_: &Config) -> Result<String, String> {
    let mut count = 0;
    for p in odd_primes(97) {
        let h = splitcrit::lemma_polynomial(pm(p)).map_err(err)?;
        let n = ((p - 1) / 2) as usize;
        ensure(h.coeff(n - 1).as_prime() == Some((n * n) as u64 % p), || format!("p={p}: μ^(n-1) coefficient"))?;
        for i in 0..=n {
            ensure(h.coeff(i) == h.coeff(n - i), || format!("p={p}: not palindromic at {i}"))?;
        }
        count += 1;
    }
    Ok(format!("{count} primes"))
}

fn mu(cfg: &Config) -> Result<String, String> {
    for p in [3u64, 5, 7, 11, 13, 17, 19, 23, 29] {
        let MuChoice::Found(mu) = splitcrit::find_nonsplit_mu(pm(p), cfg).map_err(err)? else {
            return Err(format!("p={p}: no μ"));
        };
        let d = splitcrit::half_configuration(&mu).map_err(err)?;
        for e in 1..=2 {
            ensure(!splitcrit::level_split_test(pm(p), e, &d, cfg).map_err(err)?, || {
                format!("p={p}: splits at level {e}")
            })?;
        }
    }
    Ok("p in 3..29".into())
}

fn deuring(cfg: &Config) -> Result<String, String> {
    let mut count = 0;
    for p in [5u64, 7, 11, 13, 17, 19, 23, 29, 31] {
        let k = FqContext::prime(pm(p));
        for l in 2..p {
            let lambda = k.embed_prime(l);
            let h = splitcrit::hasse_invariant(pm(p), &splitcrit::legendre_cubic(&lambda), cfg)
                .map_err(err)?
                .is_zero();
            let ss = splitcrit::point_count_legendre(pm(p), &lambda).map_err(err)? == p + 1;
            let d = DivisorP1::parse(pm(p), &format!("1/2@inf,1/2@0,1/2@1,1/2@{l}"), cfg).map_err(err)?;
            let ns = !splitcrit::level_split_test(pm(p), 1, &d, cfg).map_err(err)?;
            ensure(h == ss && ss == ns, || format!("p={p} λ={l}"))?;
            count += 1;
        }
    }
    Ok(format!("{count} Legendre curves"))
}

fn fedder(cfg: &Config) -> Result<String, String> {
    let fpure = splitcrit::fedder_hypersurface(pm(5), &threefold::e8_equation(pm(5)), cfg).map_err(err)?;
    ensure(!fpure, || "x^2 + y^3 + z^5 passes Fedder at p = 5".into())?;
    Ok("(x^2+y^3+z^5)^4 ∈ (x^5,y^5,z^5)".into())
}

fn nu_bracketing(cfg: &Config) -> Result<String, String> {
    for p in [3u64, 5, 7] {
        let d = DivisorP1::parse(pm(p), "1@inf", cfg).map_err(err)?;
        let zero = DivisorP1::zero(&FqContext::prime(pm(p)));
        for e in 1..=3 {
            let v = splitcrit::nu(pm(p), e, &zero, &d, cfg).map_err(err)?;
            let scale = splitcrit::level_scale(pm(p), e, cfg).map_err(err)?;
            ensure(splitcrit::bracketing_holds(v, &scale, &num_rational::BigRational::from_integer(1.into())), || {
                format!("p={p} e={e} ν={v}")
            })?;
        }
    }
    Ok("D = one point, p in {3,5,7}, e <= 3".into())
}

fn tower(_: &Config) -> Result<String, String> {
    for n in 4..=12 {
        let r = build_del_pezzo_tower(n).map_err(err)?;
        ensure(r.all_passed(), || format!("n={n}"))?;
    }
    Ok("n in 4..12".into())
}

fn chain(cfg: &Config) -> Result<String, String> {
    for p in [7u64, 11] {
        let fam = ConeFamily::legendre(FqContext::prime(pm(p)).embed_prime(3), 0).map_err(err)?;
        for n in 0..=12 {
            let c = threefold::canonicity_chain(&fam.with_n(n), cfg).map_err(err)?;
            let base = if n % 3 == 2 { Verdict::TerminalBase } else { Verdict::Smooth };
            ensure(c.base() == base && c.computed_evidence_holds(), || format!("p={p} n={n}"))?;
        }
    }
    Ok("p in {7,11}, n in 0..12".into())
}

fn reduction(cfg: &Config) -> Result<String, String> {
    for p in [5u64, 7, 11, 13] {
        let k = FqContext::prime(pm(p));
        for l in 2..p {
            for n in [p, p + 1, p + 5] {
                let fam = ConeFamily::legendre(k.embed_prime(l), n).map_err(err)?;
                let r = threefold::fpure_check_xn(&fam, cfg).map_err(err)?;
                ensure(r.reduction_agrees == Some(true), || format!("p={p} λ={l} n={n}"))?;
            }
        }
    }
    Ok("p in {5,7,11,13}".into())
}

fn certificates(cfg: &Config) -> Result<String, String> {
    let mut count = 0;
    for p in [2u64, 3, 5, 7, 11] {
        let certs = [
            certificate::delpezzo_certificate(pm(p), 4, None, cfg).map_err(err)?,
            certificate::threefold_certificate(pm(p), cfg).map_err(err)?,
        ];
        for c in certs {
            let v = serde_json::to_value(&c).map_err(err)?;
            let schema = crate::schema_errors(&v);
            ensure(schema.is_empty(), || format!("p={p} {}: {}", c.meta.command, schema.join("; ")))?;
            ensure(certificate::verify(&c, cfg).ok(), || format!("p={p} {}: replay", c.meta.command))?;
            count += 1;
        }
    }
    Ok(format!("{count} certificates replayed"))
}

/// Run the checks whose names contain `filter`; returns (all passed, table).
pub fn run(filter: Option<&str>, cfg: &Config) -> (bool, String) {
    let mut out = String::new();
    let mut all = true;
    let mut ran = 0;
    for (name, check) in CHECKS {
        if filter.is_some_and(|f| !name.contains(f)) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let result = check(cfg);
        let ms = start.elapsed().as_millis();
        match result {
            Ok(detail) => out.push_str(&format!("PASS  {name:18} {ms:>6} ms  {detail}\n")),
            Err(e) => {
                all = false;
                out.push_str(&format!("FAIL  {name:18} {ms:>6} ms  {e}\n"));
            }
        }
    }
    if ran == 0 {
        out.push_str("no checks matched the filter\n");
        all = false;
    }
    (all, out)
}
