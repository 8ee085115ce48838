//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

use std::sync::Arc;
use std::time::{Duration, Instant};

use frobsplit_cli::{run_args, schema_errors, EXIT_OK};
use frobsplit_core::certificate::{self, Certificate, NodeKind};
use frobsplit_core::finitefield::{is_prime, FqContext, FqElem, PrimeModulus};
use frobsplit_core::polyfrob::{is_invertible, Monomial, PolyRing, SparsePoly};
use frobsplit_core::rational::{self, Q};
use frobsplit_core::splitcrit::{self, DivisorP1, MuChoice, P1Point};
use frobsplit_core::threefold::{self, ConeFamily, EvidenceKind, Verdict};
use frobsplit_core::{surfcalc, Config};
use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn(&Config) -> Outcome);

fn pm(p: u64) -> PrimeModulus {
    PrimeModulus::new(p).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<E: std::fmt::Display>(x: E) -> String {
    x.to_string()
}

fn cli(args: &[&str]) -> frobsplit_cli::Outcome {
    let mut full = vec!["frobsplit"];
    full.extend_from_slice(args);
    run_args(full, &Config::default())
}

fn criterion_1(cfg: &Config) -> Outcome {
    let mut slowest = Duration::ZERO;
    for p in [3u64, 5, 7, 11, 13, 17, 19, 23, 29] {
        let start = Instant::now();
        let out = cli(&["mu", "--p", &p.to_string()]);
        ensure(out.code == EXIT_OK, || format!("cmd_mu p={p}: {}", out.stderr))?;
        let MuChoice::Found(mu) = splitcrit::find_nonsplit_mu(pm(p), cfg).map_err(e)? else {
            return Err(format!("p={p}: no μ"));
        };
        ensure(out.stdout.starts_with(&format!("mu = {mu}\n")), || format!("p={p}: cmd_mu printed {}", out.stdout))?;
        ensure(!mu.is_zero() && !mu.is_one(), || format!("p={p}: μ = {mu}"))?;
        let h = splitcrit::lemma_polynomial(pm(p)).map_err(e)?.lift(mu.ctx()).map_err(e)?;
        ensure(h.eval(&mu).map_err(e)?.is_zero(), || format!("p={p}: μ = {mu} is not a root"))?;
        let d = splitcrit::half_configuration(&mu).map_err(e)?;
        for level in 1..=2 {
            ensure(!splitcrit::level_split_test(pm(p), level, &d, cfg).map_err(e)?, || {
                format!("p={p}: {d} splits at level {level}")
            })?;
        }
        let t = start.elapsed();
        ensure(t < Duration::from_secs(1), || format!("p={p}: {t:?}"))?;
        slowest = slowest.max(t);
    }

    let out = cli(&["mu", "--p", "2"]);
    ensure(out.stdout.contains("any four distinct points"), || out.stdout.clone())?;
    let k = FqContext::extension(pm(2), 2).map_err(e)?;
    let mut points: Vec<P1Point> = vec![P1Point::Infinity];
    points.extend(k.elements().map(P1Point::Finite));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..3 {
        let chosen: Vec<P1Point> = points.choose_multiple(&mut rng, 4).cloned().collect();
        let d = DivisorP1::uniform(&k, chosen, &rational::q(1, 2)).map_err(e)?;
        let split = splitcrit::level_split_test(pm(2), 1, &d, cfg).map_err(e)?;
        ensure(!split, || format!("p=2 configuration {trial}: {d} splits at level 1"))?;
    }
    Ok(format!("p in 3..29, slowest {slowest:?}"))
}

fn criterion_2(_: &Config) -> Outcome {
    let mut count = 0;
    for p in (3..=97u64).filter(|&p| is_prime(p)) {
        let h = splitcrit::lemma_polynomial(pm(p)).map_err(e)?;
        let n = ((p - 1) / 2) as usize;
        ensure(h.degree() == Some(n) && h.coeff(n).is_one(), || format!("p={p}: not monic of degree {n}"))?;
        let expected = (n as u64 * n as u64) % p;
        ensure(h.coeff(n - 1).as_prime() == Some(expected), || format!("p={p}: μ^(n-1) coefficient"))?;
        for i in 0..=n {
            ensure(h.coeff(i) == h.coeff(n - i), || format!("p={p}: asymmetric at {i}"))?;
        }
        count += 1;
    }
    Ok(format!("{count} odd primes up to 97"))
}

fn criterion_3(cfg: &Config) -> Outcome {
    let start = Instant::now();
    let mut count = 0;
    let mut supersingular = 0;
    for p in [5u64, 7, 11, 13, 17, 19, 23, 29, 31] {
        let k = FqContext::prime(pm(p));
        for l in 2..p {
            let lambda = k.embed_prime(l);
            let hasse_zero = splitcrit::hasse_invariant(pm(p), &splitcrit::legendre_cubic(&lambda), cfg)
                .map_err(e)?
                .is_zero();
            let count_is_p1 = splitcrit::point_count_legendre(pm(p), &lambda).map_err(e)? == p + 1;
            let pts = vec![
                P1Point::Infinity,
                P1Point::Finite(k.embed_prime(0)),
                P1Point::Finite(k.embed_prime(1)),
                P1Point::Finite(lambda.clone()),
            ];
            let d = DivisorP1::uniform(&k, pts, &rational::q(1, 2)).map_err(e)?;
            let nonsplit = !splitcrit::level_split_test(pm(p), 1, &d, cfg).map_err(e)?;
            ensure(hasse_zero == count_is_p1 && count_is_p1 == nonsplit, || {
                format!("p={p} λ={l}: hasse0={hasse_zero} #E=p+1:{count_is_p1} nonsplit={nonsplit}")
            })?;
            count += 1;
            supersingular += hasse_zero as usize;
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(30), || format!("{t:?}"))?;
    Ok(format!("{count} curves, {supersingular} supersingular, {t:?}"))
}

fn random_poly(rng: &mut ChaCha8Rng, ring: &Arc<PolyRing>, p: u64, terms: usize, max_exp: u64) -> SparsePoly {
    let n = ring.nvars();
    let t: Vec<(Vec<u64>, u64)> = (0..terms)
        .map(|_| ((0..n).map(|_| rng.gen_range(0..=max_exp)).collect(), rng.gen_range(1..p)))
        .collect();
    let refs: Vec<(&[u64], u64)> = t.iter().map(|(m, c)| (m.as_slice(), *c)).collect();
    SparsePoly::from_u64_terms(ring, &refs)
}

const NAMES: [&str; 4] = ["x", "y", "z", "w"];

fn criterion_4(cfg: &Config) -> Outcome {
    let fpure = splitcrit::fedder_hypersurface(pm(5), &threefold::e8_equation(pm(5)), cfg).map_err(e)?;
    ensure(!fpure, || "x^2 + y^3 + z^5 is F-pure at p = 5".into())?;
    let f4 = threefold::e8_equation(pm(5)).pow(4, cfg).map_err(e)?;
    ensure(f4.reduce_mod_frobpower(5).is_zero(), || "(x^2+y^3+z^5)^4 not in (x^5,y^5,z^5)".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..100 {
        let p = *[2u64, 3, 5, 7].choose(&mut rng).unwrap();
        let nvars = rng.gen_range(1..=4);
        let ring = PolyRing::new(&FqContext::prime(pm(p)), &NAMES[..nvars]);
        let terms = rng.gen_range(1..=5);
        let f = random_poly(&mut rng, &ring, p, terms, 4);
        let k = rng.gen_range(0..p);
        let pruned = f.pow_mod_frobpower(&BigUint::from(k), p, cfg).map_err(e)?;
        let mut naive = SparsePoly::one(&ring);
        for _ in 0..k {
            naive = naive.mul(&f).map_err(e)?;
        }
        ensure(pruned == naive.reduce_mod_frobpower(p), || format!("sample {i}: p={p} k={k} f={f}"))?;
    }

    let mut inside = 0;
    for i in 0..100 {
        let p = *[2u64, 3, 5, 7].choose(&mut rng).unwrap();
        let nvars = rng.gen_range(1..=4);
        let field = FqContext::prime(pm(p));
        let ring = PolyRing::new(&field, &NAMES[..nvars]);
        // half of the samples are built inside (x_i^p)
        let f = if i % 2 == 0 {
            let mut acc = SparsePoly::zero(&ring);
            for v in 0..nvars {
                let mut m = vec![0; nvars];
                m[v] = p;
                let xp = SparsePoly::monomial(&ring, Monomial(m), &field.embed_prime(1));
                let h = random_poly(&mut rng, &ring, p, 3, 3);
                acc = acc.add(&xp.mul(&h).map_err(e)?).map_err(e)?;
            }
            acc
        } else {
            random_poly(&mut rng, &ring, p, 4, 2 * p)
        };
        let matrix = loop {
            let m: Vec<Vec<FqElem>> = (0..nvars)
                .map(|_| (0..nvars).map(|_| field.embed_prime(rng.gen_range(0..p))).collect())
                .collect();
            if is_invertible(&field, &m) {
                break m;
            }
        };
        let g = f.substitute_linear(&matrix, cfg).map_err(e)?;
        let before = f.reduce_mod_frobpower(p).is_zero();
        let after = g.reduce_mod_frobpower(p).is_zero();
        ensure(before == after, || format!("substitution {i}: p={p} f={f}"))?;
        inside += before as usize;
    }
    Ok(format!("E8 at p=5, 100 powers, 100 substitutions ({inside} in the ideal)"))
}

fn criterion_5(cfg: &Config) -> Outcome {
    for p in [3u64, 5, 7] {
        let k = FqContext::prime(pm(p));
        let d = DivisorP1::uniform(&k, vec![P1Point::Infinity], &Q::from_integer(1.into())).map_err(e)?;
        for level in 1..=3 {
            let v = splitcrit::nu(pm(p), level, &DivisorP1::zero(&k), &d, cfg).map_err(e)?;
            let scale = Q::from_integer((p.pow(level) - 1).into());
            let lower = Q::from_integer(v.into());
            ensure(lower <= scale && scale <= lower.clone() + Q::from_integer(1.into()), || {
                format!("p={p} e={level}: ν={v}")
            })?;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut done = 0;
    let mut attempts = 0;
    while done < 20 {
        attempts += 1;
        ensure(attempts < 1000, || "too few valid configurations".into())?;
        let p = *[3u64, 5].choose(&mut rng).unwrap();
        let k = FqContext::prime(pm(p));
        let mut pts: Vec<P1Point> = vec![P1Point::Infinity];
        pts.extend(k.elements().map(P1Point::Finite));
        let count = rng.gen_range(1..=3);
        let chosen: Vec<P1Point> = pts.choose_multiple(&mut rng, count).cloned().collect();
        let d = DivisorP1::uniform(&k, chosen.clone(), &Q::from_integer(1.into())).map_err(e)?;
        let num = rng.gen_range(0..(p as i64 - 1));
        let delta = DivisorP1::new(&k, vec![(chosen[0].clone(), rational::q(num, p as i64 - 1))]).map_err(e)?;
        if splitcrit::nu(pm(p), 1, &delta, &d, cfg).map_err(e)? < 0 {
            continue;
        }
        let one = splitcrit::fst_bounds(pm(p), &delta, &d, 1, cfg).map_err(e)?;
        let two = splitcrit::fst_bounds(pm(p), &delta, &d, 2, cfg).map_err(e)?;
        let three = splitcrit::fst_bounds(pm(p), &delta, &d, 3, cfg).map_err(e)?;
        ensure(two.within(&one) && three.within(&two) && three.lower <= three.upper, || {
            format!("p={p} Δ={delta} D={d}: {one:?} {two:?} {three:?}")
        })?;
        done += 1;
    }
    Ok(format!("bracketing at p in {{3,5,7}}, {done} nested configurations"))
}

fn criterion_6(_: &Config) -> Outcome {
    let mut slowest = Duration::ZERO;
    for n in 4..=12i64 {
        let start = Instant::now();
        let r = surfcalc::build_del_pezzo_tower(n).map_err(e)?;
        let t = start.elapsed();
        let nq = Q::from_integer(n.into());
        let seven_halves = rational::q(7, 2);
        ensure(r.all_passed(), || format!("n={n}: failing check"))?;
        ensure(r.cy_squared == seven_halves.clone() - nq.clone(), || format!("n={n}: C_Y² = {}", r.cy_squared))?;
        let zero = Q::from_integer(0.into());
        let two = Q::from_integer(2.into());
        ensure(r.minus_kc_dot_cy > zero && r.minus_kc_dot_cy <= two, || format!("n={n}: -(K+C)·C"))?;
        let bound = two.clone() / (nq - seven_halves);
        ensure(r.one_minus_b > zero && r.one_minus_b <= bound && r.b_bound == bound, || {
            format!("n={n}: 1-b = {}", r.one_minus_b)
        })?;
        ensure(
            r.different.len() == 4 && r.different.iter().all(|d| d.coefficient == rational::q(1, 2)),
            || format!("n={n}: different {:?}", r.different),
        )?;
        let named = |s: &str| r.checks.iter().any(|c| c.name == s && c.passed);
        ensure(named("K_Y + C_Y + 1/2 E_Y ≡ 0"), || format!("n={n}: K_Y + C_Y + E_Y/2"))?;
        let nd = r.checks.iter().filter(|c| c.name.ends_with("contracted set negative definite"));
        ensure(nd.clone().count() >= 3 && nd.clone().all(|c| c.passed), || format!("n={n}: negative definiteness"))?;
        ensure(r.positivity.iter().all(|pr| pr.passes), || format!("n={n}: positivity"))?;
        let ranks: Vec<usize> = r.ranks.iter().map(|(_, k)| *k).collect();
        ensure(ranks[..5] == [2, 6, 6 + n as usize, 3, 2], || format!("n={n}: ranks {ranks:?}"))?;
        ensure(t < Duration::from_secs(1), || format!("n={n}: {t:?}"))?;
        slowest = slowest.max(t);
    }
    Ok(format!("n in 4..12, slowest {slowest:?}"))
}

fn criterion_7(cfg: &Config) -> Outcome {
    let mut steps = 0;
    for p in [7u64, 11] {
        let k = FqContext::prime(pm(p));
        for fam in [
            ConeFamily::legendre(k.embed_prime(3), 0).map_err(e)?,
            ConeFamily::weierstrass(pm(p), 1, 1, 0).map_err(e)?,
        ] {
            for n in 0..=12u64 {
                let chain = threefold::canonicity_chain(&fam.with_n(n), cfg).map_err(e)?;
                let base = if n % 3 == 2 { Verdict::TerminalBase } else { Verdict::Smooth };
                ensure(chain.base() == base, || format!("p={p} n={n}: base {:?}", chain.base()))?;
                ensure(chain.computed_evidence_holds(), || format!("p={p} n={n}: evidence"))?;
                for step in &chain.steps {
                    for ev in step.evidence.iter().filter(|ev| ev.label.starts_with("chart_smoothness")) {
                        ensure(ev.kind == EvidenceKind::Computed && ev.data["field_order"] == p * p, || {
                            format!("p={p} n={n}: {} not brute-forced over F_p^2", ev.label)
                        })?;
                    }
                }
                steps += chain.steps.len();
            }
        }
    }
    let mut reductions = 0;
    for p in [5u64, 7, 11, 13] {
        let k = FqContext::prime(pm(p));
        for l in 2..p {
            for n in [p, p + 1, p + 5] {
                let r = threefold::fpure_check_xn(&ConeFamily::legendre(k.embed_prime(l), n).map_err(e)?, cfg)
                    .map_err(e)?;
                ensure(r.reduction_agrees == Some(true), || format!("p={p} λ={l} n={n}"))?;
                reductions += 1;
            }
        }
    }
    Ok(format!("{steps} chain steps, {reductions} reductions agree"))
}

fn criterion_8(cfg: &Config) -> Outcome {
    let validator = frobsplit_cli::schema_validator();
    let mut slowest = Duration::ZERO;
    let mut nodes = 0;
    for p in [2u64, 3, 5, 7, 11] {
        let ps = p.to_string();
        for args in [vec!["delpezzo", "--p", &ps, "--n", "4"], vec!["threefold", "--p", &ps]] {
            let start = Instant::now();
            let out = cli(&args);
            let t = start.elapsed();
            ensure(out.code == EXIT_OK, || format!("{args:?}: {}", out.stderr))?;
            ensure(t < Duration::from_secs(5), || format!("{args:?}: {t:?}"))?;
            slowest = slowest.max(t);
            let value: serde_json::Value = serde_json::from_str(&out.stdout).map_err(e)?;
            ensure(validator.is_valid(&value), || format!("{args:?}: {:?}", schema_errors(&value)))?;
            let c: Certificate = serde_json::from_value(value).map_err(e)?;
            ensure(c.computed().count() > 0, || format!("{args:?}: no COMPUTED nodes"))?;
            ensure(
                c.nodes
                    .iter()
                    .filter(|n| n.kind == NodeKind::Cited)
                    .all(|n| n.paper_ref.as_deref().is_some_and(|r| !r.is_empty())),
                || format!("{args:?}: CITED node without reference"),
            )?;
            let report = certificate::verify(&c, cfg);
            ensure(report.ok(), || format!("{args:?}: replay {report:?}"))?;
            ensure(report.replay.len() == c.computed().count(), || format!("{args:?}: replay count"))?;
            nodes += c.nodes.len();
        }
    }
    Ok(format!("10 certificates, {nodes} nodes, slowest {slowest:?}"))
}

fn main() {
    let cfg = Config::default();
    let criteria: [Criterion; 8] = [
        ("1 four-point lemma", criterion_1),
        ("2 Hasse polynomial identities", criterion_2),
        ("3 Deuring triangle", criterion_3),
        ("4 Fedder desk checks", criterion_4),
        ("5 nu / fst machinery", criterion_5),
        ("6 del Pezzo tower identities", criterion_6),
        ("7 canonicity chains", criterion_7),
        ("8 end-to-end certificates", criterion_8),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let result = f(&cfg);
        let t = start.elapsed();
        match result {
            Ok(detail) => println!("PASS  criterion {name:32} {:>8.2?}  {detail}", t),
            Err(why) => {
                failed += 1;
                println!("FAIL  criterion {name:32} {:>8.2?}  {why}", t);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 8 criteria failed");
        std::process::exit(1);
    }
}
