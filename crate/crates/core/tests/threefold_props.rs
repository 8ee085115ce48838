use frobsplit_core::finitefield::{FqContext, PrimeModulus};
use frobsplit_core::splitcrit::{hasse_invariant, legendre_cubic, point_count_legendre};
use frobsplit_core::threefold::*;
use frobsplit_core::Config;
use proptest::prelude::*;

fn pm(p: u64) -> PrimeModulus {
    PrimeModulus::new(p).unwrap()
}

/// Legendre cubic over F_p with integer coefficients: y^2 z - x^3 + (1+λ) x^2 z - λ x z^2.
fn legendre_terms(p: u64, l: u64) -> Vec<([u64; 3], u64)> {
    vec![
        ([0, 2, 1], 1),
        ([3, 0, 0], p - 1),
        ([2, 0, 1], (1 + l) % p),
        ([1, 0, 2], (p - l % p) % p),
    ]
}

/// Fedder oracle: expand f^{p-1} term by term via multinomial coefficients
/// (exact integers reduced mod p) and look for a monomial with every
/// exponent below p.
fn fedder_oracle(p: u64, terms: &[([u64; 3], u64)]) -> bool {
    let k = p - 1;
    let fact = |n: u64| (1..=n).fold(1u128, |a, b| a * b as u128);
    let mut acc: std::collections::HashMap<[u64; 3], u64> = Default::default();
    // compositions of k into terms.len() parts
    fn comps(k: u64, parts: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if parts == 1 {
            cur.push(k);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for i in 0..=k {
            cur.push(i);
            comps(k - i, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut all = Vec::new();
    comps(k, terms.len(), &mut Vec::new(), &mut all);
    for c in all {
        let mut coeff = fact(k);
        let mut exps = [0u64; 3];
        let mut scalar = 1u64;
        for (j, &cj) in c.iter().enumerate() {
            coeff /= fact(cj);
            for v in 0..3 {
                exps[v] += terms[j].0[v] * cj;
            }
            for _ in 0..cj {
                scalar = scalar * terms[j].1 % p;
            }
        }
        let val = (coeff % p as u128) as u64 * scalar % p;
        let e = acc.entry(exps).or_insert(0);
        *e = (*e + val) % p;
    }
    acc.iter().any(|(e, &c)| c != 0 && e.iter().all(|&x| x < p))
}

#[test]
fn fedder_oracle_agrees_with_three_variable_test() {
    let cfg = Config::default();
    for p in [5u64, 7, 11, 13] {
        let k = FqContext::prime(pm(p));
        for l in 2..p {
            let fam = ConeFamily::legendre(k.embed_prime(l), p).unwrap();
            let r = fpure_check_xn(&fam, &cfg).unwrap();
            assert_eq!(r.three_variable, Some(fedder_oracle(p, &legendre_terms(p, l))), "p={p} λ={l}");
        }
    }
}

#[test]
fn reduction_b_iff_3_for_small_primes() {
    let cfg = Config::default();
    for p in [2u64, 3, 5, 7, 11, 13] {
        let k = if p <= 3 { FqContext::extension(pm(p), 2).unwrap() } else { FqContext::prime(pm(p)) };
        let lambdas: Vec<_> = k.elements().filter(|x| !x.is_zero() && !x.is_one()).take(6).collect();
        for lambda in lambdas {
            for n in [p, p + 1, p + 5] {
                let fam = ConeFamily::legendre(lambda.clone(), n).unwrap();
                let r = fpure_check_xn(&fam, &cfg).unwrap();
                assert_eq!(r.reduction_agrees, Some(true), "p={p} λ={lambda} n={n}");
            }
        }
    }
    for p in [5u64, 7, 11, 13] {
        for (a, b) in [(0, 1), (1, 0), (2, 3), (p - 1, 1)] {
            for n in [p, p + 1, p + 5] {
                let fam = ConeFamily::weierstrass(pm(p), a, b, n).unwrap();
                let r = fpure_check_xn(&fam, &cfg).unwrap();
                assert_eq!(r.reduction_agrees, Some(true), "p={p} A={a} B={b} n={n}");
            }
        }
    }
}

#[test]
fn ordinarity_triangle() {
    let cfg = Config::default();
    for p in [5u64, 7, 11, 13] {
        let k = FqContext::prime(pm(p));
        for l in 2..p {
            let lambda = k.embed_prime(l);
            let fam = ConeFamily::legendre(lambda.clone(), p).unwrap();
            let fpure = fpure_check_xn(&fam, &cfg).unwrap().fpure;
            let ordinary = !hasse_invariant(pm(p), &legendre_cubic(&lambda), &cfg).unwrap().is_zero();
            let count_ok = point_count_legendre(pm(p), &lambda).unwrap() != p + 1;
            assert_eq!(fpure, ordinary, "p={p} λ={l}");
            assert_eq!(ordinary, count_ok, "p={p} λ={l}");
        }
    }
}

#[test]
fn chains_terminate_with_the_right_base() {
    let cfg = Config::default();
    for p in [7u64, 11] {
        let k = FqContext::prime(pm(p));
        let fam = ConeFamily::legendre(k.embed_prime(3), 0).unwrap();
        for n in 0..=12u64 {
            let chain = canonicity_chain(&fam.with_n(n), &cfg).unwrap();
            let expected = match n % 3 {
                2 => Verdict::TerminalBase,
                _ => Verdict::Smooth,
            };
            assert_eq!(chain.base(), expected, "p={p} n={n}");
            assert_eq!(chain.steps.len() as u64, n / 3 + 1);
            assert!(chain.computed_evidence_holds(), "p={p} n={n}");
            // chart smoothness was brute-forced over F_{p^2}
            if n >= 3 {
                let ev = chain.steps[0].evidence.iter().find(|e| e.label == "chart_smoothness_1").unwrap();
                assert_eq!(ev.kind, EvidenceKind::Computed);
                assert_eq!(ev.data["field_order"], serde_json::json!(p * p));
            }
        }
    }
}

#[test]
fn recursion_invariant() {
    let cfg = Config::default();
    let k = FqContext::prime(pm(7));
    let fam = ConeFamily::weierstrass(pm(7), 0, 1, 0).unwrap();
    let _ = &k;
    for n in 3..=12u64 {
        let big = canonicity_chain(&fam.with_n(n), &cfg).unwrap().verdicts();
        let small = canonicity_chain(&fam.with_n(n - 3), &cfg).unwrap().verdicts();
        let mut expected = vec![(n, Verdict::CrepantStep)];
        expected.extend(small);
        assert_eq!(big, expected);
    }
}

#[test]
fn chart_smoothness_degrades_to_cited_beyond_the_limit() {
    let cfg = Config {
        brute_force_limit: 30,
        ..Config::default()
    };
    let k = FqContext::prime(pm(7));
    let fam = ConeFamily::legendre(k.embed_prime(6), 3).unwrap();
    // 7 <= 30 < 49: brute force over F_7 only
    let chain = canonicity_chain(&fam, &cfg).unwrap();
    let ev = chain.steps[0].evidence.iter().find(|e| e.label == "chart_smoothness_2").unwrap();
    assert_eq!(ev.data["field_order"], serde_json::json!(7));
    let tiny = Config {
        brute_force_limit: 5,
        ..Config::default()
    };
    let chain = canonicity_chain(&fam, &tiny).unwrap();
    let ev = chain.steps[0].evidence.iter().find(|e| e.label == "chart_smoothness_2").unwrap();
    assert_eq!(ev.kind, EvidenceKind::Cited);
}

#[test]
fn non_fpure_data_per_prime() {
    let cfg = Config::default();
    for p in [2u64, 3, 5] {
        match non_fpure_canonical_data(pm(p), &cfg).unwrap() {
            NonFpureData::SmallPrime { fpure, .. } => assert!(!fpure),
            other => panic!("p={p}: {other:?}"),
        }
    }
    for p in [7u64, 11, 13] {
        match non_fpure_canonical_data(pm(p), &cfg).unwrap() {
            NonFpureData::Supersingular { family, hasse, chain, fpure, .. } => {
                assert!(hasse.is_zero());
                assert_eq!(family.n(), p);
                assert!(!fpure.fpure);
                assert!(chain.computed_evidence_holds());
            }
            other => panic!("p={p}: {other:?}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Every chart equation of the blow-up matches the expected normal form.
    #[test]
    fn chart_equations(p in prop::sample::select(vec![7u64, 11, 13]), a in 0u64..13, b in 0u64..13, n in 3u64..14) {
        let fam = ConeFamily::weierstrass(pm(p), a % p, b % p, n).unwrap();
        let f4 = fam.with_n(n - 3).cone_equation();
        prop_assert_eq!(blow_up_chart(&fam, 3).unwrap(), f4);
        for chart in 0..3 {
            let eq = blow_up_chart(&fam, chart).unwrap();
            prop_assert!(eq.total_degree().unwrap() <= (2 * n - 3).max(3));
        }
    }

    #[test]
    fn smoothness_matches_discriminant(p in prop::sample::select(vec![5u64, 7, 11]), a in 0u64..11, b in 0u64..11) {
        let cfg = Config::default();
        let fam = ConeFamily::weierstrass(pm(p), a % p, b % p, 0).unwrap();
        let r = smooth_cubic_check(&fam, &cfg).unwrap();
        let disc = (4 * (a % p).pow(3) + 27 * (b % p).pow(2)) % p;
        prop_assert_eq!(r.smooth, disc != 0);
        prop_assert_eq!(r.brute_force.unwrap().clean(), disc != 0);
    }
}
