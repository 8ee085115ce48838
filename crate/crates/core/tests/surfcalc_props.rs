use frobsplit_core::rational::{q, qi, Q};
use frobsplit_core::surfcalc::*;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

/// Characteristic polynomial det(tI - M) by Faddeev–LeVerrier; index k holds
/// the coefficient of t^{n-k}.
fn charpoly(m: &[Vec<Q>]) -> Vec<Q> {
    let n = m.len();
    let mul = |a: &[Vec<Q>], b: &[Vec<Q>]| -> Vec<Vec<Q>> {
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).fold(Q::zero(), |s, k| s + &a[i][k] * &b[k][j])).collect())
            .collect()
    };
    let mut coeffs = vec![Q::one()];
    let mut mk: Vec<Vec<Q>> = vec![vec![Q::zero(); n]; n];
    for k in 1..=n {
        let mut next = mul(m, &mk);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &coeffs[k - 1];
        }
        mk = next;
        let am = mul(m, &mk);
        let trace = (0..n).fold(Q::zero(), |s, i| s + &am[i][i]);
        coeffs.push(-trace / qi(k as i64));
    }
    coeffs
}

/// A real symmetric matrix is negative definite iff every coefficient of
/// det(tI - M) is positive.
fn negative_definite_oracle(m: &[Vec<Q>]) -> bool {
    charpoly(m).iter().all(Signed::is_positive)
}

fn contracted_matrix(cd: &ContractionData) -> Vec<Vec<Q>> {
    cd.exceptional
        .iter()
        .map(|a| cd.exceptional.iter().map(|b| cd.source.dot(a, b)).collect())
        .collect()
}

#[test]
fn charpoly_oracle_sanity() {
    let a2 = vec![vec![qi(-2), qi(1)], vec![qi(1), qi(-2)]];
    assert_eq!(charpoly(&a2), vec![qi(1), qi(4), qi(3)]);
    assert!(negative_definite_oracle(&a2));
    assert!(!negative_definite_oracle(&[vec![qi(0), qi(1)], vec![qi(1), qi(0)]]));
}

#[test]
fn tower_contractions_are_negative_definite_by_oracle() {
    for n in 4..=9 {
        let t = build_tower_models(n).unwrap();
        for cd in [&t.psi, &t.h, &t.g, &t.f] {
            assert!(negative_definite_oracle(&contracted_matrix(cd)), "n={n} {}", cd.target.name);
            assert!(cd.projection_formula_holds());
        }
        for m in [&t.p1xp1, &t.s, &t.s_bar] {
            assert!(m.adjunction_failures().is_empty());
        }
    }
}

#[test]
fn ranks_for_a_range_of_n() {
    for n in 4..=12 {
        let r = build_del_pezzo_tower(n).unwrap();
        let ranks: Vec<usize> = r.ranks.iter().map(|(_, k)| *k).collect();
        assert_eq!(ranks, vec![2, 6, 6 + n as usize, 3, 2, 2]);
    }
}

#[test]
fn n4_example() {
    let r = build_del_pezzo_tower(4).unwrap();
    assert_eq!(r.cy_squared, q(-1, 2));
    assert_eq!(r.ey_squared, q(-2, 9));
    assert_eq!(r.a, q(9, 2));
    assert_eq!(r.one_minus_b, qi(1));
    assert_eq!(r.b_bound, qi(4));
    assert_eq!(r.cz_squared, qi(4));
    assert_eq!(r.cartier_index_kz_cz, 2);
    assert_eq!(r.different.len(), 4);
    assert!(r.different.iter().all(|d| d.coefficient == q(1, 2)));
    assert!(r.all_passed());
}

#[test]
fn n10_example() {
    let r = build_del_pezzo_tower(10).unwrap();
    assert_eq!(r.cy_squared, q(-13, 2));
    assert_eq!(r.one_minus_b, q(1, 13));
    assert_eq!(r.b_bound, q(4, 13));
    assert_eq!(r.minus_kc_dot_cy, q(1, 2));
}

#[test]
fn small_n_rejected() {
    for n in [-1, 0, 3] {
        assert!(build_del_pezzo_tower(n).is_err());
    }
}

#[test]
fn report_serializes_rationals_as_strings() {
    let r = build_del_pezzo_tower(5).unwrap();
    let v = serde_json::to_value(&r).unwrap();
    assert_eq!(v["cy_squared"], "-3/2");
    let back: TowerReport = serde_json::from_value(v).unwrap();
    assert_eq!(back, r);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Strict transforms: C̃·D̃ = C·D - m_C m_D, and K̃·C̃ = K·C + m_C.
    #[test]
    fn blow_up_arithmetic(mc in 0i64..3, mf in 0i64..3, md in 0i64..3) {
        let base = p1xp1_model();
        let b = blow_up(&base, "E", &[("C", mc), ("F1", mf), ("F3", md)]).unwrap();
        let m = |l: &str| match l { "C" => mc, "F1" => mf, "F3" => md, _ => 0 };
        for x in ["C", "F1", "F2", "F3", "F4"] {
            for y in ["C", "F1", "F2", "F3", "F4"] {
                let before = base.intersect(x, y).unwrap();
                prop_assert_eq!(b.intersect(x, y).unwrap(), before - qi(m(x) * m(y)));
            }
            prop_assert_eq!(b.k_dot(x).unwrap(), base.k_dot(x).unwrap() + qi(m(x)));
            prop_assert_eq!(b.intersect(x, "E").unwrap(), qi(m(x)));
        }
        prop_assert_eq!(b.k_squared(), base.k_squared() - qi(1));
        prop_assert!(b.hodge_index_holds());
    }

    /// Contracting a chain of (-2)-curves: discrepancies are zero and the
    /// pulled-back classes stay orthogonal to the chain.
    #[test]
    fn contracting_minus_two_chains(len in 1usize..5) {
        let mut m = blow_up(&p1xp1_model(), "E1", &[("F1", 1)]).unwrap();
        for i in 2..=len + 1 {
            let prev = format!("E{}", i - 1);
            m = blow_up(&m, &format!("E{i}"), &[(prev.as_str(), 1)]).unwrap();
        }
        let labels: Vec<String> = (1..=len).map(|i| format!("E{i}")).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        let cd = contract(&m, &refs, "down").unwrap();
        prop_assert!(negative_definite_oracle(&contracted_matrix(&cd)));
        prop_assert!(cd.discrepancies.iter().all(|(_, d)| d.is_zero()));
        prop_assert!(cd.projection_formula_holds());
        prop_assert_eq!(cd.target.rank(), m.rank() - len);
    }
}
