//! Exact intersection-lattice calculus on surfaces: blow-ups, contractions of
//! negative-definite configurations, numerical pullback, discrepancies,
//! differents and positivity against a tracked set of curves.
//!
//! A contracted model is kept as the orthogonal complement of the contracted
//! curves inside the upstairs lattice, so its Gram matrix is rational.

pub mod linalg;
mod tower;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rational::{self, q, qi, Q};
use linalg::QMat;

pub use tower::{build_del_pezzo_tower, build_tower_models, Check, LabeledValue, TowerModels, TowerReport};

/// A named class, coordinates in its model's basis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveClass {
    pub label: String,
    #[serde(with = "rational::vec_as_str")]
    pub coords: Vec<Q>,
}

/// A free Q-lattice of curve classes with intersection form and canonical class.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceModel {
    pub name: String,
    pub basis: Vec<String>,
    pub gram: QMat,
    pub canonical: Vec<Q>,
    pub tracked: Vec<CurveClass>,
    /// Whether the model is a smooth surface (blow-ups are only allowed there).
    pub smooth: bool,
}

impl SurfaceModel {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn dot(&self, a: &[Q], b: &[Q]) -> Q {
        linalg::bilinear(&self.gram, a, b)
    }

    pub fn class(&self, label: &str) -> Result<&CurveClass> {
        self.tracked
            .iter()
            .find(|c| c.label == label)
            .ok_or_else(|| invalid(format!("{}: no tracked curve {label}", self.name)))
    }

    pub fn coords(&self, label: &str) -> Result<Vec<Q>> {
        Ok(self.class(label)?.coords.clone())
    }

    pub fn intersect(&self, a: &str, b: &str) -> Result<Q> {
        Ok(self.dot(&self.class(a)?.coords, &self.class(b)?.coords))
    }

    pub fn self_intersection(&self, label: &str) -> Result<Q> {
        self.intersect(label, label)
    }

    pub fn k_dot(&self, label: &str) -> Result<Q> {
        Ok(self.dot(&self.canonical, &self.class(label)?.coords))
    }

    pub fn k_squared(&self) -> Q {
        self.dot(&self.canonical, &self.canonical)
    }

    pub fn zero_class(&self) -> Vec<Q> {
        vec![Q::zero(); self.rank()]
    }

    /// `Σ c_i · class_i` over tracked labels plus `k · K`.
    pub fn combination(&self, k: &Q, terms: &[(&str, Q)]) -> Result<Vec<Q>> {
        let mut v: Vec<Q> = self.canonical.iter().map(|x| x * k).collect();
        for (label, c) in terms {
            for (slot, x) in v.iter_mut().zip(&self.class(label)?.coords) {
                *slot += x * c;
            }
        }
        Ok(v)
    }

    /// Zero in the basis and orthogonal to every tracked class.
    pub fn numerically_trivial(&self, v: &[Q]) -> bool {
        v.iter().all(Zero::is_zero)
            && self
                .tracked
                .iter()
                .all(|c| self.dot(v, &c.coords).is_zero())
    }

    pub fn signature(&self) -> (usize, usize, usize) {
        linalg::signature(&self.gram)
    }

    /// Gram symmetric and of signature `(1, rank - 1)`.
    pub fn hodge_index_holds(&self) -> bool {
        linalg::is_symmetric(&self.gram) && self.signature() == (1, self.rank() - 1, 0)
    }

    /// Labels of tracked curves violating `K·T + T² = -2` or having a
    /// non-integral self-intersection. Only meaningful on smooth models.
    pub fn adjunction_failures(&self) -> Vec<String> {
        self.tracked
            .iter()
            .filter(|c| {
                let t2 = self.dot(&c.coords, &c.coords);
                let kt = self.dot(&self.canonical, &c.coords);
                !t2.is_integer() || kt + t2 != qi(-2)
            })
            .map(|c| c.label.clone())
            .collect()
    }
}

/// `P^1 × P^1` with the diagonal `C` and two fibres of each ruling.
pub fn p1xp1_model() -> SurfaceModel {
    let f1 = vec![qi(1), qi(0)];
    let f2 = vec![qi(0), qi(1)];
    let class = |label: &str, coords: &Vec<Q>| CurveClass {
        label: label.into(),
        coords: coords.clone(),
    };
    SurfaceModel {
        name: "P1xP1".into(),
        basis: vec!["f1".into(), "f2".into()],
        gram: vec![vec![qi(0), qi(1)], vec![qi(1), qi(0)]],
        canonical: vec![qi(-2), qi(-2)],
        tracked: vec![
            class("C", &vec![qi(1), qi(1)]),
            class("F1", &f1),
            class("F2", &f1),
            class("F3", &f2),
            class("F4", &f2),
        ],
        smooth: true,
    }
}

/// Blow up one point with exceptional curve `label`; `mults` gives the
/// multiplicity of each tracked curve through the point (absent = 0).
pub fn blow_up(model: &SurfaceModel, label: &str, mults: &[(&str, i64)]) -> Result<SurfaceModel> {
    if !model.smooth {
        return Err(invalid(format!("{} is not a smooth model", model.name)));
    }
    if model.tracked.iter().any(|c| c.label == label) {
        return Err(invalid(format!("label {label} already in use")));
    }
    for (name, m) in mults {
        if *m < 0 {
            return Err(invalid(format!("negative multiplicity {m} for {name}")));
        }
        model.class(name)?;
    }
    let r = model.rank();
    let mut gram = model.gram.clone();
    for row in gram.iter_mut() {
        row.push(Q::zero());
    }
    let mut last = vec![Q::zero(); r + 1];
    last[r] = qi(-1);
    gram.push(last);
    let extend = |v: &[Q], e: Q| -> Vec<Q> { v.iter().cloned().chain(std::iter::once(e)).collect() };
    let mut tracked: Vec<CurveClass> = model
        .tracked
        .iter()
        .map(|c| {
            let m = mults
                .iter()
                .find(|(n, _)| *n == c.label)
                .map_or(0, |(_, m)| *m);
            CurveClass {
                label: c.label.clone(),
                coords: extend(&c.coords, qi(-m)),
            }
        })
        .collect();
    let mut e = vec![Q::zero(); r + 1];
    e[r] = Q::one();
    tracked.push(CurveClass {
        label: label.into(),
        coords: e,
    });
    let mut basis = model.basis.clone();
    basis.push(label.into());
    Ok(SurfaceModel {
        name: format!("Bl_{label}({})", model.name),
        basis,
        gram,
        canonical: extend(&model.canonical, Q::one()),
        tracked,
        smooth: true,
    })
}

/// A birational contraction of a negative-definite set of tracked curves.
#[derive(Debug, Clone)]
pub struct ContractionData {
    pub source: SurfaceModel,
    pub target: SurfaceModel,
    pub contracted: Vec<String>,
    /// Upstairs coordinates of the contracted curves (one row each).
    pub exceptional: QMat,
    /// Columns are the pullbacks of the target basis.
    pub embedding: QMat,
    /// Maps upstairs coordinates to target coordinates.
    pub pushforward_map: QMat,
    /// `(label, d)` with `K_up = π^*K_down + Σ d E`.
    pub discrepancies: Vec<(String, Q)>,
    pub leading_minors: Vec<Q>,
}

impl ContractionData {
    pub fn pullback(&self, down: &[Q]) -> Vec<Q> {
        linalg::mat_vec(&self.embedding, down)
    }

    pub fn pushforward(&self, up: &[Q]) -> Vec<Q> {
        linalg::mat_vec(&self.pushforward_map, up)
    }

    /// Coefficients `a` with `π^*π_*v = v + Σ a_j E_j`.
    pub fn exceptional_part(&self, up: &[Q]) -> Vec<Q> {
        let back = self.pullback(&self.pushforward(up));
        let diff: Vec<Q> = back.iter().zip(up).map(|(a, b)| a - b).collect();
        self.exceptional_coordinates(&diff)
    }

    fn exceptional_coordinates(&self, v: &[Q]) -> Vec<Q> {
        let g = &self.source.gram;
        let et = &self.exceptional;
        let m = linalg::mat_mul(&linalg::mat_mul(et, g), &linalg::transpose(et));
        let rhs: Vec<Q> = et.iter().map(|e| linalg::bilinear(g, e, v)).collect();
        linalg::solve(&m, &rhs).expect("negative definite")
    }

    /// Mumford pullbacks are orthogonal to the contracted curves and
    /// preserve intersection numbers, checked on the target basis.
    pub fn projection_formula_holds(&self) -> bool {
        let rt = self.target.rank();
        let unit = |i: usize| -> Vec<Q> { (0..rt).map(|j| if i == j { Q::one() } else { Q::zero() }).collect() };
        (0..rt).all(|i| {
            let pi = self.pullback(&unit(i));
            self.exceptional
                .iter()
                .all(|e| self.source.dot(&pi, e).is_zero())
                && (0..rt).all(|j| self.source.dot(&pi, &self.pullback(&unit(j))) == self.target.gram[i][j])
        })
    }

    /// Connected components of the contracted curves, by index.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let k = self.contracted.len();
        let mut seen = vec![false; k];
        let mut out = Vec::new();
        for start in 0..k {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start];
            let mut comp = Vec::new();
            seen[start] = true;
            while let Some(i) = stack.pop() {
                comp.push(i);
                for j in 0..k {
                    if !seen[j] && !self.source.dot(&self.exceptional[i], &self.exceptional[j]).is_zero() {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Contract the tracked curves `labels`; the target model is named `name`.
pub fn contract(model: &SurfaceModel, labels: &[&str], name: &str) -> Result<ContractionData> {
    let exceptional: QMat = labels
        .iter()
        .map(|l| model.coords(l))
        .collect::<Result<_>>()?;
    let g = &model.gram;
    let m = linalg::mat_mul(&linalg::mat_mul(&exceptional, g), &linalg::transpose(&exceptional));
    let leading_minors = linalg::leading_minors(&m);
    if !labels.is_empty() && !linalg::is_negative_definite(&m) {
        return Err(Error::IdentityFailed(format!(
            "{}: intersection matrix of {labels:?} is not negative definite",
            model.name
        )));
    }
    let eg = linalg::mat_mul(&exceptional, g);
    let complement = linalg::nullspace(&eg, model.rank());
    let embedding = linalg::transpose(&complement);
    let gram = linalg::mat_mul(&linalg::mat_mul(&complement, g), &embedding);
    let gram_inv = linalg::inverse(&gram).ok_or_else(|| Error::Internal("degenerate complement lattice".into()))?;
    let pushforward_map = linalg::mat_mul(&linalg::mat_mul(&gram_inv, &complement), g);
    let push = |v: &[Q]| linalg::mat_vec(&pushforward_map, v);
    let tracked = model
        .tracked
        .iter()
        .filter(|c| !labels.contains(&c.label.as_str()))
        .map(|c| CurveClass {
            label: c.label.clone(),
            coords: push(&c.coords),
        })
        .collect();
    let target = SurfaceModel {
        name: name.into(),
        basis: (0..complement.len()).map(|i| format!("{name}.b{i}")).collect(),
        gram,
        canonical: push(&model.canonical),
        tracked,
        smooth: false,
    };
    let mut cd = ContractionData {
        source: model.clone(),
        target,
        contracted: labels.iter().map(|s| s.to_string()).collect(),
        exceptional,
        embedding,
        pushforward_map,
        discrepancies: Vec::new(),
        leading_minors,
    };
    if !labels.is_empty() {
        let neg = cd.exceptional_part(&model.canonical);
        cd.discrepancies = labels
            .iter()
            .zip(neg)
            .map(|(l, a)| (l.to_string(), -a))
            .collect();
    }
    Ok(cd)
}

/// Different of `curve` under the contraction: for each cluster of contracted
/// curves meeting it, `Σ c_j (E_j · C)` where `π^*(K + C)_down = K + C + Σ c_j E_j`.
pub fn different_coefficients(cd: &ContractionData, curve: &str) -> Result<Vec<(Vec<String>, Q)>> {
    if cd.contracted.iter().any(|l| l == curve) {
        return Err(invalid(format!("{curve} is contracted")));
    }
    let src = &cd.source;
    let c = src.coords(curve)?;
    if cd.contracted.is_empty() {
        return Ok(Vec::new());
    }
    let log: Vec<Q> = src.canonical.iter().zip(&c).map(|(k, x)| k + x).collect();
    let coeffs = cd.exceptional_part(&log);
    let mut out = Vec::new();
    for cluster in cd.clusters() {
        let meets = cluster.iter().any(|&j| !src.dot(&cd.exceptional[j], &c).is_zero());
        if !meets {
            continue;
        }
        let value = cluster
            .iter()
            .fold(Q::zero(), |acc, &j| acc + &coeffs[j] * src.dot(&cd.exceptional[j], &c));
        out.push((cluster.iter().map(|&j| cd.contracted[j].clone()).collect(), value));
    }
    Ok(out)
}

/// Lowest common denominator of the log-pullback coefficients of `K + curve`:
/// the Cartier index of `K_down + curve_down` at the contracted points.
pub fn log_pullback_index(cd: &ContractionData, curve: &str) -> Result<num_bigint::BigInt> {
    let src = &cd.source;
    let c = src.coords(curve)?;
    let log: Vec<Q> = src.canonical.iter().zip(&c).map(|(k, x)| k + x).collect();
    if cd.contracted.is_empty() {
        return Ok(num_bigint::BigInt::one());
    }
    Ok(rational::common_denominator(&cd.exceptional_part(&log)))
}

/// Nakai–Moishezon style report against the tracked curves only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub model: String,
    pub class: String,
    #[serde(with = "rational::as_str")]
    pub self_intersection: Q,
    pub against: Vec<(String, String)>,
    pub positive_square: bool,
    pub positive_on_tracked: bool,
    pub passes: bool,
    pub scope: String,
}

pub fn positivity_check(model: &SurfaceModel, name: &str, d: &[Q]) -> PositivityReport {
    let sq = model.dot(d, d);
    let against: Vec<(String, Q)> = model
        .tracked
        .iter()
        .map(|c| (c.label.clone(), model.dot(d, &c.coords)))
        .collect();
    let positive_square = sq.is_positive();
    let positive_on_tracked = against.iter().all(|(_, v)| v.is_positive());
    PositivityReport {
        model: model.name.clone(),
        class: name.into(),
        self_intersection: sq,
        against: against
            .into_iter()
            .map(|(l, v)| (l, rational::to_string(&v)))
            .collect(),
        positive_square,
        positive_on_tracked,
        passes: positive_square && positive_on_tracked,
        scope: "tracked curves only".into(),
    }
}

/// `7/2 - n`.
pub fn expected_cy_squared(n: i64) -> Q {
    q(7, 2) - qi(n)
}

/// `2 / (n - 7/2)`.
pub fn b_bound(n: i64) -> Q {
    BigRational::from_integer(2.into()) / (qi(n) - q(7, 2))
}
