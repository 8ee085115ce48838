//! Dense linear algebra over Q.

use num_traits::{One, Signed, Zero};

use crate::rational::Q;

pub type QMat = Vec<Vec<Q>>;

pub fn zeros(rows: usize, cols: usize) -> QMat {
    vec![vec![Q::zero(); cols]; rows]
}

pub fn identity(n: usize) -> QMat {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Q::one();
    }
    m
}

pub fn transpose(m: &QMat) -> QMat {
    let cols = m.first().map_or(0, Vec::len);
    (0..cols).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect()
}

pub fn mat_mul(a: &QMat, b: &QMat) -> QMat {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(Q::zero(), |acc, k| acc + &row[k] * &b[k][j]))
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &QMat, v: &[Q]) -> Vec<Q> {
    a.iter()
        .map(|row| row.iter().zip(v).fold(Q::zero(), |acc, (x, y)| acc + x * y))
        .collect()
}

/// `u^T G v`.
pub fn bilinear(g: &QMat, u: &[Q], v: &[Q]) -> Q {
    u.iter()
        .zip(mat_vec(g, v))
        .fold(Q::zero(), |acc, (a, b)| acc + a * b)
}

pub fn is_symmetric(m: &QMat) -> bool {
    m.iter()
        .enumerate()
        .all(|(i, row)| row.len() == m.len() && (0..i).all(|j| row[j] == m[j][i]))
}

pub fn det(m: &QMat) -> Q {
    let n = m.len();
    let mut a = m.clone();
    let mut acc = Q::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Q::zero();
        };
        if pivot != col {
            a.swap(pivot, col);
            acc = -acc;
        }
        let p = a[col][col].clone();
        acc *= &p;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &p;
            for c in col..n {
                let sub = &factor * &a[col][c];
                a[r][c] -= sub;
            }
        }
    }
    acc
}

/// Row-reduced echelon form and the pivot columns.
pub fn rref(m: &QMat) -> (QMat, Vec<usize>) {
    let mut a = m.clone();
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = Q::one() / &a[r][c];
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let sub = &f * &a[r][j];
                    a[i][j] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

pub fn rank(m: &QMat) -> usize {
    rref(m).1.len()
}

/// Basis of `{v : m v = 0}`, one vector per free column.
pub fn nullspace(m: &QMat, cols: usize) -> Vec<Vec<Q>> {
    if m.is_empty() {
        return identity(cols);
    }
    let (r, pivots) = rref(m);
    (0..cols)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Q::zero(); cols];
            v[free] = Q::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r[row][free].clone();
            }
            v
        })
        .collect()
}

pub fn inverse(m: &QMat) -> Option<QMat> {
    let n = m.len();
    let aug: QMat = m
        .iter()
        .zip(identity(n))
        .map(|(row, id)| row.iter().cloned().chain(id).collect())
        .collect();
    let (r, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(r.into_iter().map(|row| row[n..].to_vec()).collect())
}

pub fn solve(a: &QMat, b: &[Q]) -> Option<Vec<Q>> {
    inverse(a).map(|inv| mat_vec(&inv, b))
}

/// Determinants of the leading principal submatrices.
pub fn leading_minors(m: &QMat) -> Vec<Q> {
    (1..=m.len())
        .map(|k| det(&m[..k].iter().map(|row| row[..k].to_vec()).collect()))
        .collect()
}

/// Sylvester: `(-1)^k Δ_k > 0` for every leading minor.
pub fn is_negative_definite(m: &QMat) -> bool {
    leading_minors(m).iter().enumerate().all(|(i, d)| {
        if i % 2 == 0 {
            d.is_negative()
        } else {
            d.is_positive()
        }
    })
}

/// `(positive, negative, zero)` counts of a symmetric form, by congruence
/// diagonalization.
pub fn signature(m: &QMat) -> (usize, usize, usize) {
    let mut a = m.clone();
    let n = a.len();
    let (mut pos, mut neg, mut zero) = (0, 0, 0);
    let mut active: Vec<usize> = (0..n).collect();
    while !active.is_empty() {
        let pivot = active.iter().copied().find(|&i| !a[i][i].is_zero());
        let pivot = match pivot {
            Some(p) => p,
            None => {
                let pair = active.iter().copied().find_map(|i| {
                    active
                        .iter()
                        .copied()
                        .find(|&j| j != i && !a[i][j].is_zero())
                        .map(|j| (i, j))
                });
                match pair {
                    None => {
                        zero += active.len();
                        break;
                    }
                    Some((i, j)) => {
                        // e_i -> e_i + e_j makes the diagonal entry 2 a_ij
                        for k in 0..n {
                            let add = a[j][k].clone();
                            a[i][k] += add;
                        }
                        for k in 0..n {
                            let add = a[k][j].clone();
                            a[k][i] += add;
                        }
                        i
                    }
                }
            }
        };
        let d = a[pivot][pivot].clone();
        if d.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        active.retain(|&i| i != pivot);
        for &i in &active {
            if a[i][pivot].is_zero() {
                continue;
            }
            let f = &a[i][pivot] / &d;
            for k in 0..n {
                let sub = &f * &a[pivot][k];
                a[i][k] -= sub;
            }
            for k in 0..n {
                let sub = &f * &a[k][pivot];
                a[k][i] -= sub;
            }
        }
    }
    (pos, neg, zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qi;

    fn m(rows: &[&[i64]]) -> QMat {
        rows.iter().map(|r| r.iter().map(|&x| qi(x)).collect()).collect()
    }

    #[test]
    fn determinants_and_inverses() {
        let a = m(&[&[2, 1], &[1, 3]]);
        assert_eq!(det(&a), qi(5));
        let inv = inverse(&a).unwrap();
        assert_eq!(mat_mul(&a, &inv), identity(2));
        assert!(inverse(&m(&[&[1, 2], &[2, 4]])).is_none());
        assert_eq!(det(&m(&[&[0, 1], &[1, 0]])), qi(-1));
    }

    #[test]
    fn nullspace_is_annihilated() {
        let a = m(&[&[1, 2, 3, 4], &[2, 4, 6, 8], &[0, 1, 1, 0]]);
        let ns = nullspace(&a, 4);
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!(mat_vec(&a, &v).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn definiteness_and_signature() {
        let a2 = m(&[&[-2, 1], &[1, -2]]);
        assert!(is_negative_definite(&a2));
        assert_eq!(signature(&a2), (0, 2, 0));
        let hyp = m(&[&[0, 1], &[1, 0]]);
        assert!(!is_negative_definite(&hyp));
        assert_eq!(signature(&hyp), (1, 1, 0));
        assert_eq!(signature(&m(&[&[0, 0], &[0, 0]])), (0, 0, 2));
        assert_eq!(signature(&m(&[&[1, 1], &[1, 1]])), (1, 0, 1));
    }
}
