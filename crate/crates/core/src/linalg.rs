//! Dense exact linear algebra: integer Smith normal form with transforms and
//! rational nullspaces.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;
pub type RatMatrix = Vec<Vec<BigRational>>;

pub fn identity(n: usize) -> IntMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

pub fn mat_mul(a: &IntMatrix, b: &IntMatrix, inner: usize, cols: usize) -> IntMatrix {
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(BigInt::zero(), |acc, k| acc + &row[k] * &b[k][j]))
                .collect()
        })
        .collect()
}

/// `U · A · V = D` with `U`, `V` unimodular and `D` diagonal with
/// nonnegative entries `d₁ | d₂ | …` (zeros last).
#[derive(Debug, Clone)]
pub struct IntSmith {
    pub rows: usize,
    pub cols: usize,
    /// Diagonal of `D`, length `min(rows, cols)`.
    pub diag: Vec<BigInt>,
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub v_inv: IntMatrix,
}

impl IntSmith {
    pub fn rank(&self) -> usize {
        self.diag.iter().filter(|d| !d.is_zero()).count()
    }
}

pub fn smith_int(input: &IntMatrix, rows: usize, cols: usize) -> IntSmith {
    let mut a = input.clone();
    let mut u = identity(rows);
    let mut v = identity(cols);
    let mut v_inv = identity(cols);
    let steps = rows.min(cols);

    'outer: for t in 0..steps {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for (i, row) in a.iter().enumerate().skip(t) {
                for (j, x) in row.iter().enumerate().skip(t) {
                    if !x.is_zero() && best.map_or(true, |(bi, bj)| x.abs() < a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else { break 'outer };
            if pi != t {
                a.swap(pi, t);
                u.swap(pi, t);
            }
            if pj != t {
                for row in a.iter_mut() {
                    row.swap(pj, t);
                }
                for row in v.iter_mut() {
                    row.swap(pj, t);
                }
                v_inv.swap(pj, t);
            }

            let mut dirty = false;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = &a[i][t] / &a[t][t];
                row_sub(&mut a, i, t, &q);
                row_sub(&mut u, i, t, &q);
                dirty |= !a[i][t].is_zero();
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = &a[t][j] / &a[t][t];
                col_sub(&mut a, j, t, &q);
                col_sub(&mut v, j, t, &q);
                // inverse of the column operation acts on rows of V⁻¹
                row_add(&mut v_inv, t, j, &q);
                dirty |= !a[t][j].is_zero();
            }
            if dirty {
                continue;
            }

            let pivot = a[t][t].clone();
            let offender = (t + 1..rows).find(|&i| a[i][t + 1..].iter().any(|x| !(x % &pivot).is_zero()));
            match offender {
                Some(i) => {
                    row_add(&mut a, t, i, &BigInt::one());
                    row_add(&mut u, t, i, &BigInt::one());
                }
                None => break,
            }
        }
        if a[t][t].is_negative() {
            for x in a[t].iter_mut() {
                *x = -&*x;
            }
            for x in u[t].iter_mut() {
                *x = -&*x;
            }
        }
    }

    let diag = (0..steps).map(|i| a[i][i].clone()).collect();
    IntSmith {
        rows,
        cols,
        diag,
        u,
        v,
        v_inv,
    }
}

fn row_sub(m: &mut IntMatrix, target: usize, src: usize, q: &BigInt) {
    let (t, s) = two_rows(m, target, src);
    for (x, y) in t.iter_mut().zip(s.iter()) {
        *x -= q * y;
    }
}

fn row_add(m: &mut IntMatrix, target: usize, src: usize, q: &BigInt) {
    let (t, s) = two_rows(m, target, src);
    for (x, y) in t.iter_mut().zip(s.iter()) {
        *x += q * y;
    }
}

fn col_sub(m: &mut IntMatrix, target: usize, src: usize, q: &BigInt) {
    for row in m.iter_mut() {
        let y = row[src].clone();
        row[target] -= q * y;
    }
}

fn two_rows<T>(m: &mut [Vec<T>], a: usize, b: usize) -> (&mut Vec<T>, &Vec<T>) {
    assert_ne!(a, b);
    if a < b {
        let (lo, hi) = m.split_at_mut(b);
        (&mut lo[a], &hi[0])
    } else {
        let (lo, hi) = m.split_at_mut(a);
        (&mut hi[0], &lo[b])
    }
}

/// Clears denominators row by row: returns integer rows and the positive
/// multiplier used for each row.
pub fn clear_row_denominators(rows: &[Vec<BigRational>]) -> (IntMatrix, Vec<BigInt>) {
    let mut out = Vec::with_capacity(rows.len());
    let mut mults = Vec::with_capacity(rows.len());
    for row in rows {
        let l = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        out.push(row.iter().map(|x| x.numer() * (&l / x.denom())).collect());
        mults.push(l);
    }
    (out, mults)
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(m: &mut RatMatrix, cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(p, r);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let (t, s) = two_rows(m, i, r);
                for (x, y) in t.iter_mut().zip(s.iter()) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank_q(m: &RatMatrix, cols: usize) -> usize {
    let mut m = m.clone();
    rref(&mut m, cols).len()
}

/// Basis of `{x : A x = 0}` for an `rows × cols` matrix `A`.
pub fn right_nullspace(a: &RatMatrix, cols: usize) -> RatMatrix {
    let mut m = a.clone();
    let pivots = rref(&mut m, cols);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![BigRational::zero(); cols];
            x[f] = BigRational::one();
            for (r, &p) in pivots.iter().enumerate() {
                x[p] = -m[r][f].clone();
            }
            x
        })
        .collect()
}

/// Basis of `{y : y · A = 0}`.
pub fn left_nullspace(a: &RatMatrix, rows: usize, cols: usize) -> RatMatrix {
    let t: RatMatrix = (0..cols).map(|j| (0..rows).map(|i| a[i][j].clone()).collect()).collect();
    right_nullspace(&t, rows)
}

/// Solves `y · A = b` over ℚ, if solvable.
pub fn solve_left(a: &RatMatrix, rows: usize, cols: usize, b: &[BigRational]) -> Option<Vec<BigRational>> {
    // augment the transpose: Aᵀ yᵀ = bᵀ
    let mut m: RatMatrix = (0..cols)
        .map(|j| {
            let mut r: Vec<BigRational> = (0..rows).map(|i| a[i][j].clone()).collect();
            r.push(b[j].clone());
            r
        })
        .collect();
    let pivots = rref(&mut m, rows + 1);
    if pivots.contains(&rows) {
        return None;
    }
    let mut y = vec![BigRational::zero(); rows];
    for (r, &p) in pivots.iter().enumerate() {
        y[p] = m[r][rows].clone();
    }
    Some(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(rows: &[&[i64]]) -> IntMatrix {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn check(a: &IntMatrix, rows: usize, cols: usize) -> IntSmith {
        let s = smith_int(a, rows, cols);
        let d = mat_mul(&mat_mul(&s.u, a, rows, cols), &s.v, cols, cols);
        for i in 0..rows {
            for j in 0..cols {
                let want = if i == j { s.diag[i].clone() } else { BigInt::zero() };
                assert_eq!(d[i][j], want, "UAV not diagonal at ({i},{j})");
            }
        }
        assert_eq!(mat_mul(&s.v, &s.v_inv, cols, cols), identity(cols));
        for w in s.diag.windows(2) {
            assert!(w[1].is_zero() || (!w[0].is_zero() && (&w[1] % &w[0]).is_zero()));
        }
        s
    }

    #[test]
    fn smith_diag_4_6() {
        let s = check(&int(&[&[4, 0], &[0, 6]]), 2, 2);
        assert_eq!(s.diag, vec![BigInt::from(2), BigInt::from(12)]);
    }

    #[test]
    fn smith_rectangular_and_zero() {
        let s = check(&int(&[&[2, 4, 4], &[-6, 6, 12], &[10, -4, -16]]), 3, 3);
        assert_eq!(s.diag, vec![BigInt::from(2), BigInt::from(6), BigInt::from(12)]);
        let s = check(&int(&[&[0, 0, 0]]), 1, 3);
        assert_eq!(s.diag, vec![BigInt::from(0)]);
        let s = check(&int(&[&[3], &[5]]), 2, 1);
        assert_eq!(s.diag, vec![BigInt::from(1)]);
    }

    #[test]
    fn nullspaces() {
        let q = |x: i64| BigRational::from_integer(BigInt::from(x));
        let a = vec![vec![q(1), q(2), q(3)], vec![q(2), q(4), q(6)]];
        let ker = right_nullspace(&a, 3);
        assert_eq!(ker.len(), 2);
        let left = left_nullspace(&a, 2, 3);
        assert_eq!(left.len(), 1);
        assert_eq!(&left[0][0] * q(1) + &left[0][1] * q(2), q(0));
        let y = solve_left(&a, 2, 3, &[q(2), q(4), q(6)]).unwrap();
        assert_eq!(&y[0] + &y[1] * q(2), q(2));
        assert!(solve_left(&a, 2, 3, &[q(1), q(0), q(0)]).is_none());
    }
}
