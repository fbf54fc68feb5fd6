//! Rational helpers shared by the geometric modules: exact Gaussian
//! elimination, nonnegative feasibility and `p/q` text round-tripping.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn q_vec(v: &[i64]) -> Vec<Q> {
    v.iter().map(|&x| q(x)).collect()
}

/// Outcome of solving `A x = b` exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Unique(Vec<Q>),
    Inconsistent,
    Underdetermined,
}

/// Solves `A x = b` for a matrix given as rows. Overdetermined systems are
/// fine as long as they are consistent.
pub fn solve(a: &[Vec<Q>], b: &[Q], ncols: usize) -> Solution {
    let (reduced, pivots) = row_reduce(a, b, ncols);
    // Inconsistent if a zero row has a nonzero right-hand side.
    for row in reduced.iter().skip(pivots.len()) {
        if !row[ncols].is_zero() {
            return Solution::Inconsistent;
        }
    }
    if pivots.len() < ncols {
        return Solution::Underdetermined;
    }
    let mut x = vec![Q::zero(); ncols];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = reduced[r][ncols].clone();
    }
    Solution::Unique(x)
}

/// Reduced row echelon form of the augmented matrix `[A | b]`. Returns the
/// reduced rows and the pivot column of each leading row.
fn row_reduce(a: &[Vec<Q>], b: &[Q], ncols: usize) -> (Vec<Vec<Q>>, Vec<usize>) {
    let mut m: Vec<Vec<Q>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m.len() {
            if i == r || m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            let pr = m[r].clone();
            for (x, y) in m[i].iter_mut().zip(pr.iter()) {
                *x -= &f * y;
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    (m, pivots)
}

/// Rank of a rational matrix given as rows.
pub fn rank(a: &[Vec<Q>], ncols: usize) -> usize {
    let zeros = vec![Q::zero(); a.len()];
    row_reduce(a, &zeros, ncols).1.len()
}

/// Decides whether `{x >= 0 : A x = b}` is nonempty by enumerating basic
/// solutions. Intended for the handful of variables a cone intersection
/// test produces.
pub fn nonneg_feasible(a: &[Vec<Q>], b: &[Q], ncols: usize) -> bool {
    let r = rank(a, ncols);
    if r == 0 {
        return b.iter().all(Zero::is_zero);
    }
    let mut chosen = Vec::with_capacity(r);
    basic_search(a, b, ncols, r, 0, &mut chosen)
}

fn basic_search(a: &[Vec<Q>], b: &[Q], ncols: usize, r: usize, start: usize, chosen: &mut Vec<usize>) -> bool {
    if chosen.len() == r {
        let sub: Vec<Vec<Q>> = a
            .iter()
            .map(|row| chosen.iter().map(|&j| row[j].clone()).collect())
            .collect();
        return match solve(&sub, b, r) {
            Solution::Unique(x) => x.iter().all(|v| !v.is_negative()),
            _ => false,
        };
    }
    for j in start..ncols {
        if ncols - j < r - chosen.len() {
            break;
        }
        chosen.push(j);
        if basic_search(a, b, ncols, r, j + 1, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Renders as `p` or `p/q`.
pub fn fmt_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parses `p` or `p/q` with a nonzero denominator.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.parse().ok()?;
            let d: BigInt = d.parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Q::new(n, d))
        }
        None => Some(Q::from_integer(s.parse().ok()?)),
    }
}

/// 2x2 determinant of integer vectors.
pub fn det2(a: &[i64], b: &[i64]) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}
