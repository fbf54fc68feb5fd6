//! Exact integer linear algebra: Smith normal form, saturated kernels and
//! lattice quotients.
//!
//! Everything here works over [`BigInt`]; pivots in the Smith reduction grow
//! quickly even for tiny inputs, so no machine-word arithmetic is used.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// A dense integer matrix stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntegerMatrix {
    /// Builds a matrix from row-major entries. Panics if the entry count is
    /// not `rows * cols`.
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must be rows*cols");
        Self { rows, cols, entries }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::new(rows, cols, vec![BigInt::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    /// Builds a matrix from `i64` rows. All rows must have the same length;
    /// `cols` is only consulted when `rows` is empty.
    pub fn from_rows_i64(rows: &[Vec<i64>], cols: usize) -> Self {
        let cols = rows.first().map_or(cols, Vec::len);
        let entries = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), cols, "ragged rows");
                r.iter().map(|&x| BigInt::from(x))
            })
            .collect();
        Self::new(rows.len(), cols, entries)
    }

    /// Builds a matrix whose rows are the given vectors.
    pub fn from_rows(rows: &[Vec<BigInt>], cols: usize) -> Self {
        let cols = rows.first().map_or(cols, Vec::len);
        let entries = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.len(), cols, "ragged rows");
                r.iter().cloned()
            })
            .collect();
        Self::new(rows.len(), cols, entries)
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<BigInt>], rows: usize) -> Self {
        Self::from_rows(columns, rows).transpose()
    }

    pub fn diagonal(diag: &[BigInt]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m.set(i, i, d.clone());
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: BigInt) {
        self.entries[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> Vec<BigInt> {
        self.entries[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn row_vectors(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn column_vectors(&self) -> Vec<Vec<BigInt>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.entries[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self.get(i, j) * &v[j])
                    .fold(BigInt::zero(), |acc, x| acc + x)
            })
            .collect()
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "column mismatch");
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Self::new(self.rows + other.rows, self.cols, entries)
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m.get(k, k).is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !m.get(i, k).is_zero()) else {
                    return BigInt::zero();
                };
                m.swap_rows(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let val = (m.get(i, j) * m.get(k, k) - m.get(i, k) * m.get(k, j)) / &prev;
                    m.set(i, j, val);
                }
            }
            prev = m.get(k, k).clone();
        }
        sign * m.get(n - 1, n - 1)
    }

    /// Rank over the rationals.
    pub fn rank(&self) -> usize {
        smith_normal_form(self).rank()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.entries.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += factor * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = self.get(src, j) * factor;
            self.entries[dst * self.cols + j] += v;
        }
    }

    /// col[dst] += factor * col[src]
    fn add_col_multiple(&mut self, dst: usize, src: usize, factor: &BigInt) {
        if factor.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = self.get(i, src) * factor;
            self.entries[i * self.cols + dst] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -self.get(i, j);
            self.set(i, j, v);
        }
    }
}

impl fmt::Display for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// `u * a * v == d` with `u`, `v` unimodular and `d` in Smith form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithDecomposition {
    pub u: IntegerMatrix,
    pub d: IntegerMatrix,
    pub v: IntegerMatrix,
}

impl SmithDecomposition {
    /// The diagonal entries `d_0 | d_1 | ...`, including trailing zeros, of
    /// length `min(rows, cols)`.
    pub fn diagonal(&self) -> Vec<BigInt> {
        let k = self.d.rows().min(self.d.cols());
        (0..k).map(|i| self.d.get(i, i).clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

/// Computes the Smith normal form of `a` together with the unimodular
/// transforms. Deterministic: the pivot is always the entry of least
/// absolute value, ties broken by row-major position.
pub fn smith_normal_form(a: &IntegerMatrix) -> SmithDecomposition {
    let (m, n) = (a.rows(), a.cols());
    let mut d = a.clone();
    let mut u = IntegerMatrix::identity(m);
    let mut v = IntegerMatrix::identity(n);

    for t in 0..m.min(n) {
        loop {
            // Smallest nonzero entry of the trailing block.
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    let x = d.get(i, j);
                    if x.is_zero() {
                        continue;
                    }
                    match pivot {
                        Some((pi, pj)) if d.get(pi, pj).abs() <= x.abs() => {}
                        _ => pivot = Some((i, j)),
                    }
                }
            }
            let Some((pi, pj)) = pivot else {
                // Trailing block is zero; nothing left to do.
                return finish(u, d, v);
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let mut dirty = false;
            for i in t + 1..m {
                if d.get(i, t).is_zero() {
                    continue;
                }
                let q = -d.get(i, t).div_floor(d.get(t, t));
                d.add_row_multiple(i, t, &q);
                u.add_row_multiple(i, t, &q);
                if !d.get(i, t).is_zero() {
                    dirty = true;
                }
            }
            for j in t + 1..n {
                if d.get(t, j).is_zero() {
                    continue;
                }
                let q = -d.get(t, j).div_floor(d.get(t, t));
                d.add_col_multiple(j, t, &q);
                v.add_col_multiple(j, t, &q);
                if !d.get(t, j).is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // Row and column t are clear. Enforce divisibility of the rest.
            let p = d.get(t, t).clone();
            let offender = (t + 1..m)
                .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                .find(|&(i, j)| !d.get(i, j).is_multiple_of(&p));
            match offender {
                Some((i, _)) => {
                    let one = BigInt::one();
                    d.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => {
                    if p.is_negative() {
                        d.negate_row(t);
                        u.negate_row(t);
                    }
                    break;
                }
            }
        }
    }
    finish(u, d, v)
}

fn finish(u: IntegerMatrix, d: IntegerMatrix, v: IntegerMatrix) -> SmithDecomposition {
    SmithDecomposition { u, d, v }
}

/// Hermite normal form of the lattice spanned by `vectors` (rows), returned
/// as a list of nonzero basis rows in echelon form with positive pivots and
/// entries above each pivot reduced into `[0, pivot)`.
pub fn hermite_basis(vectors: &[Vec<BigInt>], dim: usize) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = vectors
        .iter()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .cloned()
        .collect();
    let mut out: Vec<Vec<BigInt>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for col in 0..dim {
        // Euclid on the column among remaining rows.
        loop {
            let mut live: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i][col].is_zero()).collect();
            if live.len() <= 1 {
                break;
            }
            live.sort_by(|&a, &b| rows[a][col].abs().cmp(&rows[b][col].abs()).then(a.cmp(&b)));
            let p = live[0];
            for &i in &live[1..] {
                let q = rows[i][col].div_floor(&rows[p][col]);
                let pr = rows[p].clone();
                for (x, y) in rows[i].iter_mut().zip(pr.iter()) {
                    *x -= &q * y;
                }
            }
        }
        if let Some(i) = (0..rows.len()).find(|&i| !rows[i][col].is_zero()) {
            let mut r = rows.swap_remove(i);
            if r[col].is_negative() {
                r.iter_mut().for_each(|x| *x = -x.clone());
            }
            out.push(r);
            pivots.push(col);
        }
        rows.retain(|r| r.iter().any(|x| !x.is_zero()));
    }
    // Reduce above pivots.
    for k in 0..out.len() {
        let col = pivots[k];
        let piv = out[k][col].clone();
        for i in 0..k {
            let q = out[i][col].div_floor(&piv);
            if q.is_zero() {
                continue;
            }
            let pr = out[k].clone();
            for (x, y) in out[i].iter_mut().zip(pr.iter()) {
                *x -= &q * y;
            }
        }
    }
    out
}

/// A basis of the (automatically saturated) kernel lattice of `a`, in
/// Hermite normal form. Empty iff `a` is injective.
pub fn kernel_basis(a: &IntegerMatrix) -> Vec<Vec<BigInt>> {
    let snf = smith_normal_form(a);
    let rank = snf.rank();
    let columns: Vec<Vec<BigInt>> = (rank..a.cols()).map(|j| snf.v.column(j)).collect();
    hermite_basis(&columns, a.cols())
}

/// True iff `Z^rows / image(a)` is torsion-free.
pub fn cokernel_is_free(a: &IntegerMatrix) -> bool {
    smith_normal_form(a)
        .diagonal()
        .iter()
        .all(|x| x.is_zero() || x.is_one())
}

/// The quotient `Z^ambient_rank -> Z^k` by a saturated sublattice, given by
/// a surjective projection matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuotientLattice {
    ambient_rank: usize,
    projection: IntegerMatrix,
}

impl QuotientLattice {
    pub fn identity(rank: usize) -> Self {
        Self {
            ambient_rank: rank,
            projection: IntegerMatrix::identity(rank),
        }
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    pub fn rank(&self) -> usize {
        self.projection.rows()
    }

    pub fn projection(&self) -> &IntegerMatrix {
        &self.projection
    }

    pub fn project(&self, v: &[BigInt]) -> Vec<BigInt> {
        self.projection.mul_vec(v)
    }
}

/// Quotient of `Z^rank` by the saturation of the span of `vectors`.
pub fn quotient_by_vectors(rank: usize, vectors: &[Vec<BigInt>]) -> QuotientLattice {
    for w in vectors {
        assert_eq!(w.len(), rank, "vector length must equal the lattice rank");
    }
    let span = IntegerMatrix::from_rows(vectors, rank);
    // The annihilator of span(w) is ker(W); its annihilator is the saturation.
    let rows = kernel_basis(&span);
    QuotientLattice {
        ambient_rank: rank,
        projection: IntegerMatrix::from_rows(&rows, rank),
    }
}

/// Quotient of `Z^rank` by the saturation of `Z w`. A zero `w` gives the
/// identity quotient.
pub fn quotient_by_vector(rank: usize, w: &[BigInt]) -> QuotientLattice {
    quotient_by_vectors(rank, &[w.to_vec()])
}

/// Convenience conversion of an `i64` slice.
pub fn big_vec(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> IntegerMatrix {
        let rows: Vec<Vec<i64>> = rows.iter().map(|r| r.to_vec()).collect();
        IntegerMatrix::from_rows_i64(&rows, 0)
    }

    fn check(a: &IntegerMatrix) -> SmithDecomposition {
        let s = smith_normal_form(a);
        assert_eq!(s.u.mul(a).mul(&s.v), s.d);
        assert!(s.u.determinant().abs().is_one());
        assert!(s.v.determinant().abs().is_one());
        s
    }

    #[test]
    fn smith_of_diag_2_3() {
        let s = check(&m(&[&[2, 0], &[0, 3]]));
        assert_eq!(s.d, m(&[&[1, 0], &[0, 6]]));
    }

    #[test]
    fn smith_of_zero_is_trivial() {
        let z = IntegerMatrix::zeros(2, 2);
        let s = check(&z);
        assert_eq!(s.d, z);
        assert_eq!(s.u, IntegerMatrix::identity(2));
        assert_eq!(s.v, IntegerMatrix::identity(2));
    }

    #[test]
    fn smith_of_identity() {
        let s = check(&IntegerMatrix::identity(3));
        assert_eq!(s.d, IntegerMatrix::identity(3));
    }

    #[test]
    fn smith_handles_empty_shapes() {
        check(&IntegerMatrix::zeros(0, 3));
        check(&IntegerMatrix::zeros(2, 0));
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel_basis(&m(&[&[1, -1]])), vec![big_vec(&[1, 1])]);
        assert!(kernel_basis(&IntegerMatrix::identity(2)).is_empty());
        assert_eq!(kernel_basis(&IntegerMatrix::zeros(0, 1)), vec![big_vec(&[1])]);
    }

    #[test]
    fn kernel_is_saturated() {
        // ker [2 4] is spanned by (2,-1), not (4,-2).
        let k = kernel_basis(&m(&[&[2, 4]]));
        assert_eq!(k, vec![big_vec(&[2, -1])]);
    }

    #[test]
    fn quotient_examples() {
        let q = quotient_by_vector(2, &big_vec(&[1, 1]));
        assert_eq!(q.projection(), &m(&[&[1, -1]]));
        let q = quotient_by_vector(2, &big_vec(&[0, 0]));
        assert_eq!(q.projection(), &IntegerMatrix::identity(2));
        let q = quotient_by_vector(2, &big_vec(&[2, 0]));
        assert_eq!(q.rank(), 1);
        assert!(q.project(&big_vec(&[2, 0])).iter().all(Zero::is_zero));
        assert!(q.project(&big_vec(&[1, 0])).iter().all(Zero::is_zero));
        let diag = smith_normal_form(q.projection()).diagonal();
        assert!(diag.iter().all(One::is_one));
    }

    #[test]
    fn cokernel_examples() {
        assert!(cokernel_is_free(&IntegerMatrix::identity(3)));
        assert!(!cokernel_is_free(&m(&[&[2]])));
        assert!(cokernel_is_free(&m(&[&[1, 0], &[0, 0]])));
    }

    #[test]
    fn hermite_is_canonical() {
        let a = hermite_basis(&[big_vec(&[2, 1]), big_vec(&[0, 3])], 2);
        let b = hermite_basis(&[big_vec(&[2, 4]), big_vec(&[2, 1])], 2);
        assert_eq!(a, b);
        assert_eq!(a, vec![big_vec(&[2, 1]), big_vec(&[0, 3])]);
    }

    #[test]
    fn determinant_small() {
        assert_eq!(m(&[&[0, 1], &[1, 0]]).determinant(), BigInt::from(-1));
        assert_eq!(
            m(&[&[2, 3, 1], &[4, 1, 0], &[0, 5, 7]]).determinant(),
            BigInt::from(-50)
        );
    }
}
