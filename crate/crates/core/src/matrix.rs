//! Dense row-major matrices over GF(2^m).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{Elem, Field};

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![Elem::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Elem::ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Elem>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<Elem>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Matrix { rows: rows.len(), cols, data: rows.concat() })
    }

    /// Builds a matrix from raw integers, checking each against the field.
    pub fn from_u32_rows(field: &Field, rows: &[Vec<u32>]) -> Result<Self> {
        let conv = rows
            .iter()
            .map(|r| r.iter().map(|&v| field.elem(v)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(&conv)
    }

    pub fn column(values: Vec<Elem>) -> Self {
        Matrix { rows: values.len(), cols: 1, data: values }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Elem) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Elem] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Elem> {
        self.data
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[Elem] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<Elem> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn to_u32_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).iter().map(|e| e.0 as u32).collect()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &r in idx {
            data.extend_from_slice(self.row(r));
        }
        Matrix { rows: idx.len(), cols: self.cols, data }
    }

    pub fn select_cols(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(self.rows, idx.len(), |r, c| self[(r, idx[c])])
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        Matrix::from_fn(rows.len(), cols.len(), |r, c| self[(rows[r], cols[c])])
    }

    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "vstack of {} and {} columns",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix { rows: self.rows + other.rows, cols: self.cols, data })
    }

    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "hstack of {} and {} rows",
                self.rows, other.rows
            )));
        }
        Ok(Matrix::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self[(r, c)]
            } else {
                other[(r, c - self.cols)]
            }
        }))
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch(format!(
                "add {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, field: &Field, s: Elem) -> Matrix {
        let data = self.data.iter().map(|&a| field.mul(a, s)).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn mul(&self, field: &Field, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                let orow = other.row(k);
                let base = r * other.cols;
                for (c, &b) in orow.iter().enumerate() {
                    out.data[base + c] += field.mul(a, b);
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix: v^t * self.
    pub fn left_mul_vec(&self, field: &Field, v: &[Elem]) -> Result<Vec<Elem>> {
        if v.len() != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} rows",
                v.len(),
                self.rows
            )));
        }
        let mut out = vec![Elem::ZERO; self.cols];
        for (r, &a) in v.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (o, &b) in out.iter_mut().zip(self.row(r)) {
                *o += field.mul(a, b);
            }
        }
        Ok(out)
    }

    /// Matrix times column vector.
    pub fn mul_vec(&self, field: &Field, v: &[Elem]) -> Result<Vec<Elem>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows).map(|r| dot(field, self.row(r), v)).collect())
    }

    /// Reduces to row echelon form in place and returns the pivot columns.
    fn eliminate(&mut self, field: &Field, aug: Option<&mut Matrix>) -> Vec<usize> {
        let mut aug = aug;
        let mut pivots = Vec::new();
        let mut prow = 0;
        for c in 0..self.cols {
            if prow == self.rows {
                break;
            }
            let Some(p) = (prow..self.rows).find(|&r| !self[(r, c)].is_zero()) else {
                continue;
            };
            if p != prow {
                self.swap_rows(p, prow);
                if let Some(a) = aug.as_deref_mut() {
                    a.swap_rows(p, prow);
                }
            }
            let inv = field.inv(self[(prow, c)]).expect("pivot is nonzero");
            self.scale_row(field, prow, inv);
            if let Some(a) = aug.as_deref_mut() {
                a.scale_row(field, prow, inv);
            }
            for r in 0..self.rows {
                if r == prow {
                    continue;
                }
                let factor = self[(r, c)];
                if factor.is_zero() {
                    continue;
                }
                self.axpy_row(field, r, prow, factor);
                if let Some(a) = aug.as_deref_mut() {
                    a.axpy_row(field, r, prow, factor);
                }
            }
            pivots.push(c);
            prow += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn scale_row(&mut self, field: &Field, r: usize, s: Elem) {
        let cols = self.cols;
        for v in &mut self.data[r * cols..(r + 1) * cols] {
            *v = field.mul(*v, s);
        }
    }

    // row[dst] += s * row[src]
    fn axpy_row(&mut self, field: &Field, dst: usize, src: usize, s: Elem) {
        let cols = self.cols;
        for c in 0..cols {
            let v = self.data[src * cols + c];
            if !v.is_zero() {
                self.data[dst * cols + c] += field.mul(s, v);
            }
        }
    }

    pub fn rank(&self, field: &Field) -> usize {
        self.clone().eliminate(field, None).len()
    }

    /// Solves self * X = B for square self.
    pub fn solve(&self, field: &Field, b: &Matrix) -> Result<Matrix> {
        if !self.is_square() || b.rows != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "solve {}x{} against {}x{}",
                self.rows, self.cols, b.rows, b.cols
            )));
        }
        let mut a = self.clone();
        let mut x = b.clone();
        if a.eliminate(field, Some(&mut x)).len() < self.rows {
            return Err(Error::Singular);
        }
        Ok(x)
    }

    pub fn solve_vec(&self, field: &Field, b: &[Elem]) -> Result<Vec<Elem>> {
        Ok(self.solve(field, &Matrix::column(b.to_vec()))?.into_data())
    }

    /// Solves an overdetermined system self * X = B with full column rank,
    /// checking that every equation is satisfied.
    pub fn solve_consistent(&self, field: &Field, b: &Matrix) -> Result<Matrix> {
        if b.rows != self.rows {
            return Err(Error::DimensionMismatch(format!(
                "solve {}x{} against {}x{}",
                self.rows, self.cols, b.rows, b.cols
            )));
        }
        let mut a = self.clone();
        let mut x = b.clone();
        if a.eliminate(field, Some(&mut x)).len() < self.cols {
            return Err(Error::Singular);
        }
        // Rows below the pivots must have been reduced to zero on the right.
        if (self.cols..self.rows).any(|r| x.row(r).iter().any(|v| !v.is_zero())) {
            return Err(Error::Malformed("inconsistent linear system".into()));
        }
        Ok(x.select_rows(&(0..self.cols).collect::<Vec<_>>()))
    }

    pub fn inv(&self, field: &Field) -> Result<Matrix> {
        self.solve(field, &Matrix::identity(self.rows))
    }

    pub fn det(&self, field: &Field) -> Result<Elem> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "determinant of {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut det = Elem::ONE;
        for c in 0..n {
            let Some(p) = (c..n).find(|&r| !a[(r, c)].is_zero()) else {
                return Ok(Elem::ZERO);
            };
            // Row swaps flip the sign, which is invisible in characteristic 2.
            a.swap_rows(p, c);
            let piv = a[(c, c)];
            det = field.mul(det, piv);
            let inv = field.inv(piv)?;
            for r in c + 1..n {
                let factor = a[(r, c)];
                if !factor.is_zero() {
                    a.axpy_row(field, r, c, field.mul(factor, inv));
                }
            }
        }
        Ok(det)
    }

    /// Row i is [1, p_i, p_i^2, ..., p_i^(cols-1)].
    pub fn vandermonde(field: &Field, points: &[Elem], cols: usize) -> Result<Matrix> {
        let mut seen = std::collections::HashSet::new();
        for &p in points {
            if !seen.insert(p) {
                return Err(Error::DuplicatePoint(p.0));
            }
        }
        let mut m = Matrix::zeros(points.len(), cols);
        for (r, &p) in points.iter().enumerate() {
            let mut x = Elem::ONE;
            for c in 0..cols {
                m[(r, c)] = x;
                x = field.mul(x, p);
            }
        }
        Ok(m)
    }

    /// True iff every square submatrix has a nonzero determinant.
    pub fn all_square_submatrices_invertible(&self, field: &Field) -> bool {
        let max = self.rows.min(self.cols);
        for size in 1..=max {
            for rs in combinations(self.rows, size) {
                for cs in combinations(self.cols, size) {
                    match self.submatrix(&rs, &cs).det(field) {
                        Ok(d) if !d.is_zero() => {}
                        _ => return false,
                    }
                }
            }
        }
        true
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Elem;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Elem {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Elem {
        &mut self.data[r * self.cols + c]
    }
}

pub fn dot(field: &Field, a: &[Elem], b: &[Elem]) -> Elem {
    a.iter().zip(b).map(|(&x, &y)| field.mul(x, y)).sum()
}

/// All size-`k` subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            break;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf8() -> Field {
        Field::new(3, 0b1011).unwrap()
    }

    fn e(v: u16) -> Elem {
        Elem(v)
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let f = gf8();
        let b = Matrix::column(vec![e(3), e(7), e(0)]);
        assert_eq!(Matrix::identity(3).solve(&f, &b).unwrap(), b);
        assert_eq!(Matrix::identity(4).det(&f).unwrap(), Elem::ONE);
    }

    #[test]
    fn vandermonde_solve_round_trip() {
        let f = gf8();
        let a = Matrix::vandermonde(&f, &[e(3), e(6)], 2).unwrap();
        let b = Matrix::column(vec![e(5), e(1)]);
        let x = a.solve(&f, &b).unwrap();
        assert_eq!(a.mul(&f, &x).unwrap(), b);
    }

    #[test]
    fn equal_rows_are_singular() {
        let f = gf8();
        let a = Matrix::from_u32_rows(&f, &[vec![1, 2], vec![1, 2]]).unwrap();
        let b = Matrix::column(vec![e(1), e(1)]);
        assert_eq!(a.solve(&f, &b), Err(Error::Singular));
        assert_eq!(a.inv(&f), Err(Error::Singular));
        assert_eq!(a.det(&f).unwrap(), Elem::ZERO);
    }

    #[test]
    fn vandermonde_examples() {
        let f = gf8();
        assert_eq!(
            Matrix::vandermonde(&f, &[e(1)], 3).unwrap().to_u32_rows(),
            vec![vec![1, 1, 1]]
        );
        assert_eq!(
            Matrix::vandermonde(&f, &[e(0), e(1)], 2).unwrap().to_u32_rows(),
            vec![vec![1, 0], vec![1, 1]]
        );
        let v = Matrix::vandermonde(&f, &[e(1), e(2), e(4)], 3).unwrap();
        // Product of pairwise differences: (2+1)(4+1)(4+2) = 3*5*6.
        let expect = f.mul(f.mul(e(3), e(5)), e(6));
        assert_eq!(v.det(&f).unwrap(), expect);
        assert!(!expect.is_zero());
        assert_eq!(Matrix::vandermonde(&f, &[e(2), e(2)], 2), Err(Error::DuplicatePoint(2)));
    }

    #[test]
    fn submatrix_invertibility() {
        let f = Field::with_default_modulus(4).unwrap();
        let one = Matrix::from_u32_rows(&f, &[vec![3]]).unwrap();
        assert!(one.all_square_submatrices_invertible(&f));
        let zero = Matrix::from_u32_rows(&f, &[vec![1, 0], vec![2, 3]]).unwrap();
        assert!(!zero.all_square_submatrices_invertible(&f));
        // Cauchy 1/(x_i + y_j) with x = {1,2}, y = {4,8}.
        let xs = [e(1), e(2)];
        let ys = [e(4), e(8)];
        let c = Matrix::from_fn(2, 2, |r, cc| f.inv(xs[r] + ys[cc]).unwrap());
        assert!(c.all_square_submatrices_invertible(&f));
    }

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(2, 3).is_empty());
    }

    #[test]
    fn consistent_overdetermined_solve() {
        let f = gf8();
        let a = Matrix::vandermonde(&f, &[e(1), e(2), e(3), e(4)], 2).unwrap();
        let x = Matrix::column(vec![e(6), e(5)]);
        let b = a.mul(&f, &x).unwrap();
        assert_eq!(a.solve_consistent(&f, &b).unwrap(), x);
        let mut bad = b.clone();
        bad[(3, 0)] += Elem::ONE;
        assert!(matches!(a.solve_consistent(&f, &bad), Err(Error::Malformed(_))));
    }

    fn field_strategy() -> impl Strategy<Value = Field> {
        prop_oneof![Just(4u32), Just(5), Just(8), Just(13)]
            .prop_map(|m| Field::with_default_modulus(m).unwrap())
    }

    fn random_matrix(f: &Field, n: usize, seed: &[u16]) -> Matrix {
        let mask = (f.size() - 1) as u16;
        Matrix::from_fn(n, n, |r, c| {
            Elem((seed[(r * n + c) % seed.len()].wrapping_mul(31 + r as u16) ^ (c as u16 * 7)) & mask)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn field_axioms(f in field_strategy(), a in any::<u16>(), b in any::<u16>(), c in any::<u16>()) {
            let mask = (f.size() - 1) as u16;
            let (a, b, c) = (Elem(a & mask), Elem(b & mask), Elem(c & mask));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!(f.mul(a, b + c), f.mul(a, b) + f.mul(a, c));
            prop_assert_eq!(f.mul(a, b), f.mul(b, a));
            prop_assert_eq!(a + a, Elem::ZERO);
            prop_assert_eq!(f.mul(a, b), f.mul_direct(a, b));
            if !a.is_zero() {
                prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), Elem::ONE);
            }
        }

        #[test]
        fn inverse_round_trip(f in field_strategy(), n in 1usize..=12, seed in prop::collection::vec(any::<u16>(), 1..200)) {
            let mask = (f.size() - 1) as u16;
            let seed: Vec<u16> = seed.iter().map(|s| s & mask).collect();
            let a = Matrix::from_fn(n, n, |r, c| Elem(seed[(r * n + c) % seed.len()]));
            match a.inv(&f) {
                Ok(ai) => {
                    prop_assert_eq!(a.mul(&f, &ai).unwrap(), Matrix::identity(n));
                    prop_assert_eq!(ai.mul(&f, &a).unwrap(), Matrix::identity(n));
                    prop_assert!(!a.det(&f).unwrap().is_zero());
                }
                Err(Error::Singular) => prop_assert!(a.det(&f).unwrap().is_zero()),
                Err(other) => prop_assert!(false, "unexpected {other}"),
            }
        }

        #[test]
        fn determinant_is_multiplicative(f in field_strategy(), n in 1usize..=8, s1 in prop::collection::vec(any::<u16>(), 1..64), s2 in prop::collection::vec(any::<u16>(), 1..64)) {
            let a = random_matrix(&f, n, &s1);
            let b = random_matrix(&f, n, &s2);
            let ab = a.mul(&f, &b).unwrap();
            prop_assert_eq!(ab.det(&f).unwrap(), f.mul(a.det(&f).unwrap(), b.det(&f).unwrap()));
        }

        #[test]
        fn square_vandermonde_is_invertible(f in field_strategy(), d in 1usize..=10, start in 0u64..1000) {
            let pts: Vec<Elem> = (0..d as u64).map(|i| f.gen_pow(start + i)).collect();
            let v = Matrix::vandermonde(&f, &pts, d).unwrap();
            prop_assert!(v.inv(&f).is_ok());
        }
    }
}
