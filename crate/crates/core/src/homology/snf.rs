//! Dense integer matrices and the Smith normal form U·A·V = S.
//!
//! Pivot rule: smallest nonzero |entry| in the active block, ties broken by
//! lowest row and then lowest column. The transforms and their inverses are
//! accumulated alongside, so no determinant or inverse is computed afterwards.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl Serialize for IntegerMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> =
            (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j).to_string()).collect()).collect();
        rows.serialize(s)
    }
}

impl IntegerMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntegerMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, &x) in row.iter().enumerate() {
                m.data[i * c + j] = BigInt::from(x);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: BigInt) {
        self.data[i * self.cols + j] = x;
    }

    pub fn get_i64(&self, i: usize, j: usize) -> i64 {
        self.get(i, j).to_i64().expect("integer entry exceeds i64")
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn mul(&self, other: &IntegerMatrix) -> IntegerMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
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
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> IntegerMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        out
    }

    /// Determinant by fraction-free Bareiss elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a: Vec<Vec<BigInt>> = (0..n).map(|i| (0..n).map(|j| self.get(i, j).clone()).collect()).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] += q · row[src]
    fn add_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        for j in 0..self.cols {
            let v = &self.data[src * self.cols + j] * q;
            if !v.is_zero() {
                self.data[dst * self.cols + j] += v;
            }
        }
    }

    /// col[dst] += q · col[src]
    fn add_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        for i in 0..self.rows {
            let v = &self.data[i * self.cols + src] * q;
            if !v.is_zero() {
                self.data[i * self.cols + dst] += v;
            }
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = -std::mem::take(&mut self.data[r * self.cols + j]);
            self.data[r * self.cols + j] = v;
        }
    }

    fn negate_col(&mut self, c: usize) {
        for i in 0..self.rows {
            let v = -std::mem::take(&mut self.data[i * self.cols + c]);
            self.data[i * self.cols + c] = v;
        }
    }
}

/// U·A·V = S with S diagonal, d₁ | d₂ | …, all dᵢ ≥ 0, and U, V unimodular.
#[derive(Clone, Debug, Serialize)]
pub struct SmithForm {
    pub u: IntegerMatrix,
    pub s: IntegerMatrix,
    pub v: IntegerMatrix,
    pub u_inv: IntegerMatrix,
    pub v_inv: IntegerMatrix,
}

impl SmithForm {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.s.rows.min(self.s.cols)).map(|i| self.s.get(i, i).clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|d| !d.is_zero()).count()
    }
}

struct Work {
    s: IntegerMatrix,
    u: IntegerMatrix,
    u_inv: IntegerMatrix,
    v: IntegerMatrix,
    v_inv: IntegerMatrix,
}

impl Work {
    fn swap_rows(&mut self, a: usize, b: usize) {
        self.s.swap_rows(a, b);
        self.u.swap_rows(a, b);
        self.u_inv.swap_cols(a, b);
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        self.s.swap_cols(a, b);
        self.v.swap_cols(a, b);
        self.v_inv.swap_rows(a, b);
    }

    /// row[dst] += q · row[src]
    fn add_row(&mut self, dst: usize, src: usize, q: &BigInt) {
        self.s.add_row(dst, src, q);
        self.u.add_row(dst, src, q);
        self.u_inv.add_col(src, dst, &-q);
    }

    /// col[dst] += q · col[src]
    fn add_col(&mut self, dst: usize, src: usize, q: &BigInt) {
        self.s.add_col(dst, src, q);
        self.v.add_col(dst, src, q);
        self.v_inv.add_row(src, dst, &-q);
    }

    fn negate_row(&mut self, r: usize) {
        self.s.negate_row(r);
        self.u.negate_row(r);
        self.u_inv.negate_col(r);
    }

    fn pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.s.rows {
            for j in t..self.s.cols {
                let x = self.s.get(i, j);
                if x.is_zero() {
                    continue;
                }
                match best {
                    Some((bi, bj)) if self.s.get(bi, bj).abs() <= x.abs() => {}
                    _ => best = Some((i, j)),
                }
            }
        }
        best
    }
}

pub fn smith_normal_form(a: &IntegerMatrix) -> SmithForm {
    let (m, n) = (a.rows, a.cols);
    let mut w = Work {
        s: a.clone(),
        u: IntegerMatrix::identity(m),
        u_inv: IntegerMatrix::identity(m),
        v: IntegerMatrix::identity(n),
        v_inv: IntegerMatrix::identity(n),
    };
    for t in 0..m.min(n) {
        loop {
            let Some((pi, pj)) = w.pivot(t) else {
                return finish(w);
            };
            w.swap_rows(t, pi);
            w.swap_cols(t, pj);
            let p = w.s.get(t, t).clone();
            let mut clean = true;
            for i in t + 1..m {
                if w.s.get(i, t).is_zero() {
                    continue;
                }
                let q = w.s.get(i, t) / &p;
                if !q.is_zero() {
                    w.add_row(i, t, &-q);
                }
                clean &= w.s.get(i, t).is_zero();
            }
            for j in t + 1..n {
                if w.s.get(t, j).is_zero() {
                    continue;
                }
                let q = w.s.get(t, j) / &p;
                if !q.is_zero() {
                    w.add_col(j, t, &-q);
                }
                clean &= w.s.get(t, j).is_zero();
            }
            if !clean {
                continue;
            }
            let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| !(w.s.get(i, j) % &p).is_zero()));
            if let Some(i) = bad {
                w.add_row(t, i, &BigInt::one());
                continue;
            }
            if p.is_negative() {
                w.negate_row(t);
            }
            break;
        }
    }
    finish(w)
}

fn finish(w: Work) -> SmithForm {
    SmithForm { u: w.u, s: w.s, v: w.v, u_inv: w.u_inv, v_inv: w.v_inv }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn check(a: &IntegerMatrix, f: &SmithForm) {
        assert_eq!(f.u.mul(a).mul(&f.v), f.s, "U·A·V ≠ S");
        assert_eq!(f.u.mul(&f.u_inv), IntegerMatrix::identity(a.rows()));
        assert_eq!(f.v.mul(&f.v_inv), IntegerMatrix::identity(a.cols()));
        assert!(f.u.determinant().abs().is_one());
        assert!(f.v.determinant().abs().is_one());
        for i in 0..f.s.rows() {
            for j in 0..f.s.cols() {
                if i != j {
                    assert!(f.s.get(i, j).is_zero(), "off-diagonal entry");
                }
            }
        }
        let d = f.diagonal();
        for x in &d {
            assert!(!x.is_negative());
        }
        for k in 1..d.len() {
            if d[k - 1].is_zero() {
                assert!(d[k].is_zero());
            } else {
                assert!((&d[k] % &d[k - 1]).is_zero(), "divisibility chain broken: {d:?}");
            }
        }
    }

    #[test]
    fn single_entry() {
        let a = IntegerMatrix::from_rows(&[vec![2]]);
        let f = smith_normal_form(&a);
        assert_eq!(f.s, a);
    }

    #[test]
    fn two_by_two_oracle() {
        // d₁ = gcd of all entries = 2, d₁·d₂ = |det| = 8
        let a = IntegerMatrix::from_rows(&[vec![2, 4], vec![6, 8]]);
        let f = smith_normal_form(&a);
        check(&a, &f);
        assert_eq!(f.diagonal(), vec![BigInt::from(2), BigInt::from(4)]);
    }

    #[test]
    fn zero_matrix_keeps_identities() {
        let a = IntegerMatrix::zeros(3, 2);
        let f = smith_normal_form(&a);
        assert!(f.s.is_zero());
        assert_eq!(f.u, IntegerMatrix::identity(3));
        assert_eq!(f.v, IntegerMatrix::identity(2));
    }

    #[test]
    fn coprime_entries_need_the_divisibility_fix() {
        let a = IntegerMatrix::from_rows(&[vec![2, 0], vec![0, 3]]);
        let f = smith_normal_form(&a);
        check(&a, &f);
        assert_eq!(f.diagonal(), vec![BigInt::from(1), BigInt::from(6)]);
    }

    #[test]
    fn deterministic() {
        let a = IntegerMatrix::from_rows(&[vec![3, -7, 2], vec![5, 1, -4], vec![0, 6, 9]]);
        let f = smith_normal_form(&a);
        let g = smith_normal_form(&a);
        assert_eq!(f.u, g.u);
        assert_eq!(f.v, g.v);
    }

    #[test]
    fn determinant_oracle() {
        let a = IntegerMatrix::from_rows(&[vec![2, 4], vec![6, 8]]);
        assert_eq!(a.determinant(), BigInt::from(-8));
        let b = IntegerMatrix::from_rows(&[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 5]]);
        assert_eq!(b.determinant(), BigInt::from(-5));
    }

    fn matrix() -> impl Strategy<Value = IntegerMatrix> {
        (1usize..=12, 1usize..=12).prop_flat_map(|(r, c)| {
            proptest::collection::vec(proptest::collection::vec(-9i64..=9, c), r)
                .prop_map(|rows| IntegerMatrix::from_rows(&rows))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn roundtrip_and_divisibility(a in matrix()) {
            let f = smith_normal_form(&a);
            check(&a, &f);
        }
    }
}
