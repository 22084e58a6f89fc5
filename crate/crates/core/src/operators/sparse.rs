//! Complex sparse matrices acting on sections with the inner product
//! ⟨ψ,φ⟩ = Σ_v μ_v ψ̄_v φ_v.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// μ-weighted inner product.
pub fn inner(measure: &[f64], x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).zip(measure).map(|((a, b), m)| a.conj() * b * m).sum()
}

pub fn norm(measure: &[f64], x: &[Complex64]) -> f64 {
    inner(measure, x, x).re.max(0.0).sqrt()
}

/// Row-compressed complex matrix with the measure of its Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Complex64>,
    measure: Vec<f64>,
    hermitian: bool,
    stencil_radius: usize,
}

impl SparseOperator {
    /// Sums duplicate entries and drops exact zeros.
    pub fn from_triplets(measure: Vec<f64>, triplets: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Self {
        let n = measure.len();
        let mut rows: Vec<BTreeMap<usize, Complex64>> = vec![BTreeMap::new(); n];
        for (i, j, v) in triplets {
            assert!(i < n && j < n, "entry ({i},{j}) outside {n}×{n}");
            *rows[i].entry(j).or_default() += v;
        }
        Self::from_rows(measure, rows)
    }

    fn from_rows(measure: Vec<f64>, rows: Vec<BTreeMap<usize, Complex64>>) -> Self {
        let n = measure.len();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for row in rows {
            for (j, v) in row {
                if v != Complex64::new(0.0, 0.0) {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        SparseOperator { n, indptr, indices, values, measure, hermitian: false, stencil_radius: 0 }
    }

    pub fn diagonal(measure: Vec<f64>, d: &[Complex64]) -> Self {
        let trips: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        let hermitian = d.iter().all(|z| z.im == 0.0);
        Self::from_triplets(measure, trips).flagged(hermitian, 0)
    }

    pub fn identity(measure: Vec<f64>) -> Self {
        let d = vec![Complex64::new(1.0, 0.0); measure.len()];
        Self::diagonal(measure, &d)
    }

    /// Sets the Hermiticity flag and the stencil radius.
    pub fn flagged(mut self, hermitian: bool, stencil_radius: usize) -> Self {
        self.hermitian = hermitian;
        self.stencil_radius = stencil_radius;
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Largest graph distance between coupled vertices.
    pub fn stencil_radius(&self) -> usize {
        self.stencil_radius
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        self.apply_into(x, &mut y);
        y
    }

    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *yi = acc;
        }
    }

    fn check_same_space(&self, other: &SparseOperator) -> Result<()> {
        if self.n != other.n || self.measure != other.measure {
            return Err(Error::ShapeMismatch(format!("operators on different spaces ({} vs {})", self.n, other.n)));
        }
        Ok(())
    }

    /// Adjoint for the μ-inner product: (A†)_{ij} = conj(A_{ji}) μ_j / μ_i.
    pub fn adjoint(&self) -> SparseOperator {
        let m = &self.measure;
        let trips: Vec<_> = self.triplets().map(|(i, j, v)| (j, i, v.conj() * m[i] / m[j])).collect();
        Self::from_triplets(self.measure.clone(), trips).flagged(self.hermitian, self.stencil_radius)
    }

    /// self + α·other.
    pub fn add_scaled(&self, alpha: Complex64, other: &SparseOperator) -> Result<SparseOperator> {
        self.check_same_space(other)?;
        let trips = self.triplets().chain(other.triplets().map(|(i, j, v)| (i, j, alpha * v)));
        let hermitian = self.hermitian && other.hermitian && alpha.im == 0.0;
        Ok(Self::from_triplets(self.measure.clone(), trips.collect::<Vec<_>>())
            .flagged(hermitian, self.stencil_radius.max(other.stencil_radius)))
    }

    pub fn scaled(&self, alpha: Complex64) -> SparseOperator {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= alpha;
        }
        out.hermitian = self.hermitian && alpha.im == 0.0;
        out
    }

    /// Matrix product self·other.
    pub fn compose(&self, other: &SparseOperator) -> Result<SparseOperator> {
        self.check_same_space(other)?;
        let mut rows = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let mut acc: BTreeMap<usize, Complex64> = BTreeMap::new();
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    *acc.entry(j).or_default() += a * b;
                }
            }
            rows.push(acc);
        }
        Ok(Self::from_rows(self.measure.clone(), rows).flagged(false, self.stencil_radius + other.stencil_radius))
    }

    /// [A, B] = AB − BA.
    pub fn commutator(a: &SparseOperator, b: &SparseOperator) -> Result<SparseOperator> {
        let ab = a.compose(b)?;
        let ba = b.compose(a)?;
        Ok(ab.add_scaled(Complex64::new(-1.0, 0.0), &ba)?.flagged(false, ab.stencil_radius))
    }

    /// (A + A†)/2, flagged Hermitian.
    pub fn hermitian_part(&self) -> SparseOperator {
        let sum = self.add_scaled(Complex64::new(1.0, 0.0), &self.adjoint()).expect("same space");
        sum.scaled(Complex64::new(0.5, 0.0)).flagged(true, self.stencil_radius)
    }

    /// max_{ij} |A − A†|.
    pub fn hermiticity_defect(&self) -> f64 {
        let diff = self.add_scaled(Complex64::new(-1.0, 0.0), &self.adjoint()).expect("same space");
        diff.max_abs()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn require_hermitian(self) -> Result<SparseOperator> {
        if !self.hermitian {
            return Err(Error::NotHermitian("operator is not flagged Hermitian".into()));
        }
        Ok(self)
    }

    /// Block-diagonal operator on the direct sum of the blocks' spaces.
    pub fn direct_sum(blocks: &[SparseOperator]) -> SparseOperator {
        let mut measure = Vec::new();
        let mut trips = Vec::new();
        let mut offset = 0;
        for b in blocks {
            measure.extend_from_slice(&b.measure);
            trips.extend(b.triplets().map(|(i, j, v)| (i + offset, j + offset, v)));
            offset += b.n;
        }
        let hermitian = blocks.iter().all(|b| b.hermitian);
        let radius = blocks.iter().map(|b| b.stencil_radius).max().unwrap_or(0);
        Self::from_triplets(measure, trips).flagged(hermitian, radius)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    pub fn is_diagonal(&self) -> bool {
        self.triplets().all(|(i, j, _)| i == j)
    }

    /// Triplet export with 0-based indices.
    pub fn triplets_json(&self) -> serde_json::Value {
        let (mut rows, mut cols, mut re, mut im) = (vec![], vec![], vec![], vec![]);
        for (i, j, v) in self.triplets() {
            rows.push(i);
            cols.push(j);
            re.push(v.re);
            im.push(v.im);
        }
        serde_json::json!({
            "dim": self.n,
            "rows": rows,
            "cols": cols,
            "re": re,
            "im": im,
            "hermitian": self.hermitian,
            "measure": self.measure,
            "stencil_radius": self.stencil_radius,
        })
    }

    pub fn triplets_csv(&self) -> String {
        let mut s = String::from("row,col,re,im\n");
        for (i, j, v) in self.triplets() {
            writeln!(s, "{i},{j},{:e},{:e}", v.re, v.im).expect("write to string");
        }
        s
    }
}
