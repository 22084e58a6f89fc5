//! Sparse presentations of cokernels ℤᵐ / im A.
//!
//! Rows of A are generators and columns are relations. Relations with a unit
//! entry are used to eliminate one generator each (Markowitz-style choice of
//! the row with the fewest entries); the small remainder goes through the
//! dense Smith normal form.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::snf::{smith_normal_form, IntegerMatrix, SmithForm};

type SparseVec = BTreeMap<usize, i64>;

/// Sparse integer matrix stored by columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseIntMatrix {
    pub rows: usize,
    pub cols: Vec<SparseVec>,
}

impl SparseIntMatrix {
    pub fn new(rows: usize, ncols: usize) -> Self {
        SparseIntMatrix { rows, cols: vec![SparseVec::new(); ncols] }
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn add(&mut self, i: usize, j: usize, x: i64) {
        let e = self.cols[j].entry(i).or_insert(0);
        *e += x;
        if *e == 0 {
            self.cols[j].remove(&i);
        }
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.cols[j].get(&i).copied().unwrap_or(0)
    }

    pub fn transpose(&self) -> SparseIntMatrix {
        let mut t = SparseIntMatrix::new(self.ncols(), self.rows);
        for (j, col) in self.cols.iter().enumerate() {
            for (&i, &x) in col {
                t.cols[i].insert(j, x);
            }
        }
        t
    }

    /// A·x for an integer vector x.
    pub fn apply(&self, x: &[i64]) -> Vec<i64> {
        let mut y = vec![0i64; self.rows];
        for (j, col) in self.cols.iter().enumerate() {
            if x[j] != 0 {
                for (&i, &a) in col {
                    y[i] += a * x[j];
                }
            }
        }
        y
    }

    pub fn to_dense(&self) -> IntegerMatrix {
        let mut m = IntegerMatrix::zeros(self.rows, self.ncols());
        for (j, col) in self.cols.iter().enumerate() {
            for (&i, &x) in col {
                m.set(i, j, BigInt::from(x));
            }
        }
        m
    }

    /// Restriction to a subset of rows, renumbered in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> SparseIntMatrix {
        let mut map = vec![usize::MAX; self.rows];
        for (k, &r) in rows.iter().enumerate() {
            map[r] = k;
        }
        SparseIntMatrix {
            rows: rows.len(),
            cols: self
                .cols
                .iter()
                .map(|c| c.iter().filter(|(i, _)| map[**i] != usize::MAX).map(|(i, x)| (map[*i], *x)).collect())
                .collect(),
        }
    }
}

/// A recorded elimination: generator `row` was expressed through relation
/// `col` = Σ cᵢ gᵢ (snapshot at elimination time, `unit` = c_row = ±1).
#[derive(Clone, Debug)]
struct Elimination {
    row: usize,
    unit: i64,
    rest: Vec<(usize, i64)>,
}

/// ℤᵐ / im A ≅ ℤ^b ⊕ ⊕ ℤ/τᵢ together with the maps needed to compute
/// coordinates, generators, characters and bounding relations.
#[derive(Clone, Debug)]
pub struct Presentation {
    generators: usize,
    eliminations: Vec<Elimination>,
    kept: Vec<usize>,
    snf: SmithForm,
    /// For each remaining dense column, its combination of original relations.
    combos: Option<Vec<SparseVec>>,
    /// Indices into the SNF diagonal that are nontrivial summands: torsion first, then free.
    summands: Vec<usize>,
    orders: Vec<u64>,
}

impl Presentation {
    pub fn compute(a: &SparseIntMatrix, track: bool) -> Presentation {
        let m = a.rows;
        let mut cols = a.cols.clone();
        let mut combos: Option<Vec<SparseVec>> =
            track.then(|| (0..cols.len()).map(|j| SparseVec::from([(j, 1)])).collect());
        let mut row_cols: Vec<std::collections::BTreeSet<usize>> = vec![Default::default(); m];
        for (j, c) in cols.iter().enumerate() {
            for &i in c.keys() {
                row_cols[i].insert(j);
            }
        }
        let mut alive_row = vec![true; m];
        let mut alive_col = vec![true; cols.len()];
        let mut eliminations = Vec::new();

        let mut progress = true;
        while progress {
            progress = false;
            let mut order: Vec<usize> = (0..cols.len()).filter(|&j| alive_col[j]).collect();
            order.sort_by_key(|&j| (cols[j].len(), j));
            for j in order {
                if !alive_col[j] {
                    continue;
                }
                let pivot = cols[j]
                    .iter()
                    .filter(|(_, x)| x.abs() == 1)
                    .min_by_key(|(i, _)| (row_cols[**i].len(), **i))
                    .map(|(i, x)| (*i, *x));
                let Some((r, unit)) = pivot else {
                    if cols[j].is_empty() {
                        alive_col[j] = false;
                    }
                    continue;
                };
                let pivot_col = std::mem::take(&mut cols[j]);
                let pivot_combo = combos.as_mut().map(|c| std::mem::take(&mut c[j]));
                for &i in pivot_col.keys() {
                    row_cols[i].remove(&j);
                }
                let others: Vec<usize> = row_cols[r].iter().copied().collect();
                for k in others {
                    // col_k −= (a_rk / unit) · pivot_col, which clears row r
                    let q = cols[k][&r] * unit;
                    for (&i, &x) in &pivot_col {
                        let e = cols[k].entry(i).or_insert(0);
                        let before = *e;
                        *e = e.checked_sub(q * x).expect("integer overflow in sparse elimination");
                        if *e == 0 {
                            cols[k].remove(&i);
                            row_cols[i].remove(&k);
                        } else if before == 0 {
                            row_cols[i].insert(k);
                        }
                    }
                    if let (Some(cs), Some(pc)) = (combos.as_mut(), pivot_combo.as_ref()) {
                        for (&o, &x) in pc {
                            let e = cs[k].entry(o).or_insert(0);
                            *e -= q * x;
                            if *e == 0 {
                                cs[k].remove(&o);
                            }
                        }
                    }
                }
                debug_assert!(row_cols[r].is_empty());
                alive_row[r] = false;
                alive_col[j] = false;
                eliminations.push(Elimination {
                    row: r,
                    unit,
                    rest: pivot_col.iter().filter(|(i, _)| **i != r).map(|(i, x)| (*i, *x)).collect(),
                });
                progress = true;
            }
        }

        let kept: Vec<usize> = (0..m).filter(|&i| alive_row[i]).collect();
        let mut index = vec![usize::MAX; m];
        for (k, &i) in kept.iter().enumerate() {
            index[i] = k;
        }
        let remaining: Vec<usize> = (0..cols.len()).filter(|&j| alive_col[j] && !cols[j].is_empty()).collect();
        let mut dense = IntegerMatrix::zeros(kept.len(), remaining.len());
        for (c, &j) in remaining.iter().enumerate() {
            for (&i, &x) in &cols[j] {
                dense.set(index[i], c, BigInt::from(x));
            }
        }
        let snf = smith_normal_form(&dense);
        let diag = snf.diagonal();
        let mut summands = Vec::new();
        let mut orders = Vec::new();
        for (i, d) in diag.iter().enumerate() {
            if !d.is_zero() && d.to_u64() != Some(1) {
                summands.push(i);
                orders.push(d.to_u64().expect("torsion order exceeds u64"));
            }
        }
        let rank = diag.iter().filter(|d| !d.is_zero()).count();
        for i in rank..kept.len() {
            summands.push(i);
            orders.push(0);
        }
        let combos = combos.map(|cs| remaining.iter().map(|&j| cs[j].clone()).collect());
        Presentation { generators: m, eliminations, kept, snf, combos, summands, orders }
    }

    /// Torsion orders τᵢ (ascending, each dividing the next).
    pub fn torsion(&self) -> Vec<u64> {
        self.orders.iter().copied().filter(|&o| o > 0).collect()
    }

    pub fn betti(&self) -> usize {
        self.orders.iter().filter(|&&o| o == 0).count()
    }

    /// Order of each nontrivial summand (0 for ℤ), torsion first.
    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    /// Coordinates of the class of y in the nontrivial summands (torsion
    /// coordinates reduced into 0..τ).
    pub fn coordinates(&self, y: &[i64]) -> Vec<i64> {
        assert_eq!(y.len(), self.generators, "vector length differs from number of generators");
        let mut y: Vec<i128> = y.iter().map(|&x| x as i128).collect();
        for el in &self.eliminations {
            let yr = y[el.row];
            if yr != 0 {
                for &(i, c) in &el.rest {
                    y[i] -= yr * (el.unit * c) as i128;
                }
                y[el.row] = 0;
            }
        }
        self.summands
            .iter()
            .zip(&self.orders)
            .map(|(&s, &ord)| {
                let mut z: i128 = 0;
                for (k, &g) in self.kept.iter().enumerate() {
                    if y[g] != 0 {
                        z += self.snf.u.get(s, k).to_i128().expect("transform entry exceeds i128") * y[g];
                    }
                }
                if ord > 0 {
                    z = z.rem_euclid(ord as i128);
                }
                i64::try_from(z).expect("coordinate exceeds i64")
            })
            .collect()
    }

    /// Generator vectors (over the original generators) of the nontrivial summands.
    pub fn generators(&self) -> Vec<Vec<i64>> {
        self.summands
            .iter()
            .map(|&s| {
                let mut g = vec![0i64; self.generators];
                for (k, &row) in self.kept.iter().enumerate() {
                    g[row] = self.snf.u_inv.get_i64(k, s);
                }
                g
            })
            .collect()
    }

    /// A real functional x on generators with x·g_s = vals[s] for each
    /// nontrivial summand. Torsion values are expected in (2π/τ)ℤ, so every
    /// relation evaluates to a multiple of 2π.
    pub fn functional(&self, vals: &[f64]) -> Vec<f64> {
        assert_eq!(vals.len(), self.summands.len());
        let nk = self.kept.len();
        let mut v = vec![0.0; nk];
        for (&s, &val) in self.summands.iter().zip(vals) {
            v[s] = val;
        }
        let mut x = vec![0.0; self.generators];
        for (k, &row) in self.kept.iter().enumerate() {
            let mut acc = 0.0;
            for (i, &vi) in v.iter().enumerate() {
                if vi != 0.0 {
                    acc += self.snf.u.get(i, k).to_f64().unwrap() * vi;
                }
            }
            x[row] = acc;
        }
        for el in self.eliminations.iter().rev() {
            let s: f64 = el.rest.iter().map(|&(i, c)| c as f64 * x[i]).sum();
            x[el.row] = -(el.unit as f64) * s;
        }
        x
    }

    /// For torsion summand `t` (index into the torsion list) with order τ,
    /// integer weights σ on the original relations with A·σ = τ·g_t.
    pub fn bounding_relation(&self, t: usize, num_relations: usize) -> Option<Vec<i64>> {
        let combos = self.combos.as_ref()?;
        let s = self.summands[t];
        if self.orders[t] == 0 {
            return None;
        }
        let mut sigma = vec![0i64; num_relations];
        for (c, combo) in combos.iter().enumerate() {
            let w = self.snf.v.get_i64(c, s);
            if w != 0 {
                for (&o, &x) in combo {
                    sigma[o] += w * x;
                }
            }
        }
        Some(sigma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_dense(rows: &[Vec<i64>]) -> SparseIntMatrix {
        let m = rows.len();
        let n = rows[0].len();
        let mut a = SparseIntMatrix::new(m, n);
        for (i, r) in rows.iter().enumerate() {
            for (j, &x) in r.iter().enumerate() {
                if x != 0 {
                    a.add(i, j, x);
                }
            }
        }
        a
    }

    #[test]
    fn cyclic_group_of_order_two() {
        let a = from_dense(&[vec![2]]);
        let p = Presentation::compute(&a, true);
        assert_eq!(p.torsion(), vec![2]);
        assert_eq!(p.betti(), 0);
        assert_eq!(p.coordinates(&[3]), vec![1]);
        let sigma = p.bounding_relation(0, 1).unwrap();
        let g = &p.generators()[0];
        assert_eq!(a.apply(&sigma), g.iter().map(|x| 2 * x).collect::<Vec<_>>());
    }

    #[test]
    fn mixed_presentation() {
        // ℤ³ / ⟨e0 − e1, 2e2⟩ ≅ ℤ ⊕ ℤ₂
        let a = from_dense(&[vec![1, 0], vec![-1, 0], vec![0, 2]]);
        let p = Presentation::compute(&a, true);
        assert_eq!(p.torsion(), vec![2]);
        assert_eq!(p.betti(), 1);
        let c0 = p.coordinates(&[1, 0, 0]);
        let c1 = p.coordinates(&[0, 1, 0]);
        assert_eq!(c0, c1);
        assert_eq!(p.coordinates(&[0, 0, 2]), vec![0, 0]);
        let gens = p.generators();
        for (s, g) in gens.iter().enumerate() {
            let z = p.coordinates(g);
            for (k, zk) in z.iter().enumerate() {
                assert_eq!(*zk, (k == s) as i64);
            }
        }
        let x = p.functional(&[std::f64::consts::PI, 0.7]);
        for rel in &a.cols {
            let val: f64 = rel.iter().map(|(i, c)| x[*i] * *c as f64).sum();
            let k = val / (2.0 * std::f64::consts::PI);
            assert!((k - k.round()).abs() < 1e-12);
        }
        let on_free: f64 = gens[1].iter().zip(&x).map(|(g, xi)| *g as f64 * xi).sum();
        assert!((on_free - 0.7).abs() < 1e-12);
    }
}
