//! Lowest eigenpairs of a Hermitian matrix given as a matrix–vector product.
//!
//! Restarted Krylov subspace iteration with Rayleigh–Ritz extraction, full
//! (twice-iterated) Gram–Schmidt, locking of converged pairs with deflation,
//! a fresh random direction after every lock, and a completion check.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

type Vector = Vec<Complex64>;

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Orthogonalizes v against the given orthonormal sets; returns the norm
/// before normalization relative to the input norm.
fn orthonormalize(v: &mut Vector, sets: &[&[Vector]]) -> f64 {
    let n0 = norm(v);
    if n0 == 0.0 {
        return 0.0;
    }
    for _ in 0..2 {
        for set in sets {
            for u in set.iter() {
                let h = dot(u, v);
                axpy(-h, u, v);
            }
        }
    }
    let n1 = norm(v);
    if n1 > 0.0 {
        for z in v.iter_mut() {
            *z /= n1;
        }
    }
    n1 / n0
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

/// Linear combinations Σ_j basis_j c_{j,col} for the selected columns.
fn combine(basis: &[Vector], coef: &DMatrix<Complex64>, cols: &[usize]) -> Vec<Vector> {
    let n = basis.first().map_or(0, |v| v.len());
    cols.iter()
        .map(|&c| {
            let mut out = vec![Complex64::new(0.0, 0.0); n];
            for (j, b) in basis.iter().enumerate() {
                axpy(coef[(j, c)], b, &mut out);
            }
            out
        })
        .collect()
}

fn ritz(t: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let h = (t + t.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(t.nrows(), t.ncols());
    for (new, &old) in order.iter().enumerate() {
        vecs.set_column(new, &eig.eigenvectors.column(old));
    }
    (vals, vecs)
}

#[derive(Clone, Debug)]
pub struct KrylovOptions {
    pub tol: f64,
    pub seed: u64,
    pub max_matvecs: usize,
    pub basis_size: usize,
}

#[derive(Clone, Debug)]
pub struct KrylovResult {
    pub values: Vec<f64>,
    pub vectors: Vec<Vector>,
    pub matvecs: usize,
    pub restarts: usize,
}

struct State {
    locked: Vec<Vector>,
    locked_vals: Vec<f64>,
    matvecs: usize,
    restarts: usize,
    rng: ChaCha8Rng,
}

/// Locks `want` further eigenpairs of the map deflated by the locked ones,
/// starting from a fresh random vector.
fn search(
    apply: &dyn Fn(&[Complex64]) -> Vector,
    n: usize,
    want: usize,
    st: &mut State,
    opts: &KrylovOptions,
) -> Result<()> {
    let target = (st.locked.len() + want).min(n);
    let mdim = opts.basis_size.max(want + 10).min(n);
    let keep = (mdim / 2).max(1);
    let mut v: Vec<Vector> = Vec::new();
    let mut w: Vec<Vector> = Vec::new();
    let mut t = DMatrix::<Complex64>::zeros(0, 0);
    let mut next = random_vector(&mut st.rng, n);

    while st.locked.len() < target {
        if st.matvecs >= opts.max_matvecs {
            return Err(Error::NoConvergence(format!(
                "{} of {target} eigenpairs after {} products (basis {mdim}, tol {:e})",
                st.locked.len(),
                st.matvecs,
                opts.tol
            )));
        }
        if st.locked.len() + v.len() >= n {
            // the active space spans everything left: finish with a dense solve
            let (vals, vecs) = ritz(&t);
            let cols: Vec<usize> = (0..vals.len()).collect();
            for (x, val) in combine(&v, &vecs, &cols).into_iter().zip(vals) {
                st.locked.push(x);
                st.locked_vals.push(val);
            }
            break;
        }
        let rel = orthonormalize(&mut next, &[&st.locked, &v]);
        if rel < 1e-8 {
            next = random_vector(&mut st.rng, n);
            continue;
        }
        let wn = apply(&next);
        st.matvecs += 1;
        let j = v.len();
        v.push(next);
        w.push(wn);
        t = t.resize(j + 1, j + 1, Complex64::new(0.0, 0.0));
        for i in 0..=j {
            let h = dot(&v[i], &w[j]);
            t[(i, j)] = h;
            t[(j, i)] = h.conj();
        }

        let (vals, vecs) = ritz(&t);
        let x = combine(&v, &vecs, &[0]).pop().expect("one column");
        let ax = combine(&w, &vecs, &[0]).pop().expect("one column");
        let mut r = ax;
        axpy(Complex64::new(-vals[0], 0.0), &x, &mut r);
        let rn = norm(&r);

        if rn <= opts.tol {
            st.locked.push(x);
            st.locked_vals.push(vals[0]);
            let rest: Vec<usize> = (1..vals.len()).collect();
            v = combine(&v, &vecs, &rest);
            w = combine(&w, &vecs, &rest);
            t = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                rest.len(),
                rest.iter().map(|&i| Complex64::new(vals[i], 0.0)),
            ));
            next = random_vector(&mut st.rng, n);
            continue;
        }
        if v.len() >= mdim {
            let cols: Vec<usize> = (0..keep).collect();
            v = combine(&v, &vecs, &cols);
            w = combine(&w, &vecs, &cols);
            t = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                keep,
                cols.iter().map(|&i| Complex64::new(vals[i], 0.0)),
            ));
            st.restarts += 1;
        }
        next = r;
    }
    Ok(())
}

fn kth_smallest(vals: &[f64], k: usize) -> f64 {
    let mut s = vals.to_vec();
    s.sort_by(f64::total_cmp);
    s[k - 1]
}

/// The `count` lowest eigenpairs of the Hermitian map `apply` on ℂⁿ, with
/// ‖Ax − λx‖ ≤ tol for unit x.
///
/// A locked pair can converge before a lower eigenvector has appeared in the
/// subspace (typically the second member of a degenerate pair). After the
/// main pass, fresh deflated searches therefore run until the lowest
/// remaining eigenvalue is no smaller than the count-th locked one.
pub fn lowest_eigenpairs(
    apply: &dyn Fn(&[Complex64]) -> Vector,
    n: usize,
    count: usize,
    opts: &KrylovOptions,
) -> Result<KrylovResult> {
    let count = count.min(n);
    let mut st = State {
        locked: Vec::new(),
        locked_vals: Vec::new(),
        matvecs: 0,
        restarts: 0,
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
    };
    search(apply, n, count, &mut st, opts)?;
    while count > 0 && st.locked.len() < n {
        let bound = kth_smallest(&st.locked_vals, count);
        search(apply, n, 1, &mut st, opts)?;
        let found = *st.locked_vals.last().expect("search locked a pair");
        if found >= bound - opts.tol {
            break;
        }
    }

    let mut order: Vec<usize> = (0..st.locked.len()).collect();
    order.sort_by(|&a, &b| st.locked_vals[a].total_cmp(&st.locked_vals[b]));
    order.truncate(count);
    Ok(KrylovResult {
        values: order.iter().map(|&i| st.locked_vals[i]).collect(),
        vectors: order.iter().map(|&i| st.locked[i].clone()).collect(),
        matvecs: st.matvecs,
        restarts: st.restarts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> KrylovOptions {
        KrylovOptions { tol: 1e-10, seed: 0, max_matvecs: 20_000, basis_size: 40 }
    }

    #[test]
    fn diagonal_with_degeneracy() {
        // eigenvalues 0, 1, 1, 1, 2, 3, … : the triple must be found in full
        let n = 200;
        let d: Vec<f64> = (0..n).map(|i| if (1..=3).contains(&i) { 1.0 } else { i as f64 }).collect();
        let apply = |x: &[Complex64]| x.iter().zip(&d).map(|(z, a)| z * a).collect::<Vec<_>>();
        let res = lowest_eigenpairs(&apply, n, 5, &opts()).unwrap();
        let want = [0.0, 1.0, 1.0, 1.0, 4.0];
        for (a, b) in res.values.iter().zip(want) {
            assert!((a - b).abs() < 1e-9, "{:?}", res.values);
        }
    }

    #[test]
    fn path_laplacian() {
        let n = 300;
        let apply = |x: &[Complex64]| {
            (0..n)
                .map(|i| {
                    let mut y = x[i] * 2.0;
                    if i > 0 {
                        y -= x[i - 1];
                    }
                    if i + 1 < n {
                        y -= x[i + 1];
                    }
                    y
                })
                .collect::<Vec<_>>()
        };
        let res = lowest_eigenpairs(&apply, n, 4, &opts()).unwrap();
        for (k, val) in res.values.iter().enumerate() {
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * (k + 1) as f64 / (n + 1) as f64).cos();
            assert!((val - exact).abs() < 1e-9, "{k}: {val} vs {exact}");
        }
    }

    #[test]
    fn small_space_is_exhausted() {
        let apply = |x: &[Complex64]| vec![x[1], x[0]];
        let res = lowest_eigenpairs(&apply, 2, 2, &opts()).unwrap();
        assert!((res.values[0] + 1.0).abs() < 1e-12 && (res.values[1] - 1.0).abs() < 1e-12);
    }
}
