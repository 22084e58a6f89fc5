//! Magnetic Hamiltonian, lowest eigenpairs and degeneracy clusters.

pub mod krylov;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gauge::{monopole_connection, ConnectionU1};
use crate::mesh::{refine::refine, MeshComplex};
use crate::operators::{norm, FourierCircle, SparseOperator};
use crate::units::Units;

pub use krylov::{lowest_eigenpairs, KrylovOptions};

/// (Hψ)_v = (ħ²/2m)(1/μ_v) Σ_{e out of v} w_e (ψ_v − e^{−i a_e} ψ_head(e)).
pub fn magnetic_hamiltonian(mesh: &MeshComplex, conn: &ConnectionU1, units: &Units) -> Result<SparseOperator> {
    conn.check_mesh(mesh)?;
    let (w, mu) = (mesh.weights(), mesh.measure());
    let k = units.kinetic();
    let mut trips = Vec::new();
    for v in 0..mesh.num_vertices() {
        for inc in mesh.incidence(v) {
            let c = k * w[inc.dir.edge] / mu[v];
            trips.push((v, v, Complex64::new(c, 0.0)));
            trips.push((v, inc.other, -Complex64::from_polar(c, -conn.along(inc.dir))));
        }
    }
    Ok(SparseOperator::from_triplets(mu.to_vec(), trips).flagged(true, 1))
}

/// Hamiltonian of a diagonal flat bundle, one block per line.
pub fn magnetic_hamiltonian_block(mesh: &MeshComplex, conns: &[ConnectionU1], units: &Units) -> Result<SparseOperator> {
    let blocks = conns.iter().map(|a| magnetic_hamiltonian(mesh, a, units)).collect::<Result<Vec<_>>>()?;
    Ok(SparseOperator::direct_sum(&blocks))
}

#[derive(Clone, Debug)]
pub struct EigenOptions {
    /// Relative gap separating degeneracy clusters.
    pub gap_threshold: f64,
    /// Residual bound ‖Aψ − λψ‖ ≤ tol ‖ψ‖.
    pub tol: f64,
    pub seed: u64,
    /// Largest dimension solved densely.
    pub dense_limit: usize,
    pub max_matvecs: usize,
    pub basis_size: usize,
    pub want_vectors: bool,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            gap_threshold: 0.05,
            tol: 1e-8,
            seed: 0,
            dense_limit: 512,
            max_matvecs: 200_000,
            basis_size: 80,
            want_vectors: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cluster {
    pub id: usize,
    pub start: usize,
    pub size: usize,
    pub mean: f64,
    /// Distance to the next cluster divided by the spectral scale; absent
    /// for the last computed cluster.
    pub relative_gap: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub cluster_ids: Vec<usize>,
    pub clusters: Vec<Cluster>,
    pub residuals: Vec<f64>,
    pub solver: String,
    pub matvecs: usize,
    pub restarts: usize,
    pub gap_threshold: f64,
    /// μ-normalized eigenvectors, when requested.
    #[serde(skip)]
    pub eigenvectors: Option<Vec<Vec<Complex64>>>,
}

impl SpectrumResult {
    pub fn lowest_cluster(&self) -> Option<&Cluster> {
        self.clusters.first()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,eigenvalue,cluster,residual\n");
        for (i, ((e, c), r)) in self.eigenvalues.iter().zip(&self.cluster_ids).zip(&self.residuals).enumerate() {
            writeln!(s, "{i},{e:.15e},{c},{r:.3e}").expect("write to string");
        }
        s
    }
}

/// Groups sorted values: a new cluster starts where the gap exceeds
/// max(threshold · max|λ|, 1e−9).
pub fn cluster(values: &[f64], threshold: f64) -> (Vec<usize>, Vec<Cluster>) {
    let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let floor = (threshold * scale).max(1e-9);
    let mut ids = Vec::with_capacity(values.len());
    let mut clusters: Vec<Cluster> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        if i == 0 || v - values[i - 1] > floor {
            if let Some(last) = clusters.last_mut() {
                let gap = v - values[i - 1];
                last.relative_gap = Some(if scale > 0.0 { gap / scale } else { f64::INFINITY });
            }
            clusters.push(Cluster { id: clusters.len(), start: i, size: 0, mean: 0.0, relative_gap: None });
        }
        let c = clusters.last_mut().expect("a cluster was opened");
        c.size += 1;
        c.mean += v;
        ids.push(c.id);
    }
    for c in &mut clusters {
        c.mean /= c.size as f64;
    }
    (ids, clusters)
}

fn residuals(op: &SparseOperator, values: &[f64], vectors: &[Vec<Complex64>]) -> Vec<f64> {
    let m = op.measure();
    values
        .iter()
        .zip(vectors)
        .map(|(&l, x)| {
            let mut r = op.apply(x);
            for (ri, xi) in r.iter_mut().zip(x) {
                *ri -= xi * l;
            }
            norm(m, &r) / norm(m, x)
        })
        .collect()
}

/// The k lowest eigenpairs of a Hermitian operator.
pub fn eigen(op: &SparseOperator, k: usize, opts: &EigenOptions) -> Result<SpectrumResult> {
    if !op.is_hermitian() {
        return Err(Error::NotHermitian("eigen requires an operator flagged Hermitian".into()));
    }
    let n = op.dim();
    if k > n {
        return Err(Error::InvalidArgument(format!("asked for {k} eigenvalues of a {n}-dimensional operator")));
    }
    let mu = op.measure().to_vec();
    let (values, vectors, solver, matvecs, restarts): (Vec<f64>, Vec<Vec<Complex64>>, &str, usize, usize) =
        if op.is_diagonal() {
            let mut d: Vec<(f64, usize)> = (0..n).map(|i| (op.get(i, i).re, i)).collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let vals = d[..k].iter().map(|p| p.0).collect();
            let vecs = d[..k]
                .iter()
                .map(|&(_, i)| {
                    let mut e = vec![Complex64::new(0.0, 0.0); n];
                    e[i] = Complex64::new(1.0 / mu[i].sqrt(), 0.0);
                    e
                })
                .collect();
            (vals, vecs, "diagonal", 0, 0)
        } else {
            let sq: Vec<f64> = mu.iter().map(|m| m.sqrt()).collect();
            // S = M^{1/2} A M^{−1/2} is Hermitian in the Euclidean product
            let to_psi = |y: &[Complex64]| y.iter().zip(&sq).map(|(z, s)| z / s).collect::<Vec<_>>();
            if n <= opts.dense_limit {
                let mut s = op.to_dense();
                for i in 0..n {
                    for j in 0..n {
                        s[(i, j)] *= sq[i] / sq[j];
                    }
                }
                let s = (&s + s.adjoint()) * Complex64::new(0.5, 0.0);
                let eig = s.symmetric_eigen();
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
                let vals = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
                let vecs = order[..k].iter().map(|&i| to_psi(eig.eigenvectors.column(i).as_slice())).collect();
                (vals, vecs, "dense", 0, 0)
            } else {
                let apply = |y: &[Complex64]| {
                    let x = to_psi(y);
                    op.apply(&x).iter().zip(&sq).map(|(z, s)| z * s).collect::<Vec<_>>()
                };
                let kopts = KrylovOptions {
                    tol: opts.tol * 0.1,
                    seed: opts.seed,
                    max_matvecs: opts.max_matvecs,
                    basis_size: opts.basis_size,
                };
                // one extra pair guards the completeness of the last cluster
                let res = lowest_eigenpairs(&apply, n, (k + 1).min(n), &kopts)?;
                let vecs = res.vectors[..k].iter().map(|y| to_psi(y)).collect();
                (res.values[..k].to_vec(), vecs, "krylov", res.matvecs, res.restarts)
            }
        };
    let res = residuals(op, &values, &vectors);
    let scale = values.iter().map(|v: &f64| v.abs()).fold(1.0, f64::max);
    if let Some((i, r)) = res.iter().enumerate().find(|(_, &r)| r > opts.tol * scale) {
        return Err(Error::NoConvergence(format!(
            "eigenpair {i} (λ = {}) has residual {r:e} above {:e}",
            values[i], opts.tol
        )));
    }
    let (cluster_ids, clusters) = cluster(&values, opts.gap_threshold);
    Ok(SpectrumResult {
        eigenvalues: values,
        cluster_ids,
        clusters,
        residuals: res,
        solver: solver.to_string(),
        matvecs,
        restarts,
        gap_threshold: opts.gap_threshold,
        eigenvectors: if opts.want_vectors { Some(vectors) } else { None },
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub theta: f64,
    pub eigenvalues: Vec<f64>,
}

/// Lowest `levels` energies (ħ²/2m)(k − θ)² of the Fourier circle per θ.
pub fn theta_sweep_circle(k_max: usize, thetas: &[f64], levels: usize, units: &Units) -> Result<Vec<SweepRow>> {
    if levels > 2 * k_max + 1 {
        return Err(Error::InvalidArgument(format!("{levels} levels exceed the {} modes", 2 * k_max + 1)));
    }
    thetas
        .iter()
        .map(|&theta| {
            let fc = FourierCircle::new(k_max, theta, *units)?;
            let res = eigen(&fc.hamiltonian(), levels, &EigenOptions::default())?;
            Ok(SweepRow { theta, eigenvalues: res.eigenvalues })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let width = rows.iter().map(|r| r.eigenvalues.len()).max().unwrap_or(0);
    let mut s = String::from("theta");
    for i in 0..width {
        write!(s, ",e{i}").expect("write to string");
    }
    s.push('\n');
    for r in rows {
        write!(s, "{}", r.theta).expect("write to string");
        for e in &r.eigenvalues {
            write!(s, ",{e:.15e}").expect("write to string");
        }
        s.push('\n');
    }
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct MonopoleLevel {
    pub refinement: usize,
    pub vertices: usize,
    pub eigenvalues: Vec<f64>,
    pub lowest_cluster_size: usize,
    pub relative_gap: Option<f64>,
    pub matvecs: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonopoleReport {
    pub n: i64,
    pub expected: usize,
    pub levels: Vec<MonopoleLevel>,
    /// True when the finest level shows the expected cluster size.
    pub stabilized: bool,
}

/// Lowest cluster of the monopole Hamiltonian on `mesh` and on `refinements`
/// successive refinements of it.
pub fn monopole_degeneracy(
    mesh: &MeshComplex,
    n: i64,
    refinements: usize,
    units: &Units,
    opts: &EigenOptions,
) -> Result<MonopoleReport> {
    let expected = n.unsigned_abs() as usize + 1;
    let k = expected + 2;
    let mut levels = Vec::new();
    let mut current = mesh.clone();
    for r in 0..=refinements {
        if r > 0 {
            current = refine(&current)?;
        }
        let conn = monopole_connection(&current, n)?;
        let h = magnetic_hamiltonian(&current, &conn, units)?;
        let res = eigen(&h, k.min(current.num_vertices()), opts)?;
        let c = res.lowest_cluster().expect("at least one eigenvalue");
        levels.push(MonopoleLevel {
            refinement: r,
            vertices: current.num_vertices(),
            lowest_cluster_size: c.size,
            relative_gap: c.relative_gap,
            eigenvalues: res.eigenvalues.clone(),
            matvecs: res.matvecs,
        });
    }
    let stabilized = levels.last().is_some_and(|l| l.lowest_cluster_size == expected);
    Ok(MonopoleReport { n, expected, levels, stabilized })
}

/// JSON rendering of a spectrum with the constants used.
pub fn spectrum_json(
    res: &SpectrumResult,
    units: &Units,
    extra: BTreeMap<String, serde_json::Value>,
) -> serde_json::Value {
    let mut v = serde_json::to_value(res).expect("spectrum serializes");
    let obj = v.as_object_mut().expect("object");
    obj.insert("units".into(), serde_json::to_value(units).expect("units serialize"));
    for (k, x) in extra {
        obj.insert(k, x);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{aharonov_bohm_connection, gauge_transform, GaugeTransform};
    use crate::mesh::catalogue;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn diagonal_and_pauli() {
        let d = SparseOperator::diagonal(vec![1.0; 4], &[c(3.0), c(-1.0), c(2.0), c(0.5)]);
        let r = eigen(&d, 4, &EigenOptions::default()).unwrap();
        assert_eq!(r.eigenvalues, vec![-1.0, 0.5, 2.0, 3.0]);
        let x = SparseOperator::from_triplets(vec![1.0; 2], vec![(0, 1, c(1.0)), (1, 0, c(1.0))]).flagged(true, 1);
        let r = eigen(&x, 2, &EigenOptions::default()).unwrap();
        assert!((r.eigenvalues[0] + 1.0).abs() < 1e-14 && (r.eigenvalues[1] - 1.0).abs() < 1e-14);
        let nh = SparseOperator::from_triplets(vec![1.0; 2], vec![(0, 1, c(1.0))]);
        assert!(matches!(eigen(&nh, 1, &EigenOptions::default()), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn trivial_connection_ground_state() {
        let m = catalogue::torus(6, 5).unwrap();
        let h = magnetic_hamiltonian(&m, &ConnectionU1::trivial(&m), &Units::default()).unwrap();
        let opts = EigenOptions { want_vectors: true, ..Default::default() };
        let r = eigen(&h, 1, &opts).unwrap();
        assert!(r.eigenvalues[0].abs() < 1e-12);
        let v = &r.eigenvectors.unwrap()[0];
        assert!(v.iter().all(|z| (z - v[0]).norm() < 1e-10));
    }

    #[test]
    fn half_flux_circle_is_degenerate() {
        let m = catalogue::circle(64).unwrap();
        let h = magnetic_hamiltonian(&m, &aharonov_bohm_connection(&m, 0.5).unwrap(), &Units::default()).unwrap();
        let r = eigen(&h, 4, &EigenOptions::default()).unwrap();
        assert_eq!(r.clusters[0].size, 2);
        assert!((r.eigenvalues[0] - 0.25).abs() < 1e-3, "{:?}", r.eigenvalues);
    }

    #[test]
    fn sphere_laplacian_triplet() {
        for level in [1, 3] {
            let m = catalogue::sphere(level).unwrap();
            let h = magnetic_hamiltonian(&m, &ConnectionU1::trivial(&m), &Units::default()).unwrap();
            let r = eigen(&h, 5, &EigenOptions::default()).unwrap();
            assert_eq!(r.clusters[0].size, 1);
            assert_eq!(r.clusters[1].size, 3, "{:?}", r.eigenvalues);
            // ℓ(ℓ+1) = 2 for the first excited level
            assert!((r.clusters[1].mean - 2.0).abs() < 0.1, "{:?}", r.eigenvalues);
        }
    }

    #[test]
    fn krylov_matches_dense() {
        let m = catalogue::sphere(2).unwrap();
        let h = magnetic_hamiltonian(&m, &monopole_connection(&m, 1).unwrap(), &Units::default()).unwrap();
        let dense = eigen(&h, 6, &EigenOptions::default()).unwrap();
        let sparse = eigen(&h, 6, &EigenOptions { dense_limit: 0, ..Default::default() }).unwrap();
        assert_eq!(dense.solver, "dense");
        assert_eq!(sparse.solver, "krylov");
        for (a, b) in dense.eigenvalues.iter().zip(&sparse.eigenvalues) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn krylov_finds_both_members_of_a_pair() {
        // rotation-symmetric annulus: the m = ±1 pair must come back complete
        let m = catalogue::annulus(7, 32).unwrap();
        let h = magnetic_hamiltonian(&m, &ConnectionU1::trivial(&m), &Units::default()).unwrap();
        let dense = eigen(&h, 7, &EigenOptions::default()).unwrap();
        let sparse = eigen(&h, 7, &EigenOptions { dense_limit: 0, ..Default::default() }).unwrap();
        for (a, b) in dense.eigenvalues.iter().zip(&sparse.eigenvalues) {
            assert!((a - b).abs() < 1e-9, "{:?} vs {:?}", dense.eigenvalues, sparse.eigenvalues);
        }
        assert_eq!(sparse.clusters[1].size, 2);
    }

    #[test]
    fn gauge_invariant_spectra() {
        let m = catalogue::torus(6, 6).unwrap();
        let conn = crate::gauge::uniform_flux_connection(&m, 2).unwrap();
        let u = Units::default();
        let base = eigen(&magnetic_hamiltonian(&m, &conn, &u).unwrap(), 6, &EigenOptions::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let g = GaugeTransform { chi: (0..m.num_vertices()).map(|_| rng.gen_range(-5.0..5.0)).collect() };
            let h = magnetic_hamiltonian(&m, &gauge_transform(&m, &conn, &g), &u).unwrap();
            let r = eigen(&h, 6, &EigenOptions::default()).unwrap();
            for (a, b) in base.eigenvalues.iter().zip(&r.eigenvalues) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn diamagnetic_inequality() {
        let m = catalogue::torus(5, 6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..20 {
            let a: Vec<f64> = (0..m.num_edges()).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let h = magnetic_hamiltonian(&m, &ConnectionU1::new(&m, a).unwrap(), &Units::default()).unwrap();
            assert!(eigen(&h, 1, &EigenOptions::default()).unwrap().eigenvalues[0] >= -1e-12);
        }
    }

    #[test]
    fn time_reversal_pairs_monopoles() {
        let m = catalogue::sphere(2).unwrap();
        let u = Units::default();
        for n in 1..=2 {
            let p = eigen(
                &magnetic_hamiltonian(&m, &monopole_connection(&m, n).unwrap(), &u).unwrap(),
                8,
                &Default::default(),
            )
            .unwrap();
            let q = eigen(
                &magnetic_hamiltonian(&m, &monopole_connection(&m, -n).unwrap(), &u).unwrap(),
                8,
                &Default::default(),
            )
            .unwrap();
            for (a, b) in p.eigenvalues.iter().zip(&q.eigenvalues) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sweep_values() {
        let u = Units::default();
        let rows = theta_sweep_circle(16, &[0.0, 0.5, 0.25, 1.25], 5, &u).unwrap();
        assert_eq!(rows[0].eigenvalues, vec![0.0, 1.0, 1.0, 4.0, 4.0]);
        assert_eq!(rows[1].eigenvalues, vec![0.25, 0.25, 2.25, 2.25, 6.25]);
        for (a, b) in rows[2].eigenvalues.iter().zip(&rows[3].eigenvalues) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(sweep_csv(&rows).starts_with("theta,e0,e1,e2,e3,e4\n0,"));
    }

    #[test]
    fn monopole_levels_small() {
        let m = catalogue::sphere(2).unwrap();
        for n in 0..=2i64 {
            let rep = monopole_degeneracy(&m, n, 0, &Units::default(), &EigenOptions::default()).unwrap();
            assert_eq!(rep.levels[0].lowest_cluster_size, n as usize + 1, "{rep:?}");
        }
    }

    #[test]
    fn csv_columns() {
        let d = SparseOperator::diagonal(vec![1.0; 2], &[c(1.0), c(1.0)]);
        let r = eigen(&d, 2, &EigenOptions::default()).unwrap();
        assert!(r.to_csv().starts_with("index,eigenvalue,cluster,residual\n0,"));
        assert_eq!(r.clusters.len(), 1);
    }
}
