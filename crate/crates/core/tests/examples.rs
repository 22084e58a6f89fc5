use std::f64::consts::PI;

use bqk::classify::{build_flat_bundle_r, classify_connection, enumerate_classes, equivalent, QuantumNumbers};
use bqk::gauge::{self, aharonov_bohm_connection, flat_connection, holonomy, monopole_connection, ConnectionU1};
use bqk::homology::{cohomology, cycle_basis, homology, smith_normal_form, IntegerMatrix};
use bqk::mesh::{catalogue, refine::refine, MeshComplex};
use bqk::spectra::{eigen, magnetic_hamiltonian, theta_sweep_circle, EigenOptions};
use bqk::units::Units;
use bqk::Complex64;
use num_bigint::BigInt;

fn face_chain(m: &MeshComplex, f: usize) -> Vec<i64> {
    let mut c = vec![0; m.num_edges()];
    for s in &m.faces()[f] {
        c[s.edge] += s.sign();
    }
    c
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() < tol
}

#[test]
fn smith_form_of_two_by_two() {
    let a = IntegerMatrix::from_rows(&[vec![2, 4], vec![6, 8]]);
    let s = smith_normal_form(&a);
    // d₁ is the gcd of the entries and d₁d₂ is |det|
    let gcd = num_integer::gcd(num_integer::gcd(2i64, 4), num_integer::gcd(6, 8));
    let det = (2 * 8 - 4 * 6_i64).abs();
    assert_eq!(s.diagonal(), vec![BigInt::from(gcd), BigInt::from(det / gcd)]);
    assert_eq!(s.u.mul(&a).mul(&s.v), s.s);

    let z = IntegerMatrix::zeros(3, 2);
    let s = smith_normal_form(&z);
    assert!(s.s.is_zero());
    assert_eq!(s.u, IntegerMatrix::identity(3));
    assert_eq!(s.v, IntegerMatrix::identity(2));
}

#[test]
fn homology_table() {
    let cases: [(MeshComplex, (usize, Vec<u64>), (usize, Vec<u64>)); 6] = [
        (catalogue::circle(12).unwrap(), (1, vec![]), (0, vec![])),
        (catalogue::annulus(4, 8).unwrap(), (1, vec![]), (0, vec![])),
        (catalogue::sphere(1).unwrap(), (0, vec![]), (1, vec![])),
        (catalogue::torus(4, 4).unwrap(), (2, vec![]), (1, vec![])),
        (catalogue::genus_surface(2, 3).unwrap(), (4, vec![]), (1, vec![])),
        (catalogue::projective_plane(1).unwrap(), (0, vec![2]), (0, vec![2])),
    ];
    for (m, h1, h2) in cases {
        let g1 = homology(&m, 1).unwrap();
        let c2 = cohomology(&m, 2).unwrap();
        assert_eq!((g1.betti, g1.torsion), h1, "{}", m.name());
        assert_eq!((c2.betti, c2.torsion), h2, "{}", m.name());
        let b: Vec<i64> = (0..3).map(|k| homology(&m, k).unwrap().betti as i64).collect();
        assert_eq!(b[0] - b[1] + b[2], m.euler_characteristic(), "{}", m.name());
    }
}

#[test]
fn polyhedral_counts() {
    let ico = catalogue::sphere(0).unwrap();
    assert_eq!((ico.num_vertices(), ico.num_edges(), ico.num_faces()), (12, 30, 20));
    let l1 = refine(&ico).unwrap();
    assert_eq!((l1.num_vertices(), l1.num_edges(), l1.num_faces()), (42, 120, 80));
    let t = catalogue::torus(3, 3).unwrap();
    let t1 = refine(&t).unwrap();
    assert_eq!(t1.num_faces(), 4 * t.num_faces());
    assert_eq!(t1.euler_characteristic(), 0);
    assert_eq!(refine(&t1).unwrap().euler_characteristic(), 0);
    assert_eq!(catalogue::genus_surface(2, 3).unwrap().euler_characteristic(), -2);
    assert_eq!(catalogue::projective_plane(1).unwrap().euler_characteristic(), 1);
}

#[test]
fn cycle_bases() {
    assert_eq!(cycle_basis(&catalogue::torus(3, 3).unwrap()).free.len(), 2);
    assert!(cycle_basis(&catalogue::sphere(1).unwrap()).free.is_empty());
    let rp2 = cycle_basis(&catalogue::projective_plane(1).unwrap());
    assert!(rp2.free.is_empty());
    assert_eq!(rp2.torsion.len(), 1);
    assert_eq!(rp2.torsion[0].1, 2);
}

#[test]
fn classification_cards() {
    let torus = enumerate_classes(&catalogue::torus(4, 4).unwrap());
    assert_eq!(torus.classes.thetas, 2);
    assert_eq!(torus.classes.chern, "Z");
    let annulus = enumerate_classes(&catalogue::annulus(4, 8).unwrap());
    assert_eq!(annulus.classes.thetas, 1);
    let sphere = enumerate_classes(&catalogue::sphere(1).unwrap());
    assert_eq!(sphere.classes.thetas, 0);
    let rp2 = enumerate_classes(&catalogue::projective_plane(1).unwrap());
    assert_eq!(rp2.classes.torsion, vec![2]);
}

#[test]
fn icosahedral_monopole_fluxes() {
    let m = catalogue::sphere(0).unwrap();
    let a = monopole_connection(&m, 1).unwrap();
    let want = Complex64::from_polar(1.0, 2.0 * PI / 20.0);
    for f in 0..m.num_faces() {
        assert!(close(holonomy(&m, &a, &face_chain(&m, f)).unwrap(), want, 1e-12));
    }
    assert_eq!(gauge::chern_number(&m, &monopole_connection(&m, -3).unwrap()).unwrap(), -3);
    let zero = monopole_connection(&m, 0).unwrap();
    assert!(gauge::is_flat(&m, &zero, 1e-12));
    assert!(!gauge::is_flat(&m, &a, 1e-9));
}

#[test]
fn aharonov_bohm_holonomies() {
    let c = catalogue::circle(10).unwrap();
    let loop_chain = vec![1; c.num_edges()];
    let h = holonomy(&c, &aharonov_bohm_connection(&c, 0.5).unwrap(), &loop_chain).unwrap();
    assert!(close(h, Complex64::new(-1.0, 0.0), 1e-12));
    let one = aharonov_bohm_connection(&c, 1.0).unwrap();
    assert!(close(holonomy(&c, &one, &loop_chain).unwrap(), Complex64::new(1.0, 0.0), 1e-12));
    let q0 = classify_connection(&c, &aharonov_bohm_connection(&c, 0.0).unwrap(), 0.0).unwrap();
    let q1 = classify_connection(&c, &one, 0.0).unwrap();
    assert!(equivalent(&q0, &q1, 1e-9).unwrap());

    let a = catalogue::annulus(4, 8).unwrap();
    let q = classify_connection(&a, &aharonov_bohm_connection(&a, 0.25).unwrap(), 0.0).unwrap();
    assert!((q.thetas[0] - 0.25).abs() < 1e-12);
}

#[test]
fn equivalence_rules() {
    let a = catalogue::annulus(4, 8).unwrap();
    let near = QuantumNumbers::flat(&a, &[0.999999999], &[], 0.0).unwrap();
    let zero = QuantumNumbers::flat(&a, &[0.0], &[], 0.0).unwrap();
    assert!(equivalent(&near, &zero, 1e-8).unwrap());
    let shifted = QuantumNumbers::flat(&a, &[0.0], &[], 0.3).unwrap();
    assert!(!equivalent(&zero, &shifted, 1e-8).unwrap());
    let s = catalogue::sphere(1).unwrap();
    let p = classify_connection(&s, &monopole_connection(&s, 1).unwrap(), 0.0).unwrap();
    let n = classify_connection(&s, &monopole_connection(&s, -1).unwrap(), 0.0).unwrap();
    assert!(!equivalent(&p, &n, 1e-8).unwrap());
    let two = classify_connection(&s, &monopole_connection(&s, 2).unwrap(), 0.0).unwrap();
    assert_eq!(two.chern.free, vec![2]);
    assert!(two.thetas.is_empty());
}

#[test]
fn log_exact_cochains() {
    let a = catalogue::annulus(4, 8).unwrap();
    let half = flat_connection(&a, &[0.5], &[]).unwrap();
    assert!(!gauge::is_log_exact(&a, &half.phases));
    let double = flat_connection(&a, &[2.0], &[]).unwrap();
    assert!(gauge::is_log_exact(&a, &double.phases));
    // adding a log-exact cochain leaves the class unchanged
    let base = aharonov_bohm_connection(&a, 0.3).unwrap();
    let q0 = classify_connection(&a, &base, 0.0).unwrap();
    let q1 = classify_connection(&a, &base.plus(&double.phases), 0.0).unwrap();
    assert!(equivalent(&q0, &q1, 1e-10).unwrap());
}

#[test]
fn flat_bundles_from_characters() {
    let a = catalogue::annulus(4, 8).unwrap();
    let trivial = build_flat_bundle_r(&a, &[QuantumNumbers::flat(&a, &[0.0], &[], 0.0).unwrap()]).unwrap();
    assert!(trivial[0].phases.iter().all(|&x| x == 0.0));
    let chars =
        [QuantumNumbers::flat(&a, &[0.0], &[], 0.0).unwrap(), QuantumNumbers::flat(&a, &[0.5], &[], 0.0).unwrap()];
    let lines = build_flat_bundle_r(&a, &chars).unwrap();
    let gen = &cycle_basis(&a).free[0];
    let h: Vec<Complex64> = lines.iter().map(|l| holonomy(&a, l, gen).unwrap()).collect();
    assert!(close(h[0], Complex64::new(1.0, 0.0), 1e-12));
    assert!(close(h[1], Complex64::new(-1.0, 0.0), 1e-12));

    let p = catalogue::projective_plane(1).unwrap();
    let tors = &cycle_basis(&p).torsion[0].0;
    let chars = [QuantumNumbers::flat(&p, &[], &[0], 0.0).unwrap(), QuantumNumbers::flat(&p, &[], &[1], 0.0).unwrap()];
    let lines = build_flat_bundle_r(&p, &chars).unwrap();
    assert!(close(holonomy(&p, &lines[0], tors).unwrap(), Complex64::new(1.0, 0.0), 1e-12));
    assert!(close(holonomy(&p, &lines[1], tors).unwrap(), Complex64::new(-1.0, 0.0), 1e-12));
}

#[test]
fn circle_sweep_values() {
    let u = Units::default();
    let rows = theta_sweep_circle(8, &[0.0, 0.5], 17, &u).unwrap();
    // with ħ = 1, m = 1/2 the levels are (k − θ)²
    let oracle = |theta: f64| {
        let mut v: Vec<f64> = (-8i64..=8).map(|k| (k as f64 - theta).powi(2)).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    assert_eq!(rows[0].eigenvalues, oracle(0.0));
    assert_eq!(rows[1].eigenvalues, oracle(0.5));
    assert!(rows[1].eigenvalues[..16].chunks(2).all(|p| p[0] == p[1]));
}

#[test]
fn sphere_laplacian_triplet() {
    let m = catalogue::sphere(2).unwrap();
    let h = magnetic_hamiltonian(&m, &ConnectionU1::trivial(&m), &Units::default()).unwrap();
    let r = eigen(&h, 5, &EigenOptions::default()).unwrap();
    assert!(r.eigenvalues[0].abs() < 1e-10);
    assert_eq!(r.clusters[0].size, 1);
    assert_eq!(r.clusters[1].size, 3);
}
