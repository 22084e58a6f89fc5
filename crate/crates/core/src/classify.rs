//! Inequivalent quantizations: H²(M,ℤ) × Hom(H₁(M,ℤ), U(1)) × ℝ.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{self, ChernClass, ConnectionU1};
use crate::homology::HomologyGroup;
use crate::mesh::MeshComplex;

/// One equivalence class of quantizations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantumNumbers {
    pub chern: ChernClass,
    /// Flux angles θ_j ∈ [0,1) around the free H₁ generators.
    pub thetas: Vec<f64>,
    /// Discrete logarithms m_i ∈ ℤ/τ_i of the torsion holonomies.
    pub torsion_chars: Vec<i64>,
    pub torsion_orders: Vec<u64>,
    pub c: f64,
    /// Fingerprint of the mesh.
    pub manifold: String,
}

impl QuantumNumbers {
    /// A flat class (zero Chern class) given by its character.
    pub fn flat(mesh: &MeshComplex, thetas: &[f64], torsion_chars: &[i64], c: f64) -> Result<Self> {
        let topo = mesh.topology();
        if thetas.len() != topo.h1.betti || torsion_chars.len() != topo.h1.torsion.len() {
            return Err(Error::ShapeMismatch(format!("character does not match H₁ = {}", topo.h1)));
        }
        Ok(QuantumNumbers {
            chern: ChernClass {
                free: vec![0; topo.cohomology2.betti],
                torsion: vec![0; topo.cohomology2.torsion.len()],
            },
            thetas: thetas.iter().map(|&t| canonical_theta(t)).collect(),
            torsion_chars: torsion_chars.iter().zip(&topo.h1.torsion).map(|(&m, &t)| m.rem_euclid(t as i64)).collect(),
            torsion_orders: topo.h1.torsion.clone(),
            c,
            manifold: mesh.fingerprint(),
        })
    }

    /// Torsion holonomies exp(2πi m_i/τ_i).
    pub fn torsion_holonomies(&self) -> Vec<num_complex::Complex64> {
        self.torsion_chars
            .iter()
            .zip(&self.torsion_orders)
            .map(|(&m, &t)| num_complex::Complex64::from_polar(1.0, TAU * m as f64 / t as f64))
            .collect()
    }
}

/// Representative of θ in [0,1); values within 1e−12 below 1 become 0.
pub fn canonical_theta(theta: f64) -> f64 {
    let t = theta.rem_euclid(1.0);
    if t >= 1.0 - 1e-12 {
        0.0
    } else {
        t
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupCard {
    pub betti: usize,
    pub torsion: Vec<u64>,
}

impl From<&HomologyGroup> for GroupCard {
    fn from(g: &HomologyGroup) -> Self {
        GroupCard { betti: g.betti, torsion: g.torsion.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassesCard {
    /// H²(M,ℤ), e.g. "Z", "Z_2" or "0".
    pub chern: String,
    /// Number of flux angles.
    pub thetas: usize,
    pub torsion: Vec<u64>,
    pub c: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationCard {
    pub manifold: String,
    pub pi1: Option<String>,
    #[serde(rename = "H1")]
    pub h1: GroupCard,
    #[serde(rename = "H2")]
    pub h2: GroupCard,
    pub classes: ClassesCard,
    /// Table-style summary such as "n ∈ Z, ϑ_1…ϑ_4 ∈ [0,1)".
    pub quantum_numbers: String,
    pub physical_reading: String,
}

fn pi1_of(mesh: &MeshComplex) -> Option<String> {
    let p = mesh.params().get("p").copied().unwrap_or(0.0) as usize;
    Some(match mesh.name() {
        "circle" | "annulus" | "cylinder" => "Z".to_string(),
        "sphere" => "{e}".to_string(),
        "torus" => "Z^2".to_string(),
        "projective_plane" => "Z_2".to_string(),
        "genus_surface" => {
            let gens: Vec<String> = (1..=p).map(|i| format!("a{i},b{i}")).collect();
            let rel: String = (1..=p).map(|i| format!("[a{i},b{i}]")).collect();
            format!("<{} | {}>", gens.join(","), rel)
        }
        _ => return None,
    })
}

fn theta_label(b1: usize) -> String {
    match b1 {
        1 => "ϑ ∈ [0,1)".to_string(),
        b => format!("ϑ_1…ϑ_{b} ∈ [0,1)"),
    }
}

/// Classification set of quantizations on a mesh.
pub fn enumerate_classes(mesh: &MeshComplex) -> ClassificationCard {
    let topo = mesh.topology();
    let h1 = &topo.h1;
    let h2 = &topo.cohomology2;
    let b1 = h1.betti;

    let mut labels = Vec::new();
    let mut reading = Vec::new();
    match h2.betti {
        0 => {}
        1 => {
            labels.push("n ∈ Z".to_string());
            if b1 == 0 {
                reading.push(
                    "n is the monopole charge: the total magnetic flux through the surface is 2πnħ/e \
                     (Dirac condition eg = 2πnħ)"
                        .to_string(),
                );
            } else {
                reading.push("n is the total magnetic flux through the surface in units of 2πħ/e".to_string());
            }
        }
        k => {
            labels.push(format!("n_1…n_{k} ∈ Z"));
            reading.push("n_i is the total magnetic flux through component i in units of 2πħ/e".to_string());
        }
    }
    if b1 > 0 {
        labels.push(theta_label(b1));
        reading.push(if b1 == 1 {
            "ϑ = eΦ/2πħ mod 1 is the flux angle of the magnetic flux Φ threading the hole (Aharonov–Bohm)".to_string()
        } else {
            format!(
                "ϑ_j = eΦ_j/2πħ mod 1 are the flux angles of the fluxes threading the {b1} independent cycles \
                 without touching the surface"
            )
        });
    }
    // A torsion character of H₁ with matching torsion in H² is one label, as in m ∈ Z_2.
    for &t in &h1.torsion {
        labels.push(format!("m ∈ Z_{t}"));
    }
    if !h1.torsion.is_empty() {
        if h1.torsion == [2] {
            reading.push(
                "m selects the exchange sign: m = 0 bosonic, m = 1 fermionic statistics; for two particles in \
                 the plane the configuration space is not of this form and admits a continuous family of anyonic \
                 quantizations, which is not computed here"
                    .to_string(),
            );
        } else {
            reading.push("m_i label the holonomy exp(2πi m_i/τ_i) around the torsion cycles".to_string());
        }
    }
    let chern_only_torsion: Vec<u64> = h2.torsion.iter().copied().filter(|t| !h1.torsion.contains(t)).collect();
    for t in &chern_only_torsion {
        labels.push(format!("k ∈ Z_{t}"));
    }
    reading.push("c ∈ R shifts every momentum by ħc div X".to_string());

    ClassificationCard {
        manifold: mesh.name().to_string(),
        pi1: pi1_of(mesh),
        h1: h1.into(),
        h2: h2.into(),
        classes: ClassesCard { chern: h2.to_string(), thetas: b1, torsion: h1.torsion.clone(), c: "R".to_string() },
        quantum_numbers: if labels.is_empty() { "---".to_string() } else { labels.join(", ") },
        physical_reading: reading.join("; ") + ".",
    }
}

/// The class of a concrete connection.
pub fn classify_connection(mesh: &MeshComplex, conn: &ConnectionU1, c: f64) -> Result<QuantumNumbers> {
    conn.check_mesh(mesh)?;
    let chern = gauge::chern_class(mesh, conn)?;
    let topo = mesh.topology();
    let thetas = topo.cycles.free.iter().map(|z| canonical_theta(conn.period(z) / TAU)).collect();
    Ok(QuantumNumbers {
        chern,
        thetas,
        torsion_chars: gauge::torsion_characters(mesh, conn),
        torsion_orders: topo.h1.torsion.clone(),
        c,
        manifold: mesh.fingerprint(),
    })
}

fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(1.0);
    d.min(1.0 - d)
}

pub fn equivalent(q1: &QuantumNumbers, q2: &QuantumNumbers, tol: f64) -> Result<bool> {
    if q1.manifold != q2.manifold {
        return Err(Error::ManifoldMismatch(q1.manifold.clone(), q2.manifold.clone()));
    }
    Ok(q1.chern == q2.chern
        && q1.thetas.len() == q2.thetas.len()
        && q1.thetas.iter().zip(&q2.thetas).all(|(&a, &b)| circle_distance(a, b) <= tol)
        && q1.torsion_chars == q2.torsion_chars
        && (q1.c - q2.c).abs() <= tol)
}

/// Flat line connections whose direct sum is the diagonal flat bundle with
/// the given characters.
pub fn build_flat_bundle_r(mesh: &MeshComplex, characters: &[QuantumNumbers]) -> Result<Vec<ConnectionU1>> {
    let fp = mesh.fingerprint();
    characters
        .iter()
        .enumerate()
        .map(|(i, q)| {
            if q.manifold != fp {
                return Err(Error::ManifoldMismatch(q.manifold.clone(), fp.clone()));
            }
            if !q.chern.is_zero() {
                return Err(Error::NonFlatCharacter(i));
            }
            gauge::flat_connection(mesh, &q.thetas, &q.torsion_chars)
        })
        .collect()
}

/// JSON rendering of quantum numbers with named cycles.
pub fn quantum_numbers_json(mesh: &MeshComplex, q: &QuantumNumbers) -> serde_json::Value {
    let names = &mesh.topology().cycles.free_names;
    let thetas: BTreeMap<&str, f64> = names.iter().map(String::as_str).zip(q.thetas.iter().copied()).collect();
    serde_json::json!({
        "chern": q.chern,
        "thetas": thetas,
        "torsion_chars": q.torsion_chars,
        "torsion_orders": q.torsion_orders,
        "c": q.c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{
        aharonov_bohm_connection, flat_connection, gauge_transform, monopole_connection, GaugeTransform,
    };
    use crate::mesh::catalogue;
    use rand::{Rng, SeedableRng};

    #[test]
    fn torus_card() {
        let card = enumerate_classes(&catalogue::torus(4, 4).unwrap());
        assert_eq!(card.quantum_numbers, "n ∈ Z, ϑ_1…ϑ_2 ∈ [0,1)");
        assert_eq!(card.classes.chern, "Z");
        assert_eq!(card.classes.thetas, 2);
        assert_eq!(card.pi1.as_deref(), Some("Z^2"));
    }

    #[test]
    fn projective_plane_card() {
        let card = enumerate_classes(&catalogue::projective_plane(1).unwrap());
        assert_eq!(card.quantum_numbers, "m ∈ Z_2");
        assert_eq!(card.classes.chern, "Z_2");
        assert_eq!(card.classes.torsion, vec![2]);
        assert!(card.physical_reading.contains("anyonic"));
    }

    #[test]
    fn annulus_and_sphere_cards() {
        let a = enumerate_classes(&catalogue::annulus(3, 8).unwrap());
        assert_eq!((a.quantum_numbers.as_str(), a.classes.chern.as_str()), ("ϑ ∈ [0,1)", "0"));
        let s = enumerate_classes(&catalogue::sphere(1).unwrap());
        assert_eq!((s.quantum_numbers.as_str(), s.classes.thetas), ("n ∈ Z", 0));
    }

    #[test]
    fn card_json_keys() {
        let v = serde_json::to_value(enumerate_classes(&catalogue::circle(5).unwrap())).unwrap();
        for k in ["manifold", "H1", "H2", "classes", "physical_reading"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        assert_eq!(v["classes"]["c"], "R");
    }

    #[test]
    fn annulus_period_reads_as_theta() {
        let m = catalogue::annulus(3, 8).unwrap();
        let q = classify_connection(&m, &aharonov_bohm_connection(&m, 0.25).unwrap(), 0.0).unwrap();
        assert!((q.thetas[0] - 0.25).abs() < 1e-12);
        assert!(q.chern.is_zero());
    }

    #[test]
    fn monopole_two() {
        let m = catalogue::sphere(1).unwrap();
        let q = classify_connection(&m, &monopole_connection(&m, 2).unwrap(), 0.0).unwrap();
        assert_eq!(q.chern.free, vec![2]);
        assert!(q.thetas.is_empty());
    }

    #[test]
    fn log_exact_shift_is_invisible() {
        let m = catalogue::torus(4, 5).unwrap();
        let conn = flat_connection(&m, &[0.3, 0.7], &[]).unwrap();
        // an integer flat class: periods in 2πℤ
        let lambda = flat_connection(&m, &[2.0, -1.0], &[]).unwrap();
        let q1 = classify_connection(&m, &conn, 0.1).unwrap();
        let q2 = classify_connection(&m, &conn.plus(&lambda.phases), 0.1).unwrap();
        assert!(equivalent(&q1, &q2, 1e-10).unwrap());
        assert_eq!(q1.chern, q2.chern);
    }

    #[test]
    fn gauge_invariant_for_random_gauges() {
        let m = catalogue::torus(5, 4).unwrap();
        let conn = crate::gauge::uniform_flux_connection(&m, 3)
            .unwrap()
            .plus(&flat_connection(&m, &[0.2, 0.9], &[]).unwrap().phases);
        let q = classify_connection(&m, &conn, 0.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let g = GaugeTransform { chi: (0..m.num_vertices()).map(|_| rng.gen_range(-10.0..10.0)).collect() };
            let q2 = classify_connection(&m, &gauge_transform(&m, &conn, &g), 0.0).unwrap();
            assert_eq!(q.chern, q2.chern);
            assert_eq!(q.torsion_chars, q2.torsion_chars);
            for (a, b) in q.thetas.iter().zip(&q2.thetas) {
                assert!(circle_distance(*a, *b) < 1e-10);
            }
        }
    }

    #[test]
    fn equivalence_rules() {
        let m = catalogue::circle(8).unwrap();
        let a = QuantumNumbers::flat(&m, &[0.999999999], &[], 0.0).unwrap();
        let b = QuantumNumbers::flat(&m, &[0.0], &[], 0.0).unwrap();
        assert!(equivalent(&a, &b, 1e-8).unwrap());
        let c = QuantumNumbers::flat(&m, &[0.0], &[], 0.3).unwrap();
        assert!(!equivalent(&b, &c, 1e-8).unwrap());
        let s = catalogue::sphere(0).unwrap();
        let p = classify_connection(&s, &monopole_connection(&s, 1).unwrap(), 0.0).unwrap();
        let n = classify_connection(&s, &monopole_connection(&s, -1).unwrap(), 0.0).unwrap();
        assert!(!equivalent(&p, &n, 1e-8).unwrap());
        assert!(matches!(equivalent(&p, &b, 1e-8), Err(Error::ManifoldMismatch(..))));
    }

    #[test]
    fn theta_canonical_representative() {
        assert_eq!(canonical_theta(1.0 - 1e-13), 0.0);
        assert_eq!(canonical_theta(-0.25), 0.75);
        assert!(canonical_theta(1.0 - 1e-9) > 0.99);
    }

    #[test]
    fn flat_bundles() {
        let m = catalogue::annulus(3, 8).unwrap();
        let trivial = build_flat_bundle_r(&m, &[QuantumNumbers::flat(&m, &[0.0], &[], 0.0).unwrap()]).unwrap();
        assert!(trivial[0].phases.iter().all(|&a| a == 0.0));
        let pair =
            [QuantumNumbers::flat(&m, &[0.0], &[], 0.0).unwrap(), QuantumNumbers::flat(&m, &[0.5], &[], 0.0).unwrap()];
        let lines = build_flat_bundle_r(&m, &pair).unwrap();
        let loop_ = &m.topology().cycles.free[0];
        let h: Vec<_> = lines.iter().map(|l| crate::gauge::holonomy(&m, l, loop_).unwrap()).collect();
        assert!((h[0].re - 1.0).abs() < 1e-12 && (h[1].re + 1.0).abs() < 1e-12);

        let rp2 = catalogue::projective_plane(1).unwrap();
        let chars =
            [QuantumNumbers::flat(&rp2, &[], &[0], 0.0).unwrap(), QuantumNumbers::flat(&rp2, &[], &[1], 0.0).unwrap()];
        let lines = build_flat_bundle_r(&rp2, &chars).unwrap();
        let (gamma, _) = &rp2.topology().cycles.torsion[0];
        let signs: Vec<f64> = lines.iter().map(|l| crate::gauge::holonomy(&rp2, l, gamma).unwrap().re).collect();
        assert!((signs[0] - 1.0).abs() < 1e-10 && (signs[1] + 1.0).abs() < 1e-10);
        for (l, q) in lines.iter().zip(&chars) {
            assert_eq!(classify_connection(&rp2, l, 0.0).unwrap().torsion_chars, q.torsion_chars);
        }

        let s = catalogue::sphere(0).unwrap();
        let q = classify_connection(&s, &monopole_connection(&s, 1).unwrap(), 0.0).unwrap();
        assert!(matches!(build_flat_bundle_r(&s, &[q]), Err(Error::NonFlatCharacter(0))));
    }
}
