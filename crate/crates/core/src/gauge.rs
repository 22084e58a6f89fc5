//! Discrete U(1) connections.
//!
//! A connection assigns a phase a_e = (e/ħ)∫_e α to each positively oriented
//! edge; the reversed edge carries −a_e. Parallel transport from the head of
//! e back to its tail multiplies by exp(−i a_e), the holonomy of a cycle c is
//! exp(i Σ c_e a_e), and a gauge transformation χ acts by
//! a_e ↦ a_e + χ_head − χ_tail together with ψ_v ↦ exp(iχ_v) ψ_v.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{geometry, MeshComplex, Point, SignedEdge};

const TWO_PI: f64 = 2.0 * PI;

#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionU1 {
    pub phases: Vec<f64>,
    /// Fingerprint of the mesh the phases live on.
    pub mesh: String,
    /// Free-form provenance, e.g. the gauge representative chosen.
    pub metadata: BTreeMap<String, String>,
}

impl ConnectionU1 {
    pub fn new(mesh: &MeshComplex, phases: Vec<f64>) -> Result<Self> {
        if phases.len() != mesh.num_edges() {
            return Err(Error::ShapeMismatch(format!("{} phases for {} edges", phases.len(), mesh.num_edges())));
        }
        if let Some(e) = phases.iter().position(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument(format!("phase of edge {} is not finite", e + 1)));
        }
        Ok(ConnectionU1 { phases, mesh: mesh.fingerprint(), metadata: BTreeMap::new() })
    }

    pub fn trivial(mesh: &MeshComplex) -> Self {
        ConnectionU1::new(mesh, vec![0.0; mesh.num_edges()]).expect("zero phases are valid")
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn along(&self, s: SignedEdge) -> f64 {
        self.phases[s.edge] * s.sign() as f64
    }

    pub fn check_mesh(&self, mesh: &MeshComplex) -> Result<()> {
        if self.mesh != mesh.fingerprint() {
            return Err(Error::ManifoldMismatch(self.mesh.clone(), mesh.fingerprint()));
        }
        Ok(())
    }

    /// The connection shifted by a real 1-cochain λ.
    pub fn plus(&self, cochain: &[f64]) -> ConnectionU1 {
        let mut c = self.clone();
        for (a, l) in c.phases.iter_mut().zip(cochain) {
            *a += l;
        }
        c
    }

    /// Σ_e c_e a_e for an integer 1-chain.
    pub fn period(&self, chain: &[i64]) -> f64 {
        chain.iter().zip(&self.phases).map(|(&c, a)| c as f64 * a).sum()
    }
}

/// Per-vertex gauge phases χ_v.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeTransform {
    pub chi: Vec<f64>,
}

impl GaugeTransform {
    /// Multiplier exp(iχ_v) acting on wavefunctions.
    pub fn phase(&self, v: usize) -> Complex64 {
        Complex64::from_polar(1.0, self.chi[v])
    }
}

/// Principal face fluxes φ_f ∈ (−π, π] with raw face sums φ_f + 2π n_f.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureField {
    pub principal: Vec<f64>,
    pub wraps: Vec<i64>,
    /// (1/2π) Σ z_f φ_f for each generator z of H₂.
    pub totals: Vec<f64>,
}

/// Representative of x mod 2π in (−π, π].
pub fn principal_angle(x: f64) -> f64 {
    let y = x.rem_euclid(TWO_PI);
    if y > PI {
        y - TWO_PI
    } else {
        y
    }
}

/// Raw oriented sum of edge phases around face f.
pub fn face_sum(mesh: &MeshComplex, conn: &ConnectionU1, f: usize) -> f64 {
    mesh.faces()[f].iter().map(|s| conn.along(*s)).sum()
}

pub fn curvature(mesh: &MeshComplex, conn: &ConnectionU1) -> CurvatureField {
    let mut principal = Vec::with_capacity(mesh.num_faces());
    let mut wraps = Vec::with_capacity(mesh.num_faces());
    for f in 0..mesh.num_faces() {
        let s = face_sum(mesh, conn, f);
        let p = principal_angle(s);
        principal.push(p);
        wraps.push(((s - p) / TWO_PI).round() as i64);
    }
    let totals = mesh
        .topology()
        .fundamental
        .iter()
        .map(|z| z.iter().zip(&principal).map(|(&c, p)| c as f64 * p).sum::<f64>() / TWO_PI)
        .collect();
    CurvatureField { principal, wraps, totals }
}

/// Chern class in H²(M, ℤ): integers on the free part, residues on the torsion part.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChernClass {
    pub free: Vec<i64>,
    pub torsion: Vec<i64>,
}

impl ChernClass {
    pub fn is_zero(&self) -> bool {
        self.free.iter().all(|&x| x == 0) && self.torsion.iter().all(|&x| x == 0)
    }
}

pub fn chern_class(mesh: &MeshComplex, conn: &ConnectionU1) -> Result<ChernClass> {
    let curv = curvature(mesh, conn);
    let mut free = Vec::with_capacity(curv.totals.len());
    for &t in &curv.totals {
        if (t - t.round()).abs() > 1e-9 {
            return Err(Error::NonIntegralFlux(t));
        }
        free.push(t.round() as i64);
    }
    let minus_n: Vec<i64> = curv.wraps.iter().map(|n| -n).collect();
    let (_, torsion) = mesh.topology().h2_coordinates(&minus_n);
    Ok(ChernClass { free, torsion })
}

/// The Chern number of a connection on a mesh with H² ≅ ℤ.
pub fn chern_number(mesh: &MeshComplex, conn: &ConnectionU1) -> Result<i64> {
    let c = chern_class(mesh, conn)?;
    match c.free.as_slice() {
        [n] => Ok(*n),
        [] => Ok(0),
        _ => Err(Error::Topology("H₂ has more than one generator; use chern_class".into())),
    }
}

pub fn holonomy(mesh: &MeshComplex, conn: &ConnectionU1, chain: &[i64]) -> Result<Complex64> {
    if chain.len() != mesh.num_edges() {
        return Err(Error::ShapeMismatch("chain length differs from number of edges".into()));
    }
    if mesh.topology().d1.apply(chain).iter().any(|&x| x != 0) {
        return Err(Error::NotACycle);
    }
    Ok(Complex64::from_polar(1.0, conn.period(chain)))
}

pub fn is_flat(mesh: &MeshComplex, conn: &ConnectionU1, tol: f64) -> bool {
    (0..mesh.num_faces()).all(|f| principal_angle(face_sum(mesh, conn, f)).abs() <= tol)
}

pub fn gauge_transform(mesh: &MeshComplex, conn: &ConnectionU1, g: &GaugeTransform) -> ConnectionU1 {
    let mut out = conn.clone();
    for (e, &(t, h)) in mesh.edges().iter().enumerate() {
        out.phases[e] += g.chi[h] - g.chi[t];
    }
    out
}

fn near_multiple_of_two_pi(x: f64, tol: f64) -> bool {
    let k = x / TWO_PI;
    (k - k.round()).abs() * TWO_PI <= tol
}

/// True iff λ is flat and all its periods (free and torsion) lie in 2πℤ.
pub fn is_log_exact(mesh: &MeshComplex, cochain: &[f64]) -> bool {
    let tol = 1e-9;
    let faces_ok = mesh
        .faces()
        .iter()
        .all(|f| near_multiple_of_two_pi(f.iter().map(|s| cochain[s.edge] * s.sign() as f64).sum(), tol));
    let cb = &mesh.topology().cycles;
    let period = |c: &Vec<i64>| c.iter().zip(cochain).map(|(&k, x)| k as f64 * x).sum::<f64>();
    faces_ok
        && cb.free.iter().all(|c| near_multiple_of_two_pi(period(c), tol))
        && cb.torsion.iter().all(|(c, _)| near_multiple_of_two_pi(period(c), tol))
}

/// Torsion characters m_i ∈ ℤ/τ_i of a connection: with τ·γ = ∂σ,
/// τ·period(γ) = Σ σ_f (φ_f + 2π n_f), and m = Σ σ_f n_f mod τ.
pub fn torsion_characters(mesh: &MeshComplex, conn: &ConnectionU1) -> Vec<i64> {
    let curv = curvature(mesh, conn);
    let cb = &mesh.topology().cycles;
    cb.torsion
        .iter()
        .zip(&cb.bounding)
        .map(|((c, tau), sigma)| {
            let tau = *tau as f64;
            let flux: f64 = sigma.iter().zip(&curv.principal).map(|(&s, p)| s as f64 * p).sum();
            let m = ((tau * conn.period(c) - flux) / TWO_PI).round();
            m.rem_euclid(tau) as i64
        })
        .collect()
}

/// Solid angle of a geodesic polygon with corners on a sphere about the origin.
fn solid_angle(pts: &[Point]) -> f64 {
    let unit = |p: Point| {
        let n = geometry::norm(p);
        [p[0] / n, p[1] / n, p[2] / n]
    };
    let a = unit(pts[0]);
    let mut total = 0.0;
    for k in 1..pts.len() - 1 {
        let b = unit(pts[k]);
        let c = unit(pts[k + 1]);
        let num = geometry::dot(a, geometry::cross(b, c));
        let den = 1.0 + geometry::dot(a, b) + geometry::dot(b, c) + geometry::dot(c, a);
        total += 2.0 * num.atan2(den);
    }
    total.abs()
}

fn face_areas(mesh: &MeshComplex) -> Vec<f64> {
    match (mesh.embedding(), mesh.positions()) {
        (crate::mesh::Embedding::Sphere { .. }, Some(pos)) => (0..mesh.num_faces())
            .map(|f| {
                let pts: Vec<Point> = mesh.face_vertices(f).iter().map(|&v| pos[v]).collect();
                solid_angle(&pts)
            })
            .collect(),
        _ => (0..mesh.num_faces()).map(|f| mesh.face_area(f)).collect(),
    }
}

/// Connection with total flux 2πn spread over the faces in proportion to
/// their area, on a closed connected orientable surface.
pub fn uniform_flux_connection(mesh: &MeshComplex, n: i64) -> Result<ConnectionU1> {
    let topo = mesh.topology();
    if topo.cohomology2.betti == 0 {
        return Err(Error::Topology(format!("H² = {} carries no integer flux", topo.cohomology2)));
    }
    if topo.fundamental.len() != 1 || topo.h0.betti != 1 {
        return Err(Error::Topology("flux construction needs a closed connected orientable surface".into()));
    }
    let z = &topo.fundamental[0];
    let areas = face_areas(mesh);
    let total: f64 = areas.iter().sum();
    let flux: Vec<f64> = areas.iter().zip(z).map(|(a, &o)| TWO_PI * n as f64 * o as f64 * a / total).collect();
    if let Some((f, &phi)) = flux.iter().enumerate().find(|(_, p)| p.abs() >= PI) {
        return Err(Error::FluxBound { face: f + 1, flux: phi.abs() });
    }

    // dual spanning tree over faces; the root absorbs the 2πn wrap
    let nf = mesh.num_faces();
    let mut parent_edge: Vec<Option<SignedEdge>> = vec![None; nf];
    let mut seen = vec![false; nf];
    let mut order = vec![0usize];
    seen[0] = true;
    let mut head = 0;
    while head < order.len() {
        let f = order[head];
        head += 1;
        for s in &mesh.faces()[f] {
            for &(g, _) in mesh.edge_faces(s.edge) {
                if !seen[g] {
                    seen[g] = true;
                    parent_edge[g] = Some(SignedEdge::forward(s.edge));
                    order.push(g);
                }
            }
        }
    }
    let mut target = flux.clone();
    target[0] -= TWO_PI * n as f64 * z[0] as f64;
    let mut a = vec![0.0; mesh.num_edges()];
    for &f in order.iter().skip(1).rev() {
        let pe = parent_edge[f].expect("non-root face has a parent").edge;
        let mut rest = 0.0;
        let mut sign = 0.0;
        for s in &mesh.faces()[f] {
            if s.edge == pe {
                sign += s.sign() as f64;
            } else {
                rest += s.sign() as f64 * a[s.edge];
            }
        }
        a[pe] = (target[f] - rest) / sign;
    }
    Ok(ConnectionU1::new(mesh, a)?
        .with_meta("gauge", "dual spanning tree (cotree edges carry phase 0)")
        .with_meta("flux", n.to_string()))
}

/// Dirac monopole of charge n on a sphere-topology mesh.
pub fn monopole_connection(mesh: &MeshComplex, n: i64) -> Result<ConnectionU1> {
    let topo = mesh.topology();
    if topo.cohomology2.is_trivial() {
        return Err(Error::Topology("H² = 0: no monopole charge can be placed".into()));
    }
    if !(topo.h0.betti == 1 && topo.h1.is_trivial() && topo.cohomology2.betti == 1 && mesh.is_orientable()) {
        return Err(Error::Topology("monopole connection requires a sphere-topology mesh".into()));
    }
    if mesh.positions().is_none() {
        return Err(Error::Topology("monopole connection requires embedding coordinates".into()));
    }
    uniform_flux_connection(mesh, n)
}

/// Flat connection with periods 2πθ_j around the free cycles and torsion
/// holonomies exp(2πi m_i/τ_i). Phases vanish on the spanning forest.
pub fn flat_connection(mesh: &MeshComplex, thetas: &[f64], torsion_chars: &[i64]) -> Result<ConnectionU1> {
    let topo = mesh.topology();
    if thetas.len() != topo.h1.betti || torsion_chars.len() != topo.h1.torsion.len() {
        return Err(Error::ShapeMismatch(format!(
            "H₁ = {} needs {} thetas and {} torsion characters",
            topo.h1,
            topo.h1.betti,
            topo.h1.torsion.len()
        )));
    }
    let periods: Vec<f64> = thetas.iter().map(|t| TWO_PI * t).collect();
    let a = topo.flat_phases(&periods, torsion_chars);
    Ok(ConnectionU1::new(mesh, a)?.with_meta("gauge", "spanning tree (tree edges carry phase 0)"))
}

/// Flat connection with holonomy exp(2πiθ) around the first free cycle (the
/// hole) and trivial holonomy elsewhere.
pub fn aharonov_bohm_connection(mesh: &MeshComplex, theta: f64) -> Result<ConnectionU1> {
    let topo = mesh.topology();
    if topo.h1.betti == 0 {
        return Err(Error::NoCycle);
    }
    let mut thetas = vec![0.0; topo.h1.betti];
    thetas[0] = theta;
    flat_connection(mesh, &thetas, &vec![0; topo.h1.torsion.len()])
}

/// ∫ α_N along the great-circle arc from p to q, where
/// α_N = (n/2)(1 − cos ϑ) dϕ is the northern Wu–Yang potential.
pub fn wu_yang_north_integral(n: f64, p: Point, q: Point) -> f64 {
    let unit = |x: Point| {
        let r = geometry::norm(x);
        [x[0] / r, x[1] / r, x[2] / r]
    };
    let (p, q) = (unit(p), unit(q));
    let steps = 256;
    let point = |t: f64| {
        let x = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]), p[2] + t * (q[2] - p[2])];
        unit(x)
    };
    let mut total = 0.0;
    let mut prev = point(0.0);
    for k in 1..=steps {
        let cur = point(k as f64 / steps as f64);
        let phi0 = prev[1].atan2(prev[0]);
        let phi1 = cur[1].atan2(cur[0]);
        let dphi = principal_angle(phi1 - phi0);
        let zmid = 0.5 * (prev[2] + cur[2]);
        total += 0.5 * n * (1.0 - zmid) * dphi;
        prev = cur;
    }
    total
}

#[derive(Serialize, Deserialize)]
struct ConnectionFile {
    mesh: String,
    edge_phases: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    metadata: BTreeMap<String, String>,
}

pub fn connection_to_json(conn: &ConnectionU1) -> serde_json::Value {
    let file = ConnectionFile {
        mesh: conn.mesh.clone(),
        edge_phases: conn.phases.iter().enumerate().map(|(e, &a)| ((e + 1).to_string(), a)).collect(),
        metadata: conn.metadata.clone(),
    };
    serde_json::to_value(file).expect("connection serializes")
}

/// Parses a connection file against a mesh. Keys are 1-based edge ids; a
/// key −k gives the phase of edge k reversed. Missing edges carry phase 0.
pub fn parse_connection(mesh: &MeshComplex, text: &str) -> Result<ConnectionU1> {
    let file: ConnectionFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if file.mesh != mesh.name() && file.mesh != mesh.fingerprint() {
        return Err(Error::ManifoldMismatch(file.mesh, mesh.name().to_string()));
    }
    let ne = mesh.num_edges() as i64;
    let mut phases: Vec<Option<f64>> = vec![None; mesh.num_edges()];
    for (key, &val) in &file.edge_phases {
        let id: i64 = key.trim().parse().map_err(|_| Error::Parse(format!("bad edge id '{key}'")))?;
        if id == 0 || id.abs() > ne {
            return Err(Error::InvalidArgument(format!("edge id {id} not on the mesh")));
        }
        let e = (id.abs() - 1) as usize;
        let a = if id < 0 { -val } else { val };
        match phases[e] {
            Some(prev) if (prev - a).abs() > 1e-12 * (1.0 + a.abs()) => {
                return Err(Error::BrokenAntisymmetry(id.abs()))
            }
            _ => phases[e] = Some(a),
        }
    }
    let mut conn = ConnectionU1::new(mesh, phases.into_iter().map(|a| a.unwrap_or(0.0)).collect())?;
    conn.metadata = file.metadata;
    Ok(conn)
}
