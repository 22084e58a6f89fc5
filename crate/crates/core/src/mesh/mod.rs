//! Weighted oriented cell complexes.
//!
//! A [`MeshComplex`] stores vertices, oriented edges and faces whose boundary
//! is a closed loop of signed edges, together with the positive edge weights
//! w_e and vertex measures μ_v that define the discrete inner products
//!
//! ⟨ψ, φ⟩ = Σ_v μ_v conj(ψ_v) φ_v,   ⟨X, Y⟩ = Σ_e w_e X_e Y_e.
//!
//! Vector fields are 1-cochains: X_e is the integral of X along the edge.

pub mod catalogue;
pub mod geometry;
pub mod io;
pub mod refine;

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homology::Topology;

pub use catalogue::CatalogueShape;
pub use geometry::{Embedding, Point};

/// An edge traversed forwards or backwards.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SignedEdge {
    pub edge: usize,
    pub reversed: bool,
}

impl SignedEdge {
    pub fn forward(edge: usize) -> Self {
        SignedEdge { edge, reversed: false }
    }

    pub fn backward(edge: usize) -> Self {
        SignedEdge { edge, reversed: true }
    }

    pub fn new(edge: usize, sign: i64) -> Self {
        SignedEdge { edge, reversed: sign < 0 }
    }

    pub fn sign(&self) -> i64 {
        if self.reversed {
            -1
        } else {
            1
        }
    }

    pub fn reverse(self) -> Self {
        SignedEdge { edge: self.edge, reversed: !self.reversed }
    }
}

/// A named integer 1-cycle, e.g. a meridian of the torus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamedCycle {
    pub name: String,
    pub chain: Vec<SignedEdge>,
}

/// Outgoing view of an edge from one of its endpoints.
#[derive(Clone, Copy, Debug)]
pub struct Incidence {
    pub dir: SignedEdge,
    pub other: usize,
}

/// Everything needed to assemble a mesh. Missing geometry is computed from
/// positions and the embedding, or set to 1 for abstract meshes.
#[derive(Clone, Debug)]
pub struct MeshData {
    pub name: String,
    pub embedding: Embedding,
    pub positions: Option<Vec<Point>>,
    pub num_vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub faces: Vec<Vec<SignedEdge>>,
    pub lengths: Option<Vec<f64>>,
    pub weights: Option<Vec<f64>>,
    pub measure: Option<Vec<f64>>,
    pub euler: Option<i64>,
    pub params: BTreeMap<String, f64>,
    pub cycles: Vec<NamedCycle>,
}

impl MeshData {
    pub fn new(name: impl Into<String>, num_vertices: usize, edges: Vec<(usize, usize)>) -> Self {
        MeshData {
            name: name.into(),
            embedding: Embedding::Abstract,
            positions: None,
            num_vertices,
            edges,
            faces: Vec::new(),
            lengths: None,
            weights: None,
            measure: None,
            euler: None,
            params: BTreeMap::new(),
            cycles: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MeshComplex {
    name: String,
    embedding: Embedding,
    positions: Option<Vec<Point>>,
    edges: Vec<(usize, usize)>,
    faces: Vec<Vec<SignedEdge>>,
    lengths: Vec<f64>,
    weights: Vec<f64>,
    measure: Vec<f64>,
    params: BTreeMap<String, f64>,
    cycles: Vec<NamedCycle>,
    incidence: Vec<Vec<Incidence>>,
    edge_faces: Vec<Vec<(usize, i64)>>,
    orientable: bool,
    coherent: bool,
    has_boundary: bool,
    topology: OnceLock<Arc<Topology>>,
}

fn check_positive(what: &str, xs: &[f64]) -> Result<()> {
    for (i, &x) in xs.iter().enumerate() {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::NonPositiveWeight(format!("{what} {} = {x}", i + 1)));
        }
    }
    Ok(())
}

impl MeshComplex {
    pub fn build(data: MeshData) -> Result<Self> {
        let nv = data.num_vertices;
        let ne = data.edges.len();
        for (e, &(t, h)) in data.edges.iter().enumerate() {
            for v in [t, h] {
                if v >= nv {
                    return Err(Error::DanglingEdge { edge: e as i64 + 1, vertex: v as i64 + 1 });
                }
            }
        }
        if let Some(p) = &data.positions {
            if p.len() != nv {
                return Err(Error::InvalidMesh(format!("{} positions for {nv} vertices", p.len())));
            }
        }
        for (fi, face) in data.faces.iter().enumerate() {
            let fid = fi as i64 + 1;
            if face.is_empty() {
                return Err(Error::NonClosingFace { face: fid, detail: "empty boundary".into() });
            }
            let ends: Vec<(usize, usize)> = face
                .iter()
                .map(|s| {
                    if s.edge >= ne {
                        return Err(Error::NonClosingFace {
                            face: fid,
                            detail: format!("unknown edge {}", s.edge + 1),
                        });
                    }
                    let (t, h) = data.edges[s.edge];
                    Ok(if s.reversed { (h, t) } else { (t, h) })
                })
                .collect::<Result<_>>()?;
            for k in 0..ends.len() {
                let next = ends[(k + 1) % ends.len()];
                if ends[k].1 != next.0 {
                    return Err(Error::NonClosingFace {
                        face: fid,
                        detail: format!("edge {} does not meet the next edge", face[k].edge + 1),
                    });
                }
            }
        }

        let computed = match (&data.positions, data.embedding.has_geometry()) {
            (Some(pos), true) => Some(geometry::compute(&data.embedding, pos, &data.edges, &data.faces)),
            _ => None,
        };
        let lengths = data
            .lengths
            .clone()
            .or_else(|| computed.as_ref().map(|g| g.lengths.clone()))
            .unwrap_or_else(|| vec![1.0; ne]);
        let weights = data
            .weights
            .clone()
            .or_else(|| computed.as_ref().map(|g| g.weights.clone()))
            .unwrap_or_else(|| vec![1.0; ne]);
        let measure = data
            .measure
            .clone()
            .or_else(|| computed.as_ref().map(|g| g.measure.clone()))
            .unwrap_or_else(|| vec![1.0; nv]);
        if lengths.len() != ne || weights.len() != ne || measure.len() != nv {
            return Err(Error::InvalidMesh("geometry arrays have the wrong length".into()));
        }
        check_positive("length of edge", &lengths)?;
        check_positive("weight of edge", &weights)?;
        check_positive("measure of vertex", &measure)?;

        let mut incidence = vec![Vec::new(); nv];
        for (e, &(t, h)) in data.edges.iter().enumerate() {
            incidence[t].push(Incidence { dir: SignedEdge::forward(e), other: h });
            incidence[h].push(Incidence { dir: SignedEdge::backward(e), other: t });
        }
        let mut edge_faces = vec![Vec::new(); ne];
        for (f, face) in data.faces.iter().enumerate() {
            for s in face {
                edge_faces[s.edge].push((f, s.sign()));
            }
        }
        let (orientable, coherent) = orientation(&data.faces, &edge_faces);
        let has_boundary = if data.faces.is_empty() {
            incidence.iter().any(|inc| inc.len() == 1)
        } else {
            edge_faces.iter().any(|fs| fs.len() == 1)
        };

        let mesh = MeshComplex {
            name: data.name,
            embedding: data.embedding,
            positions: data.positions,
            edges: data.edges,
            faces: data.faces,
            lengths,
            weights,
            measure,
            params: data.params,
            cycles: data.cycles,
            incidence,
            edge_faces,
            orientable,
            coherent,
            has_boundary,
            topology: OnceLock::new(),
        };
        if let Some(chi) = data.euler {
            if mesh.euler_characteristic() != chi {
                return Err(Error::InvalidMesh(format!(
                    "declared Euler characteristic {chi} but V - E + F = {}",
                    mesh.euler_characteristic()
                )));
            }
        }
        for c in &mesh.cycles {
            mesh.check_cycle(&c.chain)?;
        }
        Ok(mesh)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn embedding(&self) -> Embedding {
        self.embedding
    }

    pub fn positions(&self) -> Option<&[Point]> {
        self.positions.as_deref()
    }

    pub fn num_vertices(&self) -> usize {
        self.measure.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn dimension(&self) -> usize {
        if self.faces.is_empty() {
            1
        } else {
            2
        }
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn faces(&self) -> &[Vec<SignedEdge>] {
        &self.faces
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn canonical_cycles(&self) -> &[NamedCycle] {
        &self.cycles
    }

    pub fn incidence(&self, v: usize) -> &[Incidence] {
        &self.incidence[v]
    }

    /// Faces containing edge `e`, with the sign of `e` in each face loop.
    pub fn edge_faces(&self, e: usize) -> &[(usize, i64)] {
        &self.edge_faces[e]
    }

    pub fn is_orientable(&self) -> bool {
        self.orientable
    }

    /// True when every interior edge is traversed oppositely by its two faces.
    pub fn is_coherently_oriented(&self) -> bool {
        self.coherent
    }

    pub fn has_boundary(&self) -> bool {
        self.has_boundary
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_faces() as i64
    }

    pub fn total_measure(&self) -> f64 {
        self.measure.iter().sum()
    }

    pub fn tail(&self, s: SignedEdge) -> usize {
        let (t, h) = self.edges[s.edge];
        if s.reversed {
            h
        } else {
            t
        }
    }

    pub fn head(&self, s: SignedEdge) -> usize {
        self.tail(s.reverse())
    }

    pub fn face_vertices(&self, f: usize) -> Vec<usize> {
        geometry::corners(&self.edges, &self.faces[f])
    }

    /// Area of a face from the embedding; 1 for abstract meshes.
    pub fn face_area(&self, f: usize) -> f64 {
        let pos = match (&self.positions, self.embedding.has_geometry()) {
            (Some(p), true) => p,
            _ => return 1.0,
        };
        let cs = self.face_vertices(f);
        let pts: Vec<Point> = cs.iter().map(|&c| pos[c]).collect();
        let z = self.embedding.center(&pts);
        let mut area = 0.0;
        for k in 0..pts.len() {
            let a = self.embedding.delta(z, pts[k]);
            let b = self.embedding.delta(z, pts[(k + 1) % pts.len()]);
            area += 0.5 * geometry::norm(geometry::cross(a, b));
        }
        area
    }

    /// Midpoint of an edge in the embedding.
    pub fn edge_midpoint(&self, e: usize) -> Option<Point> {
        let pos = self.positions.as_ref()?;
        let (t, h) = self.edges[e];
        Some(self.embedding.midpoint(pos[t], pos[h]))
    }

    /// Coefficient vector (one entry per edge) of an integer chain.
    pub fn chain_vector(&self, chain: &[SignedEdge]) -> Vec<i64> {
        let mut c = vec![0i64; self.num_edges()];
        for s in chain {
            c[s.edge] += s.sign();
        }
        c
    }

    /// Verifies that an integer chain has zero boundary.
    pub fn check_cycle(&self, chain: &[SignedEdge]) -> Result<()> {
        let mut b = vec![0i64; self.num_vertices()];
        for s in chain {
            if s.edge >= self.num_edges() {
                return Err(Error::NotACycle);
            }
            b[self.head(*s)] += 1;
            b[self.tail(*s)] -= 1;
        }
        if b.iter().any(|&x| x != 0) {
            return Err(Error::NotACycle);
        }
        Ok(())
    }

    /// Discrete divergence (div_μ X)_v = (1/μ_v) Σ_{e out of v} w_e X_e.
    /// Sums at the level of rounding error of their terms are reported as 0.
    pub fn divergence(&self, x: &VectorField) -> Vec<f64> {
        (0..self.num_vertices())
            .map(|v| {
                let (mut s, mut scale) = (0.0, 0.0);
                for inc in &self.incidence[v] {
                    let t = self.weights[inc.dir.edge] * x.along(inc.dir);
                    s += t;
                    scale += t.abs();
                }
                if s.abs() <= 64.0 * f64::EPSILON * scale {
                    0.0
                } else {
                    s / self.measure[v]
                }
            })
            .collect()
    }

    /// Cached homological data.
    pub fn topology(&self) -> &Topology {
        self.topology.get_or_init(|| Arc::new(Topology::compute(self)))
    }

    /// Stable fingerprint of the combinatorics, used to tie connections to meshes.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update((self.num_vertices() as u64).to_le_bytes());
        for &(t, hd) in &self.edges {
            h.update((t as u64).to_le_bytes());
            h.update((hd as u64).to_le_bytes());
        }
        for f in &self.faces {
            h.update([0xff]);
            for s in f {
                h.update((s.edge as u64 * 2 + s.reversed as u64).to_le_bytes());
            }
        }
        let d = h.finalize();
        let hex: String = d.iter().take(8).map(|b| format!("{b:02x}")).collect();
        format!("sha256:{hex}")
    }

    pub(crate) fn data(&self) -> MeshData {
        MeshData {
            name: self.name.clone(),
            embedding: self.embedding,
            positions: self.positions.clone(),
            num_vertices: self.num_vertices(),
            edges: self.edges.clone(),
            faces: self.faces.clone(),
            lengths: Some(self.lengths.clone()),
            weights: Some(self.weights.clone()),
            measure: Some(self.measure.clone()),
            euler: None,
            params: self.params.clone(),
            cycles: self.cycles.clone(),
        }
    }
}

/// Returns (orientable, coherent) by propagating face orientations.
fn orientation(faces: &[Vec<SignedEdge>], edge_faces: &[Vec<(usize, i64)>]) -> (bool, bool) {
    if faces.is_empty() {
        return (true, true);
    }
    let mut coherent = true;
    for fs in edge_faces {
        match fs.len() {
            0 | 1 => {}
            2 => {
                if fs[0].1 + fs[1].1 != 0 {
                    coherent = false;
                }
            }
            _ => return (false, false),
        }
    }
    let mut adj: Vec<Vec<(usize, i64)>> = vec![Vec::new(); faces.len()];
    for fs in edge_faces {
        if fs.len() == 2 {
            let (f, s) = fs[0];
            let (g, t) = fs[1];
            // flipping g relative to f is required when s·t > 0
            let rel = -s * t;
            adj[f].push((g, rel));
            adj[g].push((f, rel));
        }
    }
    let mut o = vec![0i64; faces.len()];
    for start in 0..faces.len() {
        if o[start] != 0 {
            continue;
        }
        o[start] = 1;
        let mut stack = vec![start];
        while let Some(f) = stack.pop() {
            for &(g, rel) in &adj[f] {
                let want = o[f] * rel;
                if o[g] == 0 {
                    o[g] = want;
                    stack.push(g);
                } else if o[g] != want {
                    return (false, false);
                }
            }
        }
    }
    (true, coherent)
}

/// A discrete vector field: one real number per edge (its forward orientation).
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub values: Vec<f64>,
}

impl VectorField {
    pub fn zero(mesh: &MeshComplex) -> Self {
        VectorField { values: vec![0.0; mesh.num_edges()] }
    }

    pub fn new(values: Vec<f64>) -> Self {
        VectorField { values }
    }

    pub fn along(&self, s: SignedEdge) -> f64 {
        self.values[s.edge] * s.sign() as f64
    }

    /// Integrates an ambient field along each edge with the midpoint rule.
    pub fn from_ambient(mesh: &MeshComplex, f: impl Fn(Point) -> Point) -> Result<Self> {
        let pos = mesh.positions().ok_or_else(|| Error::InvalidArgument("mesh has no coordinates".into()))?;
        let emb = mesh.embedding();
        let values = mesh
            .edges()
            .iter()
            .map(|&(t, h)| {
                let d = emb.delta(pos[t], pos[h]);
                let m = emb.midpoint(pos[t], pos[h]);
                geometry::dot(f(m), d)
            })
            .collect();
        Ok(VectorField { values })
    }

    /// Coordinate field ∂/∂x_axis on a flat embedding: X_e = Δx_axis along e.
    pub fn coordinate(mesh: &MeshComplex, axis: usize) -> Result<Self> {
        Self::from_ambient(mesh, |_| {
            let mut v = [0.0; 3];
            v[axis] = 1.0;
            v
        })
    }

    /// Divergence-free field from a stream function s on faces:
    /// X_e = (s_left − s_right) / w_e, so that Σ_{e∋v} w_e X_e = 0.
    pub fn from_stream(mesh: &MeshComplex, s: &[f64]) -> Self {
        let values = (0..mesh.num_edges())
            .map(|e| {
                let mut acc = 0.0;
                for &(f, sign) in mesh.edge_faces(e) {
                    acc += sign as f64 * s[f];
                }
                acc / mesh.weights()[e]
            })
            .collect();
        VectorField { values }
    }

    /// Zeroes edges with both endpoints outside the support mask.
    pub fn restrict(mut self, mesh: &MeshComplex, support: &[bool]) -> Self {
        for (e, &(t, h)) in mesh.edges().iter().enumerate() {
            if !support[t] && !support[h] {
                self.values[e] = 0.0;
            }
        }
        self
    }

    pub fn scaled(&self, a: f64) -> Self {
        VectorField { values: self.values.iter().map(|x| a * x).collect() }
    }

    pub fn plus(&self, other: &VectorField) -> Self {
        VectorField { values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect() }
    }
}

/// A function on vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexFunction {
    pub values: Vec<Complex64>,
}

impl VertexFunction {
    pub fn real(values: Vec<f64>) -> Self {
        VertexFunction { values: values.into_iter().map(|x| Complex64::new(x, 0.0)).collect() }
    }

    pub fn complex(values: Vec<Complex64>) -> Self {
        VertexFunction { values }
    }

    pub fn sample(mesh: &MeshComplex, f: impl Fn(Point) -> Complex64) -> Result<Self> {
        let pos = mesh.positions().ok_or_else(|| Error::InvalidArgument("mesh has no coordinates".into()))?;
        Ok(VertexFunction { values: pos.iter().map(|&p| f(p)).collect() })
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|z| z.im == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn triangle() -> MeshData {
        let mut d = MeshData::new("tri", 3, vec![(0, 1), (1, 2), (2, 0)]);
        d.faces = vec![vec![SignedEdge::forward(0), SignedEdge::forward(1), SignedEdge::forward(2)]];
        d
    }

    #[test]
    fn rejects_open_face() {
        let mut d = triangle();
        d.faces[0][2] = SignedEdge::backward(2);
        assert!(matches!(MeshComplex::build(d), Err(Error::NonClosingFace { face: 1, .. })));
    }

    #[test]
    fn rejects_dangling_edge() {
        let d = MeshData::new("x", 2, vec![(0, 2)]);
        assert!(matches!(MeshComplex::build(d), Err(Error::DanglingEdge { edge: 1, vertex: 3 })));
    }

    #[test]
    fn rejects_nonpositive_weight() {
        let mut d = triangle();
        d.weights = Some(vec![1.0, 0.0, 1.0]);
        assert!(matches!(MeshComplex::build(d), Err(Error::NonPositiveWeight(_))));
    }

    #[test]
    fn rejects_wrong_euler_characteristic() {
        let mut d = triangle();
        d.euler = Some(2);
        assert!(MeshComplex::build(d).is_err());
    }

    #[test]
    fn single_triangle_has_boundary() {
        let m = MeshComplex::build(triangle()).unwrap();
        assert!(m.has_boundary());
        assert!(m.is_orientable());
        assert_eq!(m.euler_characteristic(), 1);
    }

    #[test]
    fn projective_plane_is_not_orientable() {
        let m = catalogue::projective_plane(0).unwrap();
        assert!(!m.is_orientable());
        assert!(!m.has_boundary());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn divergence_theorem_on_closed_meshes(
            vals in proptest::collection::vec(-3.0f64..3.0, 200),
            which in 0usize..3,
        ) {
            let mesh = match which {
                0 => catalogue::torus(5, 4).unwrap(),
                1 => catalogue::sphere(1).unwrap(),
                _ => catalogue::genus_surface(2, 3).unwrap(),
            };
            let x = VectorField::new((0..mesh.num_edges()).map(|e| vals[e % vals.len()]).collect());
            let div = mesh.divergence(&x);
            let total: f64 = div.iter().zip(mesh.measure()).map(|(d, m)| d * m).sum();
            let scale: f64 = x.values.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
            prop_assert!(total.abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn stream_fields_are_divergence_free() {
        let mesh = catalogue::sphere(1).unwrap();
        let s: Vec<f64> = (0..mesh.num_faces()).map(|f| (f as f64 * 0.37).sin()).collect();
        let x = VectorField::from_stream(&mesh, &s);
        for d in mesh.divergence(&x) {
            assert!(d.abs() < 1e-10);
        }
    }
}
