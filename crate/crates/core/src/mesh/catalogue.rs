//! Catalogue of standard surfaces and curves.
//!
//! | name              | parameters (minimum)        | χ      |
//! |-------------------|-----------------------------|--------|
//! | circle            | n ≥ 3                       | 0      |
//! | torus             | nu ≥ 3, nv ≥ 3              | 0      |
//! | sphere            | level ≥ 0 (icosahedral)     | 2      |
//! | genus_surface     | p ≥ 1, res ≥ 3              | 2 − 2p |
//! | projective_plane  | level ≥ 0                   | 1      |
//! | annulus           | nr ≥ 2, nphi ≥ 3            | 0      |
//! | cylinder          | nu ≥ 3, nv ≥ 2              | 0      |

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{refine, Embedding, MeshComplex, MeshData, NamedCycle, Point, SignedEdge};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum CatalogueShape {
    Circle { n: usize },
    Torus { nu: usize, nv: usize },
    Sphere { level: usize },
    GenusSurface { p: usize, res: usize },
    ProjectivePlane { level: usize },
    Annulus { nr: usize, nphi: usize },
    Cylinder { nu: usize, nv: usize },
}

pub const NAMES: [&str; 7] = ["circle", "torus", "sphere", "genus_surface", "projective_plane", "annulus", "cylinder"];

fn param(params: &BTreeMap<String, f64>, keys: &[&str], default: usize) -> Result<usize> {
    for k in keys {
        if let Some(&v) = params.get(*k) {
            if v < 0.0 || v.fract() != 0.0 || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("parameter {k} must be a non-negative integer")));
            }
            return Ok(v as usize);
        }
    }
    Ok(default)
}

fn at_least(what: &str, value: usize, min: usize) -> Result<()> {
    if value < min {
        return Err(Error::ResolutionTooLow(format!("{what} = {value}, needs at least {min}")));
    }
    Ok(())
}

impl CatalogueShape {
    /// Resolves a catalogue name and its parameters, applying defaults.
    pub fn parse(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let name = name.to_ascii_lowercase();
        let shape = match name.as_str() {
            "circle" | "s1" => CatalogueShape::Circle { n: param(params, &["n", "N"], 32)? },
            "torus" | "t2" => {
                let n = param(params, &["n"], 8)?;
                CatalogueShape::Torus { nu: param(params, &["nu", "N_u"], n)?, nv: param(params, &["nv", "N_v"], n)? }
            }
            "sphere" | "s2" => CatalogueShape::Sphere { level: param(params, &["level", "L", "subdiv"], 2)? },
            "genus_surface" | "genus" | "k_p" => CatalogueShape::GenusSurface {
                p: param(params, &["p", "genus"], 2)?,
                res: param(params, &["res", "resolution"], 3)?,
            },
            "projective_plane" | "rp2" => {
                CatalogueShape::ProjectivePlane { level: param(params, &["level", "L", "resolution", "subdiv"], 1)? }
            }
            "annulus" | "aharonov_bohm" => CatalogueShape::Annulus {
                nr: param(params, &["nr", "N_r"], 4)?,
                nphi: param(params, &["nphi", "N_phi"], 16)?,
            },
            "cylinder" => CatalogueShape::Cylinder {
                nu: param(params, &["nu", "N_u"], 8)?,
                nv: param(params, &["nv", "N_v"], 4)?,
            },
            _ => return Err(Error::UnknownManifold(name)),
        };
        shape.validate()?;
        Ok(shape)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CatalogueShape::Circle { n } => at_least("n", n, 3),
            CatalogueShape::Torus { nu, nv } => at_least("nu", nu, 3).and(at_least("nv", nv, 3)),
            CatalogueShape::Sphere { .. } | CatalogueShape::ProjectivePlane { .. } => Ok(()),
            CatalogueShape::GenusSurface { p, res } => at_least("p", p, 1).and(at_least("res", res, 3)),
            CatalogueShape::Annulus { nr, nphi } => at_least("nr", nr, 2).and(at_least("nphi", nphi, 3)),
            CatalogueShape::Cylinder { nu, nv } => at_least("nu", nu, 3).and(at_least("nv", nv, 2)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CatalogueShape::Circle { .. } => "circle",
            CatalogueShape::Torus { .. } => "torus",
            CatalogueShape::Sphere { .. } => "sphere",
            CatalogueShape::GenusSurface { .. } => "genus_surface",
            CatalogueShape::ProjectivePlane { .. } => "projective_plane",
            CatalogueShape::Annulus { .. } => "annulus",
            CatalogueShape::Cylinder { .. } => "cylinder",
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        match *self {
            CatalogueShape::Sphere { .. } => 2,
            CatalogueShape::ProjectivePlane { .. } => 1,
            CatalogueShape::GenusSurface { p, .. } => 2 - 2 * p as i64,
            _ => 0,
        }
    }

    /// The same shape at a finer resolution, `levels` steps of 1→4 refinement.
    pub fn refined(&self, levels: usize) -> Self {
        let f = 1usize << levels;
        match *self {
            CatalogueShape::Circle { n } => CatalogueShape::Circle { n: n * f },
            CatalogueShape::Torus { nu, nv } => CatalogueShape::Torus { nu: nu * f, nv: nv * f },
            CatalogueShape::Sphere { level } => CatalogueShape::Sphere { level: level + levels },
            CatalogueShape::GenusSurface { p, res } => CatalogueShape::GenusSurface { p, res: res * f },
            CatalogueShape::ProjectivePlane { level } => CatalogueShape::ProjectivePlane { level: level + levels },
            CatalogueShape::Annulus { nr, nphi } => CatalogueShape::Annulus { nr: (nr - 1) * f + 1, nphi: nphi * f },
            CatalogueShape::Cylinder { nu, nv } => CatalogueShape::Cylinder { nu: nu * f, nv: (nv - 1) * f + 1 },
        }
    }

    pub fn build(&self) -> Result<MeshComplex> {
        self.validate()?;
        let mesh = match *self {
            CatalogueShape::Circle { n } => circle(n),
            CatalogueShape::Torus { nu, nv } => torus(nu, nv),
            CatalogueShape::Sphere { level } => sphere(level),
            CatalogueShape::GenusSurface { p, res } => genus_surface(p, res),
            CatalogueShape::ProjectivePlane { level } => projective_plane(level),
            CatalogueShape::Annulus { nr, nphi } => annulus(nr, nphi),
            CatalogueShape::Cylinder { nu, nv } => cylinder(nu, nv),
        }?;
        debug_assert_eq!(mesh.euler_characteristic(), self.euler_characteristic());
        Ok(mesh)
    }
}

/// Builds a catalogue mesh from its name and parameters.
pub fn catalogue(name: &str, params: &BTreeMap<String, f64>) -> Result<MeshComplex> {
    CatalogueShape::parse(name, params)?.build()
}

fn params_of(pairs: &[(&str, usize)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v as f64)).collect()
}

/// Assembles a mesh from vertex polygons, creating one edge per unordered
/// vertex pair, oriented from the lower to the higher index.
pub(crate) fn from_polygons(name: &str, embedding: Embedding, positions: Vec<Point>, polys: &[Vec<usize>]) -> MeshData {
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut faces = Vec::with_capacity(polys.len());
    for poly in polys {
        let k = poly.len();
        let mut loop_ = Vec::with_capacity(k);
        for i in 0..k {
            let (a, b) = (poly[i], poly[(i + 1) % k]);
            let key = (a.min(b), a.max(b));
            let e = *index.entry(key).or_insert_with(|| {
                edges.push(key);
                edges.len() - 1
            });
            loop_.push(if a < b { SignedEdge::forward(e) } else { SignedEdge::backward(e) });
        }
        faces.push(loop_);
    }
    let mut data = MeshData::new(name, positions.len(), edges);
    data.embedding = embedding;
    data.positions = Some(positions);
    data.faces = faces;
    data
}

pub fn circle(n: usize) -> Result<MeshComplex> {
    at_least("n", n, 3)?;
    let positions = (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            [t.cos(), t.sin(), 0.0]
        })
        .collect();
    let mut d = MeshData::new("circle", n, (0..n).map(|k| (k, (k + 1) % n)).collect());
    d.embedding = Embedding::Ring { radius: 1.0 };
    d.positions = Some(positions);
    d.lengths = Some(vec![2.0 * PI / n as f64; n]);
    d.euler = Some(0);
    d.params = params_of(&[("n", n)]);
    d.cycles = vec![NamedCycle { name: "loop".into(), chain: (0..n).map(SignedEdge::forward).collect() }];
    MeshComplex::build(d)
}

/// Flat unit torus as an nu × nv grid of squares.
pub fn torus(nu: usize, nv: usize) -> Result<MeshComplex> {
    at_least("nu", nu, 3)?;
    at_least("nv", nv, 3)?;
    let vid = |i: usize, j: usize| (i % nu) + nu * (j % nv);
    let u = |i: usize, j: usize| (i % nu) + nu * (j % nv);
    let v = |i: usize, j: usize| nu * nv + (i % nu) + nu * (j % nv);
    let mut edges = vec![(0, 0); 2 * nu * nv];
    let mut positions = vec![[0.0; 3]; nu * nv];
    let mut faces = Vec::with_capacity(nu * nv);
    for j in 0..nv {
        for i in 0..nu {
            positions[vid(i, j)] = [i as f64 / nu as f64, j as f64 / nv as f64, 0.0];
            edges[u(i, j)] = (vid(i, j), vid(i + 1, j));
            edges[v(i, j)] = (vid(i, j), vid(i, j + 1));
            faces.push(vec![
                SignedEdge::forward(u(i, j)),
                SignedEdge::forward(v(i + 1, j)),
                SignedEdge::backward(u(i, j + 1)),
                SignedEdge::backward(v(i, j)),
            ]);
        }
    }
    let mut d = MeshData::new("torus", nu * nv, edges);
    d.embedding = Embedding::FlatTorus { period: [1.0, 1.0] };
    d.positions = Some(positions);
    d.faces = faces;
    d.euler = Some(0);
    d.params = params_of(&[("nu", nu), ("nv", nv)]);
    d.cycles = vec![
        NamedCycle { name: "a".into(), chain: (0..nu).map(|i| SignedEdge::forward(u(i, 0))).collect() },
        NamedCycle { name: "b".into(), chain: (0..nv).map(|j| SignedEdge::forward(v(0, j))).collect() },
    ];
    MeshComplex::build(d)
}

/// Unit cylinder: u periodic, v ∈ [0, 1] with nv rings of vertices.
pub fn cylinder(nu: usize, nv: usize) -> Result<MeshComplex> {
    at_least("nu", nu, 3)?;
    at_least("nv", nv, 2)?;
    let vid = |i: usize, j: usize| (i % nu) + nu * j;
    let nh = nu * nv;
    let u = |i: usize, j: usize| (i % nu) + nu * j;
    let v = |i: usize, j: usize| nh + (i % nu) + nu * j;
    let mut edges = vec![(0, 0); nh + nu * (nv - 1)];
    let mut positions = vec![[0.0; 3]; nh];
    let mut faces = Vec::new();
    for j in 0..nv {
        for i in 0..nu {
            positions[vid(i, j)] = [i as f64 / nu as f64, j as f64 / (nv - 1) as f64, 0.0];
            edges[u(i, j)] = (vid(i, j), vid(i + 1, j));
            if j + 1 < nv {
                edges[v(i, j)] = (vid(i, j), vid(i, j + 1));
                faces.push(vec![
                    SignedEdge::forward(u(i, j)),
                    SignedEdge::forward(v(i + 1, j)),
                    SignedEdge::backward(u(i, j + 1)),
                    SignedEdge::backward(v(i, j)),
                ]);
            }
        }
    }
    let mut d = MeshData::new("cylinder", nh, edges);
    d.embedding = Embedding::Cylinder { period: 1.0 };
    d.positions = Some(positions);
    d.faces = faces;
    d.euler = Some(0);
    d.params = params_of(&[("nu", nu), ("nv", nv)]);
    d.cycles = vec![NamedCycle { name: "a".into(), chain: (0..nu).map(|i| SignedEdge::forward(u(i, 0))).collect() }];
    MeshComplex::build(d)
}

/// Planar annulus 1 ≤ r ≤ 2 in polar quads, counter-clockwise oriented.
pub fn annulus(nr: usize, nphi: usize) -> Result<MeshComplex> {
    at_least("nr", nr, 2)?;
    at_least("nphi", nphi, 3)?;
    let vid = |i: usize, j: usize| i * nphi + (j % nphi);
    let a = |i: usize, j: usize| i * nphi + (j % nphi);
    let r = |i: usize, j: usize| nr * nphi + i * nphi + (j % nphi);
    let mut edges = vec![(0, 0); nr * nphi + (nr - 1) * nphi];
    let mut positions = vec![[0.0; 3]; nr * nphi];
    let mut faces = Vec::new();
    for i in 0..nr {
        let rad = 1.0 + i as f64 / (nr - 1) as f64;
        for j in 0..nphi {
            let t = 2.0 * PI * j as f64 / nphi as f64;
            positions[vid(i, j)] = [rad * t.cos(), rad * t.sin(), 0.0];
            edges[a(i, j)] = (vid(i, j), vid(i, j + 1));
            if i + 1 < nr {
                edges[r(i, j)] = (vid(i, j), vid(i + 1, j));
                faces.push(vec![
                    SignedEdge::forward(r(i, j)),
                    SignedEdge::forward(a(i + 1, j)),
                    SignedEdge::backward(r(i, j + 1)),
                    SignedEdge::backward(a(i, j)),
                ]);
            }
        }
    }
    let mut d = MeshData::new("annulus", nr * nphi, edges);
    d.embedding = Embedding::Euclidean;
    d.positions = Some(positions);
    d.faces = faces;
    d.euler = Some(0);
    d.params = params_of(&[("nr", nr), ("nphi", nphi)]);
    d.cycles =
        vec![NamedCycle { name: "inner".into(), chain: (0..nphi).map(|j| SignedEdge::forward(a(0, j))).collect() }];
    MeshComplex::build(d)
}

fn icosahedron_polygons() -> (Vec<Point>, Vec<Vec<usize>>) {
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, g, 0.0],
        [1.0, g, 0.0],
        [-1.0, -g, 0.0],
        [1.0, -g, 0.0],
        [0.0, -1.0, g],
        [0.0, 1.0, g],
        [0.0, -1.0, -g],
        [0.0, 1.0, -g],
        [g, 0.0, -1.0],
        [g, 0.0, 1.0],
        [-g, 0.0, -1.0],
        [-g, 0.0, 1.0],
    ];
    let s = (1.0 + g * g).sqrt();
    let pos: Vec<Point> = raw.iter().map(|p| [p[0] / s, p[1] / s, p[2] / s]).collect();
    let tris: [[usize; 3]; 20] = [
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let polys = tris
        .iter()
        .map(|t| {
            let (a, b, c) = (pos[t[0]], pos[t[1]], pos[t[2]]);
            let n = super::geometry::cross(
                [b[0] - a[0], b[1] - a[1], b[2] - a[2]],
                [c[0] - a[0], c[1] - a[1], c[2] - a[2]],
            );
            if super::geometry::dot(n, a) > 0.0 {
                t.to_vec()
            } else {
                vec![t[0], t[2], t[1]]
            }
        })
        .collect();
    (pos, polys)
}

/// Unit sphere: icosahedron refined `level` times with projection to the sphere.
pub fn sphere(level: usize) -> Result<MeshComplex> {
    let (pos, polys) = icosahedron_polygons();
    let mut d = from_polygons("sphere", Embedding::Sphere { radius: 1.0 }, pos, &polys);
    d.euler = Some(2);
    let mut mesh = MeshComplex::build(d)?;
    for _ in 0..level {
        mesh = refine::refine(&mesh)?;
    }
    let mut d = mesh.data();
    d.params = params_of(&[("level", level)]);
    MeshComplex::build(d)
}

/// Antipodal quotient of the icosahedral sphere at the given level.
pub fn projective_plane(level: usize) -> Result<MeshComplex> {
    let s = sphere(level)?;
    let pos = s.positions().expect("sphere has coordinates");
    let key = |p: &Point| -> [i64; 3] { [0, 1, 2].map(|k| (p[k] * 1e9).round() as i64) };
    let lookup: HashMap<[i64; 3], usize> = pos.iter().enumerate().map(|(i, p)| (key(p), i)).collect();
    let mut class = vec![usize::MAX; pos.len()];
    let mut reps = Vec::new();
    for i in 0..pos.len() {
        if class[i] != usize::MAX {
            continue;
        }
        let neg = [-pos[i][0], -pos[i][1], -pos[i][2]];
        let j = *lookup
            .get(&key(&neg))
            .ok_or_else(|| Error::InvalidMesh("sphere mesh is not antipodally symmetric".into()))?;
        class[i] = reps.len();
        class[j] = reps.len();
        reps.push(pos[i]);
    }
    let mut seen = std::collections::HashSet::new();
    let mut polys = Vec::new();
    for f in 0..s.num_faces() {
        let poly: Vec<usize> = s.face_vertices(f).iter().map(|&v| class[v]).collect();
        let mut sorted = poly.clone();
        sorted.sort_unstable();
        if seen.insert(sorted) {
            polys.push(poly);
        }
    }
    let mut d = from_polygons("projective_plane", Embedding::ProjectiveSphere { radius: 1.0 }, reps, &polys);
    d.euler = Some(1);
    d.params = params_of(&[("level", level)]);
    MeshComplex::build(d)
}

/// Closed orientable surface of genus p from the 4p-gon with word
/// a₁b₁a₁⁻¹b₁⁻¹⋯, each side cut into `res` segments, an inner ring of quads
/// and a central cone of triangles.
pub fn genus_surface(p: usize, res: usize) -> Result<MeshComplex> {
    at_least("p", p, 1)?;
    at_least("res", res, 3)?;
    let sides = 4 * p;
    let nring = sides * res;
    let nb = 1 + 2 * p * (res - 1);
    let center = nb + nring;
    // vertex class of parameter t ∈ [0, res] along generator g
    let gen_vertex = |g: usize, t: usize| if t == 0 || t == res { 0 } else { 1 + g * (res - 1) + (t - 1) };
    // generator and direction of polygon side s
    let side = |s: usize| {
        let h = s / 4;
        match s % 4 {
            0 => (2 * h, true),
            1 => (2 * h + 1, true),
            2 => (2 * h, false),
            _ => (2 * h + 1, false),
        }
    };
    let bclass = |k: usize| {
        let k = k % nring;
        let (g, fwd) = side(k / res);
        let t = k % res;
        gen_vertex(g, if fwd { t } else { res - t })
    };
    let seg = |k: usize| {
        let (g, fwd) = side(k / res);
        let t = k % res;
        if fwd {
            SignedEdge::forward(g * res + t)
        } else {
            SignedEdge::backward(g * res + (res - t - 1))
        }
    };
    let nbe = 2 * p * res;
    let radial = |k: usize| nbe + (k % nring);
    let ring = |k: usize| nbe + nring + (k % nring);
    let cone = |k: usize| nbe + 2 * nring + (k % nring);

    let mut edges = Vec::with_capacity(nbe + 3 * nring);
    for g in 0..2 * p {
        for t in 0..res {
            edges.push((gen_vertex(g, t), gen_vertex(g, t + 1)));
        }
    }
    for k in 0..nring {
        edges.push((bclass(k), nb + k));
    }
    for k in 0..nring {
        edges.push((nb + k, nb + (k + 1) % nring));
    }
    for k in 0..nring {
        edges.push((nb + k, center));
    }
    let mut faces = Vec::with_capacity(2 * nring);
    for k in 0..nring {
        faces.push(vec![
            seg(k),
            SignedEdge::forward(radial(k + 1)),
            SignedEdge::backward(ring(k)),
            SignedEdge::backward(radial(k)),
        ]);
    }
    for k in 0..nring {
        faces.push(vec![SignedEdge::forward(ring(k)), SignedEdge::forward(cone(k + 1)), SignedEdge::backward(cone(k))]);
    }
    let mut d = MeshData::new("genus_surface", center + 1, edges);
    d.faces = faces;
    d.euler = Some(2 - 2 * p as i64);
    d.params = params_of(&[("p", p), ("res", res)]);
    for h in 0..p {
        for (name, g) in [("a", 2 * h), ("b", 2 * h + 1)] {
            d.cycles.push(NamedCycle {
                name: format!("{name}{}", h + 1),
                chain: (0..res).map(|t| SignedEdge::forward(g * res + t)).collect(),
            });
        }
    }
    MeshComplex::build(d)
}
