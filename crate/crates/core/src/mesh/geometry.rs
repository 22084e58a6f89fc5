//! Embeddings and the geometric weights derived from them.
//!
//! Triangles get cotangent edge weights and barycentric vertex areas. Other
//! polygons use the centroid dual: the weight of an edge is the distance from
//! the face centroid to the edge midpoint divided by the edge length. Edges
//! that bound no face are treated as a 1-complex (weight 1/ℓ, half of ℓ to
//! each endpoint's measure).

use serde::{Deserialize, Serialize};

use super::SignedEdge;

pub type Point = [f64; 3];

/// How vertex coordinates are to be interpreted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Embedding {
    /// No usable coordinates; unit weights and measures.
    Abstract,
    /// Plain coordinates in ℝ³.
    Euclidean,
    /// Points on a circle of the given radius in the xy-plane; edge lengths are arcs.
    Ring { radius: f64 },
    /// Points on a sphere; refinement projects new vertices back onto it.
    Sphere { radius: f64 },
    /// Antipodal quotient of a sphere: a point stands for the pair ±p.
    ProjectiveSphere { radius: f64 },
    /// Coordinates (u, v, 0) with u, v periodic.
    FlatTorus { period: [f64; 2] },
    /// Coordinates (u, v, 0) with only u periodic.
    Cylinder { period: f64 },
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: Point, b: Point) -> Point {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

fn wrap(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

impl Embedding {
    pub fn has_geometry(&self) -> bool {
        !matches!(self, Embedding::Abstract)
    }

    /// Representative of `to` closest to `from` (minimum image, antipodal choice).
    pub fn lift(&self, from: Point, to: Point) -> Point {
        match *self {
            Embedding::FlatTorus { period } => {
                let mut q = to;
                for k in 0..2 {
                    q[k] -= period[k] * ((to[k] - from[k]) / period[k]).round();
                }
                q
            }
            Embedding::Cylinder { period } => {
                let mut q = to;
                q[0] -= period * ((to[0] - from[0]) / period).round();
                q
            }
            Embedding::ProjectiveSphere { .. } => {
                let neg = scale(to, -1.0);
                if norm(sub(neg, from)) < norm(sub(to, from)) {
                    neg
                } else {
                    to
                }
            }
            _ => to,
        }
    }

    /// Edge vector from `p` to the nearest representative of `q`.
    pub fn delta(&self, p: Point, q: Point) -> Point {
        sub(self.lift(p, q), p)
    }

    fn normalize(&self, p: Point) -> Point {
        match *self {
            Embedding::Ring { radius } => {
                let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
                [p[0] * radius / r, p[1] * radius / r, 0.0]
            }
            Embedding::Sphere { radius } | Embedding::ProjectiveSphere { radius } => scale(p, radius / norm(p)),
            Embedding::FlatTorus { period } => [wrap(p[0], period[0]), wrap(p[1], period[1]), p[2]],
            Embedding::Cylinder { period } => [wrap(p[0], period), p[1], p[2]],
            _ => p,
        }
    }

    pub fn midpoint(&self, p: Point, q: Point) -> Point {
        let q = self.lift(p, q);
        self.normalize(scale(add(p, q), 0.5))
    }

    pub fn center(&self, points: &[Point]) -> Point {
        let base = points[0];
        let mut acc = [0.0; 3];
        for &q in points {
            acc = add(acc, self.lift(base, q));
        }
        self.normalize(scale(acc, 1.0 / points.len() as f64))
    }

    pub fn edge_length(&self, p: Point, q: Point) -> f64 {
        let chord = norm(self.delta(p, q));
        match *self {
            Embedding::Ring { radius } => 2.0 * radius * (chord / (2.0 * radius)).min(1.0).asin(),
            _ => chord,
        }
    }
}

/// Lengths, weights and measures computed from coordinates.
pub(crate) struct Geometry {
    pub lengths: Vec<f64>,
    pub weights: Vec<f64>,
    pub measure: Vec<f64>,
}

pub(crate) fn corners(edges: &[(usize, usize)], face: &[SignedEdge]) -> Vec<usize> {
    face.iter()
        .map(|s| {
            let (t, h) = edges[s.edge];
            if s.reversed {
                h
            } else {
                t
            }
        })
        .collect()
}

/// Per-face geometric quantities: (area, contribution to each edge's weight).
fn face_terms(
    emb: &Embedding,
    pos: &[Point],
    edges: &[(usize, usize)],
    face: &[SignedEdge],
    cotangent: bool,
) -> (f64, Vec<f64>) {
    let cs = corners(edges, face);
    let base = pos[cs[0]];
    let p: Vec<Point> = cs.iter().map(|&c| emb.lift(base, pos[c])).collect();
    let k = p.len();
    if k == 3 && cotangent {
        let area = 0.5 * norm(cross(sub(p[1], p[0]), sub(p[2], p[0])));
        let mut w = vec![0.0; 3];
        for (i, wi) in w.iter_mut().enumerate() {
            // edge i runs p[i] -> p[i+1]; the opposite corner is p[i+2]
            let o = p[(i + 2) % 3];
            let a = sub(p[i], o);
            let b = sub(p[(i + 1) % 3], o);
            let cot = dot(a, b) / norm(cross(a, b));
            *wi = 0.5 * cot;
        }
        return (area, w);
    }
    let mut z = [0.0; 3];
    for &q in &p {
        z = add(z, q);
    }
    z = scale(z, 1.0 / k as f64);
    let mut area = 0.0;
    let mut w = vec![0.0; k];
    for i in 0..k {
        let a = p[i];
        let b = p[(i + 1) % k];
        area += 0.5 * norm(cross(sub(a, z), sub(b, z)));
        let mid = scale(add(a, b), 0.5);
        w[i] = norm(sub(z, mid)) / norm(sub(b, a));
    }
    (area, w)
}

pub(crate) fn compute(emb: &Embedding, pos: &[Point], edges: &[(usize, usize)], faces: &[Vec<SignedEdge>]) -> Geometry {
    let lengths: Vec<f64> = edges.iter().map(|&(t, h)| emb.edge_length(pos[t], pos[h])).collect();
    let mut in_face = vec![false; edges.len()];
    for f in faces {
        for s in f {
            in_face[s.edge] = true;
        }
    }
    let accumulate = |cotangent: bool| {
        let mut weights = vec![0.0; edges.len()];
        let mut measure = vec![0.0; pos.len()];
        for f in faces {
            let (area, w) = face_terms(emb, pos, edges, f, cotangent);
            let cs = corners(edges, f);
            for (s, wi) in f.iter().zip(&w) {
                weights[s.edge] += wi;
            }
            for &c in &cs {
                measure[c] += area / cs.len() as f64;
            }
        }
        for (e, &(t, h)) in edges.iter().enumerate() {
            if !in_face[e] {
                weights[e] = 1.0 / lengths[e];
                measure[t] += 0.5 * lengths[e];
                measure[h] += 0.5 * lengths[e];
            }
        }
        (weights, measure)
    };
    let (mut weights, mut measure) = accumulate(true);
    if weights.iter().any(|&w| !(w > 1e-12)) {
        // non-Delaunay triangles: fall back to the centroid dual everywhere
        (weights, measure) = accumulate(false);
    }
    Geometry { lengths, weights, measure }
}
