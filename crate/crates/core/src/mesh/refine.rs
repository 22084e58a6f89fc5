//! Uniform 1→4 refinement of triangle and quad meshes (1→2 on curves).
//!
//! Edge e splits into edges 2e (tail → midpoint) and 2e+1 (midpoint → head).
//! Midpoint vertex of edge e gets index V + e; quad centres follow.

use super::{MeshComplex, MeshData, NamedCycle, Point, SignedEdge};
use crate::error::{Error, Result};

fn halves(s: SignedEdge) -> [SignedEdge; 2] {
    if s.reversed {
        [SignedEdge::backward(2 * s.edge + 1), SignedEdge::backward(2 * s.edge)]
    } else {
        [SignedEdge::forward(2 * s.edge), SignedEdge::forward(2 * s.edge + 1)]
    }
}

pub fn refine(mesh: &MeshComplex) -> Result<MeshComplex> {
    let nv = mesh.num_vertices();
    let ne = mesh.num_edges();
    let arity = mesh.faces().first().map(|f| f.len());
    if let Some(k) = arity {
        if mesh.faces().iter().any(|f| f.len() != k) {
            return Err(Error::MixedArity);
        }
        if k != 3 && k != 4 {
            return Err(Error::InvalidMesh(format!("cannot refine {k}-gons")));
        }
    }
    let nf = mesh.num_faces();
    let ncenters = if arity == Some(4) { nf } else { 0 };
    let total_v = nv + ne + ncenters;

    let mut edges = Vec::with_capacity(2 * ne + 4 * nf);
    for (e, &(t, h)) in mesh.edges().iter().enumerate() {
        edges.push((t, nv + e));
        edges.push((nv + e, h));
    }
    let mid = |s: SignedEdge| nv + s.edge;
    let mut faces = Vec::with_capacity(4 * nf);
    for (f, loop_) in mesh.faces().iter().enumerate() {
        let k = loop_.len();
        let first = edges.len();
        if k == 3 {
            // interior edge I_j runs from m_j to m_{j-1}
            for j in 0..3 {
                edges.push((mid(loop_[j]), mid(loop_[(j + 2) % 3])));
            }
            for j in 0..3 {
                let prev = halves(loop_[(j + 2) % 3])[1];
                let next = halves(loop_[j])[0];
                faces.push(vec![prev, next, SignedEdge::forward(first + j)]);
            }
            faces.push(vec![
                SignedEdge::backward(first + 1),
                SignedEdge::backward(first + 2),
                SignedEdge::backward(first),
            ]);
        } else {
            // spoke S_j runs from m_j to the face centre
            let c = nv + ne + f;
            for s in loop_ {
                edges.push((mid(*s), c));
            }
            for j in 0..k {
                let prev = halves(loop_[(j + k - 1) % k])[1];
                let next = halves(loop_[j])[0];
                faces.push(vec![
                    prev,
                    next,
                    SignedEdge::forward(first + j),
                    SignedEdge::backward(first + (j + k - 1) % k),
                ]);
            }
        }
    }

    let mut data = MeshData::new(mesh.name(), total_v, edges);
    data.embedding = mesh.embedding();
    data.faces = faces;
    data.params = mesh.params().clone();
    data.euler = Some(mesh.euler_characteristic());
    data.cycles = mesh
        .canonical_cycles()
        .iter()
        .map(|c| NamedCycle { name: c.name.clone(), chain: c.chain.iter().flat_map(|s| halves(*s)).collect() })
        .collect();

    let emb = mesh.embedding();
    match mesh.positions() {
        Some(pos) if emb.has_geometry() => {
            let mut p: Vec<Point> = pos.to_vec();
            for &(t, h) in mesh.edges() {
                p.push(emb.midpoint(pos[t], pos[h]));
            }
            if ncenters > 0 {
                for f in 0..nf {
                    let cs: Vec<Point> = mesh.face_vertices(f).iter().map(|&v| pos[v]).collect();
                    p.push(emb.center(&cs));
                }
            }
            data.positions = Some(p);
        }
        _ => {
            data.positions = None;
            let mut lengths: Vec<f64> = mesh.lengths().iter().flat_map(|&l| [0.5 * l, 0.5 * l]).collect();
            if nf == 0 {
                let mut measure = vec![0.0; total_v];
                for (e, &(t, h)) in data.edges.iter().enumerate() {
                    measure[t] += 0.5 * lengths[e];
                    measure[h] += 0.5 * lengths[e];
                }
                data.weights = Some(lengths.iter().map(|l| 1.0 / l).collect());
                data.measure = Some(measure);
            } else {
                let mean_len = mesh.lengths().iter().sum::<f64>() / ne as f64;
                lengths.resize(data.edges.len(), 0.5 * mean_len);
                let mean_mu = mesh.total_measure() / nv as f64;
                data.weights = Some(vec![1.0; data.edges.len()]);
                data.measure = Some(vec![0.25 * mean_mu; total_v]);
            }
            data.lengths = Some(lengths);
        }
    }
    MeshComplex::build(data)
}
