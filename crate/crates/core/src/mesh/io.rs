//! JSON mesh files.
//!
//! ```json
//! {"name": "tri",
//!  "vertices": [{"id": 1, "pos": [0, 0, 0]}, ...],
//!  "edges": [{"id": 1, "tail": 1, "head": 2, "length": 1.0, "weight": 0.5}, ...],
//!  "faces": [{"id": 1, "loop": [1, 2, -3]}],
//!  "measure": {"1": 0.3, ...}}
//! ```
//!
//! A negative entry −k in a loop is edge k reversed. `length`, `weight`,
//! `measure`, `embedding`, `euler_characteristic` and `cycles` are optional.
//! A missing measure is uniform 1.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Embedding, MeshComplex, MeshData, NamedCycle, Point, SignedEdge};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct VertexRecord {
    id: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pos: Option<Point>,
}

#[derive(Serialize, Deserialize)]
struct EdgeRecord {
    id: i64,
    tail: i64,
    head: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct FaceRecord {
    id: i64,
    #[serde(rename = "loop")]
    loop_: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct CycleRecord {
    name: String,
    chain: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct MeshFile {
    #[serde(default)]
    name: String,
    vertices: Vec<VertexRecord>,
    edges: Vec<EdgeRecord>,
    #[serde(default)]
    faces: Vec<FaceRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    measure: Option<BTreeMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    embedding: Option<Embedding>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    euler_characteristic: Option<i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    cycles: Vec<CycleRecord>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    params: BTreeMap<String, f64>,
}

fn signed(edge_index: &HashMap<i64, usize>, id: i64) -> Option<SignedEdge> {
    edge_index.get(&id.abs()).map(|&e| SignedEdge::new(e, id.signum()))
}

fn export_signed(s: &SignedEdge) -> i64 {
    (s.edge as i64 + 1) * s.sign()
}

/// Parses a mesh from JSON text and validates it.
pub fn parse_mesh(text: &str) -> Result<MeshComplex> {
    let file: MeshFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let mut vindex = HashMap::new();
    for (i, v) in file.vertices.iter().enumerate() {
        if vindex.insert(v.id, i).is_some() {
            return Err(Error::Parse(format!("duplicate vertex id {}", v.id)));
        }
    }
    let mut eindex = HashMap::new();
    let mut edges = Vec::with_capacity(file.edges.len());
    for (i, e) in file.edges.iter().enumerate() {
        if e.id <= 0 {
            return Err(Error::Parse(format!("edge id {} must be positive", e.id)));
        }
        if eindex.insert(e.id, i).is_some() {
            return Err(Error::Parse(format!("duplicate edge id {}", e.id)));
        }
        let t = *vindex.get(&e.tail).ok_or(Error::DanglingEdge { edge: e.id, vertex: e.tail })?;
        let h = *vindex.get(&e.head).ok_or(Error::DanglingEdge { edge: e.id, vertex: e.head })?;
        edges.push((t, h));
    }
    let mut faces = Vec::with_capacity(file.faces.len());
    for f in &file.faces {
        let loop_ = f
            .loop_
            .iter()
            .map(|&id| {
                signed(&eindex, id)
                    .ok_or_else(|| Error::NonClosingFace { face: f.id, detail: format!("unknown edge {id}") })
            })
            .collect::<Result<Vec<_>>>()?;
        faces.push(loop_);
    }

    let all_pos = file.vertices.iter().all(|v| v.pos.is_some()) && !file.vertices.is_empty();
    let positions: Option<Vec<Point>> =
        if all_pos { Some(file.vertices.iter().map(|v| v.pos.unwrap()).collect()) } else { None };
    let embedding =
        file.embedding.unwrap_or(if positions.is_some() { Embedding::Euclidean } else { Embedding::Abstract });

    let mut data = MeshData::new(file.name.clone(), file.vertices.len(), edges);
    data.embedding = embedding;
    data.positions = positions;
    data.faces = faces;
    data.euler = file.euler_characteristic;
    data.params = file.params.clone();
    if file.edges.iter().all(|e| e.length.is_some()) {
        data.lengths = Some(file.edges.iter().map(|e| e.length.unwrap()).collect());
    } else if file.edges.iter().any(|e| e.length.is_some()) {
        return Err(Error::Parse("either all or no edges carry a length".into()));
    }
    if file.edges.iter().all(|e| e.weight.is_some()) {
        data.weights = Some(file.edges.iter().map(|e| e.weight.unwrap()).collect());
    } else if file.edges.iter().any(|e| e.weight.is_some()) {
        return Err(Error::Parse("either all or no edges carry a weight".into()));
    }
    let mut measure = vec![1.0; file.vertices.len()];
    if let Some(m) = &file.measure {
        for (k, &val) in m {
            let id: i64 = k.parse().map_err(|_| Error::Parse(format!("bad vertex id {k} in measure")))?;
            let i = *vindex.get(&id).ok_or_else(|| Error::Parse(format!("measure for unknown vertex {id}")))?;
            measure[i] = val;
        }
    }
    data.measure = Some(measure);
    for c in &file.cycles {
        let chain =
            c.chain.iter().map(|&id| signed(&eindex, id).ok_or(Error::NotACycle)).collect::<Result<Vec<_>>>()?;
        data.cycles.push(NamedCycle { name: c.name.clone(), chain });
    }
    MeshComplex::build(data).map_err(|e| match e {
        Error::NonClosingFace { face, detail } => {
            Error::NonClosingFace { face: file.faces[(face - 1) as usize].id, detail }
        }
        other => other,
    })
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<MeshComplex> {
    parse_mesh(&std::fs::read_to_string(path)?)
}

/// Serializes a mesh with 1-based ids and its full geometry.
pub fn mesh_to_json(mesh: &MeshComplex) -> serde_json::Value {
    let file = MeshFile {
        name: mesh.name().to_string(),
        vertices: (0..mesh.num_vertices())
            .map(|v| VertexRecord { id: v as i64 + 1, pos: mesh.positions().map(|p| p[v]) })
            .collect(),
        edges: mesh
            .edges()
            .iter()
            .enumerate()
            .map(|(e, &(t, h))| EdgeRecord {
                id: e as i64 + 1,
                tail: t as i64 + 1,
                head: h as i64 + 1,
                length: Some(mesh.lengths()[e]),
                weight: Some(mesh.weights()[e]),
            })
            .collect(),
        faces: mesh
            .faces()
            .iter()
            .enumerate()
            .map(|(f, l)| FaceRecord { id: f as i64 + 1, loop_: l.iter().map(export_signed).collect() })
            .collect(),
        measure: Some(mesh.measure().iter().enumerate().map(|(v, &m)| ((v + 1).to_string(), m)).collect()),
        embedding: Some(mesh.embedding()),
        euler_characteristic: Some(mesh.euler_characteristic()),
        cycles: mesh
            .canonical_cycles()
            .iter()
            .map(|c| CycleRecord { name: c.name.clone(), chain: c.chain.iter().map(export_signed).collect() })
            .collect(),
        params: mesh.params().clone(),
    };
    serde_json::to_value(file).expect("mesh serializes")
}

pub fn save_mesh(mesh: &MeshComplex, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(&mesh_to_json(mesh))?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::catalogue;

    const TRIANGLE: &str = r#"{"name":"tri",
        "vertices":[{"id":1},{"id":2},{"id":3}],
        "edges":[{"id":1,"tail":1,"head":2},{"id":2,"tail":2,"head":3},{"id":3,"tail":3,"head":1}],
        "faces":[{"id":1,"loop":[1,2,3]}]}"#;

    #[test]
    fn minimal_triangle() {
        let m = parse_mesh(TRIANGLE).unwrap();
        assert_eq!(m.euler_characteristic(), 1);
        assert_eq!(m.measure(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn non_closing_face_is_named() {
        let bad = TRIANGLE.replace("[1,2,3]", "[1,2,-3]");
        let err = parse_mesh(&bad).unwrap_err();
        assert!(err.to_string().contains("non-closing face"), "{err}");
    }

    #[test]
    fn dangling_edge_is_named() {
        let bad = TRIANGLE.replace(r#""tail":3,"head":1"#, r#""tail":3,"head":9"#);
        assert!(matches!(parse_mesh(&bad), Err(Error::DanglingEdge { edge: 3, vertex: 9 })));
    }

    #[test]
    fn roundtrip_preserves_everything() {
        let m = catalogue::torus(3, 4).unwrap();
        let text = serde_json::to_string(&mesh_to_json(&m)).unwrap();
        let back = parse_mesh(&text).unwrap();
        assert_eq!(back.edges(), m.edges());
        assert_eq!(back.faces(), m.faces());
        assert_eq!(back.weights(), m.weights());
        assert_eq!(back.measure(), m.measure());
        assert_eq!(back.canonical_cycles(), m.canonical_cycles());
        assert_eq!(back.fingerprint(), m.fingerprint());
    }

    #[test]
    fn icosahedron_file_counts() {
        let text = serde_json::to_string(&mesh_to_json(&catalogue::sphere(0).unwrap())).unwrap();
        let m = parse_mesh(&text).unwrap();
        assert_eq!((m.num_vertices(), m.num_edges(), m.num_faces(), m.euler_characteristic()), (12, 30, 20, 2));
    }
}
