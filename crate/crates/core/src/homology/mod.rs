//! Exact integral homology of a mesh complex.
//!
//! H₀ = coker ∂₁, H₁ = ker ∂₁ / im ∂₂, H₂ = ker ∂₂ and the cohomology group
//! H² = coker ∂₂ᵀ. For H₁ the cycle space is parametrized by the edges off a
//! spanning forest, which turns the quotient into the cokernel of ∂₂
//! restricted to those edges.

pub mod cokernel;
pub mod snf;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{MeshComplex, SignedEdge};

pub use cokernel::{Presentation, SparseIntMatrix};
pub use snf::{smith_normal_form, IntegerMatrix, SmithForm};

/// ℤ^betti ⊕ ℤ/τ₁ ⊕ … with τ₁ | τ₂ | ….
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyGroup {
    pub betti: usize,
    pub torsion: Vec<u64>,
}

impl HomologyGroup {
    pub fn is_trivial(&self) -> bool {
        self.betti == 0 && self.torsion.is_empty()
    }
}

impl fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.betti {
            0 => {}
            1 => parts.push("Z".to_string()),
            b => parts.push(format!("Z^{b}")),
        }
        for t in &self.torsion {
            parts.push(format!("Z_{t}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Integer 1-cycles generating H₁.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleBasis {
    pub free: Vec<Vec<i64>>,
    pub free_names: Vec<String>,
    /// Torsion generators with their orders.
    pub torsion: Vec<(Vec<i64>, u64)>,
    /// Face chains σ with ∂₂σ = τ·c for each torsion generator c.
    pub bounding: Vec<Vec<i64>>,
}

/// Spanning forest used to parametrize cycles and gauges.
#[derive(Clone, Debug)]
pub struct SpanningForest {
    /// Edge from the parent to each vertex, `None` at roots.
    pub parent: Vec<Option<SignedEdge>>,
    pub depth: Vec<usize>,
    pub in_tree: Vec<bool>,
}

impl SpanningForest {
    pub fn build(mesh: &MeshComplex) -> Self {
        let nv = mesh.num_vertices();
        let mut parent = vec![None; nv];
        let mut depth = vec![usize::MAX; nv];
        let mut in_tree = vec![false; mesh.num_edges()];
        for root in 0..nv {
            if depth[root] != usize::MAX {
                continue;
            }
            depth[root] = 0;
            let mut queue = std::collections::VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                for inc in mesh.incidence(v) {
                    let w = inc.other;
                    if depth[w] == usize::MAX {
                        depth[w] = depth[v] + 1;
                        parent[w] = Some(inc.dir);
                        in_tree[inc.dir.edge] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
        SpanningForest { parent, depth, in_tree }
    }

    /// Adds `coef` times the tree path from `from` to `to` into `chain`.
    pub fn add_path(&self, mesh: &MeshComplex, from: usize, to: usize, coef: i64, chain: &mut [i64]) {
        let (mut a, mut b) = (from, to);
        while a != b {
            if self.depth[a] >= self.depth[b] {
                let s = self.parent[a].expect("vertices lie in different components");
                chain[s.edge] -= coef * s.sign();
                a = mesh.tail(s);
            } else {
                let s = self.parent[b].expect("vertices lie in different components");
                chain[s.edge] += coef * s.sign();
                b = mesh.tail(s);
            }
        }
    }
}

/// Boundary matrices ∂₁ (V×E, head +1, tail −1) and ∂₂ (E×F).
pub fn sparse_boundaries(mesh: &MeshComplex) -> (SparseIntMatrix, SparseIntMatrix) {
    let mut d1 = SparseIntMatrix::new(mesh.num_vertices(), mesh.num_edges());
    for (e, &(t, h)) in mesh.edges().iter().enumerate() {
        d1.add(h, e, 1);
        d1.add(t, e, -1);
    }
    let mut d2 = SparseIntMatrix::new(mesh.num_edges(), mesh.num_faces());
    for (f, face) in mesh.faces().iter().enumerate() {
        for s in face {
            d2.add(s.edge, f, s.sign());
        }
    }
    (d1, d2)
}

pub fn boundary_matrices(mesh: &MeshComplex) -> (IntegerMatrix, IntegerMatrix) {
    let (d1, d2) = sparse_boundaries(mesh);
    (d1.to_dense(), d2.to_dense())
}

/// All homological data of a mesh, computed once and cached on the mesh.
#[derive(Debug)]
pub struct Topology {
    pub h0: HomologyGroup,
    pub h1: HomologyGroup,
    pub h2: HomologyGroup,
    pub cohomology2: HomologyGroup,
    pub cycles: CycleBasis,
    pub forest: SpanningForest,
    /// Face chains spanning H₂ = ker ∂₂.
    pub fundamental: Vec<Vec<i64>>,
    pub d1: SparseIntMatrix,
    pub d2: SparseIntMatrix,
    nontree: Vec<usize>,
    nontree_index: Vec<usize>,
    h1_pres: Presentation,
    h2_pres: Presentation,
    /// Change from SNF free coordinates to canonical-cycle coordinates.
    canonical: Option<IntegerMatrix>,
}

fn kernel_of_d2(mesh: &MeshComplex, d2: &SparseIntMatrix) -> Vec<Vec<i64>> {
    let nf = mesh.num_faces();
    if nf == 0 {
        return Vec::new();
    }
    let surface_like = (0..mesh.num_edges()).all(|e| mesh.edge_faces(e).len() <= 2);
    if surface_like {
        let mut o = vec![0i64; nf];
        let mut out = Vec::new();
        for start in 0..nf {
            if o[start] != 0 {
                continue;
            }
            o[start] = 1;
            let mut comp = vec![start];
            let mut stack = vec![start];
            let mut ok = true;
            while let Some(f) = stack.pop() {
                for s in &mesh.faces()[f] {
                    let fs = mesh.edge_faces(s.edge);
                    if fs.len() < 2 {
                        ok = false;
                        continue;
                    }
                    for &(g, t) in fs {
                        // the two occurrences must cancel: o_f·s + o_g·t = 0
                        let want = -o[f] * s.sign() * t;
                        if g == f && fs.iter().filter(|x| x.0 == f).count() == 2 {
                            let (s1, s2) = (fs[0].1, fs[1].1);
                            if s1 + s2 != 0 {
                                ok = false;
                            }
                            continue;
                        }
                        if g == f {
                            continue;
                        }
                        if o[g] == 0 {
                            o[g] = want;
                            comp.push(g);
                            stack.push(g);
                        } else if o[g] != want {
                            ok = false;
                        }
                    }
                }
            }
            if ok {
                let mut z = vec![0i64; nf];
                for &f in &comp {
                    z[f] = o[f];
                }
                out.push(z);
            }
        }
        if out.iter().all(|z| d2.apply(z).iter().all(|&x| x == 0)) {
            return out;
        }
    }
    let f = smith_normal_form(&d2.to_dense());
    let rank = f.rank();
    (rank..nf).map(|j| (0..nf).map(|i| f.v.get_i64(i, j)).collect()).collect()
}

impl Topology {
    pub fn compute(mesh: &MeshComplex) -> Topology {
        let (d1, d2) = sparse_boundaries(mesh);
        let h0p = Presentation::compute(&d1, false);
        let h0 = HomologyGroup { betti: h0p.betti(), torsion: h0p.torsion() };

        let forest = SpanningForest::build(mesh);
        let nontree: Vec<usize> = (0..mesh.num_edges()).filter(|&e| !forest.in_tree[e]).collect();
        let mut nontree_index = vec![usize::MAX; mesh.num_edges()];
        for (k, &e) in nontree.iter().enumerate() {
            nontree_index[e] = k;
        }
        let h1_pres = Presentation::compute(&d2.select_rows(&nontree), true);
        let h1 = HomologyGroup { betti: h1_pres.betti(), torsion: h1_pres.torsion() };

        let fundamental = kernel_of_d2(mesh, &d2);
        let h2 = HomologyGroup { betti: fundamental.len(), torsion: Vec::new() };

        let h2_pres = Presentation::compute(&d2.transpose(), false);
        let cohomology2 = HomologyGroup { betti: h2_pres.betti(), torsion: h2_pres.torsion() };

        let mut topo = Topology {
            h0,
            h1,
            h2,
            cohomology2,
            cycles: CycleBasis { free: vec![], free_names: vec![], torsion: vec![], bounding: vec![] },
            forest,
            fundamental,
            d1,
            d2,
            nontree,
            nontree_index,
            h1_pres,
            h2_pres,
            canonical: None,
        };
        topo.cycles = topo.build_cycles(mesh);
        topo
    }

    fn lift(&self, mesh: &MeshComplex, g: &[i64]) -> Vec<i64> {
        let mut chain = vec![0i64; mesh.num_edges()];
        for (k, &c) in g.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let e = self.nontree[k];
            chain[e] += c;
            let (t, h) = mesh.edges()[e];
            self.forest.add_path(mesh, h, t, c, &mut chain);
        }
        chain
    }

    fn build_cycles(&mut self, mesh: &MeshComplex) -> CycleBasis {
        let nt = self.h1.torsion.len();
        let gens = self.h1_pres.generators();
        let mut basis = CycleBasis { free: vec![], free_names: vec![], torsion: vec![], bounding: vec![] };
        for (t, g) in gens.iter().take(nt).enumerate() {
            let tau = self.h1.torsion[t];
            basis.torsion.push((self.lift(mesh, g), tau));
            basis.bounding.push(self.h1_pres.bounding_relation(t, mesh.num_faces()).expect("relations are tracked"));
        }
        let b1 = self.h1.betti;
        let canon = mesh.canonical_cycles();
        if nt == 0 && b1 > 0 && canon.len() == b1 {
            let coords: Vec<Vec<i64>> =
                canon.iter().map(|c| self.h1_pres.coordinates(&self.restrict(&mesh.chain_vector(&c.chain)))).collect();
            // column i holds the SNF coordinates of canonical cycle i
            let cmat =
                IntegerMatrix::from_rows(&(0..b1).map(|r| coords.iter().map(|c| c[r]).collect()).collect::<Vec<_>>());
            if cmat.determinant().magnitude() == &num_bigint::BigUint::from(1u32) {
                let f = smith_normal_form(&cmat);
                self.canonical = Some(f.v.mul(&f.u));
                basis.free = canon.iter().map(|c| mesh.chain_vector(&c.chain)).collect();
                basis.free_names = canon.iter().map(|c| c.name.clone()).collect();
                return basis;
            }
        }
        for (k, g) in gens.iter().skip(nt).enumerate() {
            basis.free.push(self.lift(mesh, g));
            basis.free_names.push(format!("z{}", k + 1));
        }
        basis
    }

    fn restrict(&self, chain: &[i64]) -> Vec<i64> {
        self.nontree.iter().map(|&e| chain[e]).collect()
    }

    /// Coordinates of a 1-cycle in H₁: free part in the cycle basis, torsion
    /// part reduced modulo the orders.
    pub fn h1_coordinates(&self, chain: &[i64]) -> Result<(Vec<i64>, Vec<i64>)> {
        if chain.len() != self.nontree_index.len() {
            return Err(Error::ShapeMismatch("chain length differs from number of edges".into()));
        }
        if self.d1.apply(chain).iter().any(|&x| x != 0) {
            return Err(Error::NotACycle);
        }
        let z = self.h1_pres.coordinates(&self.restrict(chain));
        let nt = self.h1.torsion.len();
        let torsion = z[..nt].to_vec();
        let mut free = z[nt..].to_vec();
        if let Some(t) = &self.canonical {
            free = (0..free.len()).map(|i| (0..free.len()).map(|j| t.get_i64(i, j) * z[nt + j]).sum()).collect();
        }
        Ok((free, torsion))
    }

    /// Edge phases of a flat connection whose period around free cycle i is
    /// `free_periods[i]` and whose holonomy around torsion generator j is
    /// exp(2πi·m_j/τ_j). Tree edges carry phase 0.
    pub fn flat_phases(&self, free_periods: &[f64], torsion_chars: &[i64]) -> Vec<f64> {
        let nt = self.h1.torsion.len();
        assert_eq!(free_periods.len(), self.h1.betti, "one period per free cycle");
        assert_eq!(torsion_chars.len(), nt, "one character per torsion generator");
        let mut vals: Vec<f64> = torsion_chars
            .iter()
            .zip(&self.h1.torsion)
            .map(|(&m, &tau)| 2.0 * std::f64::consts::PI * m as f64 / tau as f64)
            .collect();
        let b1 = free_periods.len();
        match &self.canonical {
            Some(t) => {
                vals.extend((0..b1).map(|j| (0..b1).map(|i| t.get_i64(i, j) as f64 * free_periods[i]).sum::<f64>()))
            }
            None => vals.extend_from_slice(free_periods),
        }
        let x = self.h1_pres.functional(&vals);
        let mut a = vec![0.0; self.nontree_index.len()];
        for (k, &e) in self.nontree.iter().enumerate() {
            a[e] = x[k];
        }
        a
    }

    /// Coordinates of an integer 2-cochain in H² = coker ∂₂ᵀ (free part first,
    /// torsion part reduced modulo the orders).
    pub fn h2_coordinates(&self, cochain: &[i64]) -> (Vec<i64>, Vec<i64>) {
        let z = self.h2_pres.coordinates(cochain);
        let nt = self.cohomology2.torsion.len();
        (z[nt..].to_vec(), z[..nt].to_vec())
    }

    pub fn nontree_edges(&self) -> &[usize] {
        &self.nontree
    }
}

/// H_k(M, ℤ) for k ∈ {0, 1, 2}.
pub fn homology(mesh: &MeshComplex, k: usize) -> Result<HomologyGroup> {
    let t = mesh.topology();
    match k {
        0 => Ok(t.h0.clone()),
        1 => Ok(t.h1.clone()),
        2 => Ok(t.h2.clone()),
        _ => Err(Error::InvalidDegree(k)),
    }
}

/// H^k(M, ℤ) for k = 2 from the cochain complex; lower degrees by the
/// universal coefficient theorem.
pub fn cohomology(mesh: &MeshComplex, k: usize) -> Result<HomologyGroup> {
    let t = mesh.topology();
    match k {
        0 => Ok(HomologyGroup { betti: t.h0.betti, torsion: vec![] }),
        1 => Ok(HomologyGroup { betti: t.h1.betti, torsion: t.h0.torsion.clone() }),
        2 => Ok(t.cohomology2.clone()),
        _ => Err(Error::InvalidDegree(k)),
    }
}

pub fn cycle_basis(mesh: &MeshComplex) -> CycleBasis {
    mesh.topology().cycles.clone()
}
