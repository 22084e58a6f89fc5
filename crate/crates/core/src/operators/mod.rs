//! Position, covariant derivative and momentum operators on sections of a
//! line bundle over a mesh, and the commutator diagnostics built from them.
//!
//! With X_e the integral of a vector field along edge e, the covariant
//! derivative is the central stencil
//!
//! ```text
//! (∇_X ψ)_v = (1/2μ_v) Σ_{e out of v} w_e X_e (e^{−i a_e} ψ_head(e) − ψ_v)
//! ```
//!
//! whose diagonal is −½ div_μ X, so ∇_X + ½ div_μ X is anti-Hermitian and
//! P(X) = −iħ(∇_X + ½ div_μ X) + ħc div_μ X is Hermitian.

pub mod bracket;
pub mod fourier;
pub mod sparse;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gauge::{self, ConnectionU1};
use crate::mesh::{geometry, MeshComplex, Point, VectorField, VertexFunction};
use crate::units::Units;

pub use bracket::{lie_bracket, vertex_vectors};
pub use fourier::{fourier_backend_circle, FourierCircle};
pub use sparse::{inner, norm, SparseOperator};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Multiplication by f. Hermitian iff f is real.
pub fn position_operator(mesh: &MeshComplex, f: &VertexFunction) -> Result<SparseOperator> {
    if f.values.len() != mesh.num_vertices() {
        return Err(Error::ShapeMismatch(format!("{} values for {} vertices", f.values.len(), mesh.num_vertices())));
    }
    Ok(SparseOperator::diagonal(mesh.measure().to_vec(), &f.values))
}

fn check_field(mesh: &MeshComplex, x: &VectorField) -> Result<()> {
    if x.values.len() != mesh.num_edges() {
        return Err(Error::ShapeMismatch(format!("{} field values for {} edges", x.values.len(), mesh.num_edges())));
    }
    Ok(())
}

pub fn covariant_derivative(mesh: &MeshComplex, conn: &ConnectionU1, x: &VectorField) -> Result<SparseOperator> {
    conn.check_mesh(mesh)?;
    check_field(mesh, x)?;
    let (w, mu) = (mesh.weights(), mesh.measure());
    let mut trips = Vec::new();
    for v in 0..mesh.num_vertices() {
        for inc in mesh.incidence(v) {
            let coef = w[inc.dir.edge] * x.along(inc.dir) / (2.0 * mu[v]);
            if coef == 0.0 {
                continue;
            }
            trips.push((v, inc.other, Complex64::from_polar(coef, -conn.along(inc.dir))));
            trips.push((v, v, real(-coef)));
        }
    }
    Ok(SparseOperator::from_triplets(mu.to_vec(), trips).flagged(false, 1))
}

/// The derivative stencil applied to a function without transport:
/// (Xf)_v = (1/2μ_v) Σ w_e X_e (f_head − f_v).
pub fn directional_derivative(mesh: &MeshComplex, x: &VectorField, f: &[Complex64]) -> Vec<Complex64> {
    let (w, mu) = (mesh.weights(), mesh.measure());
    (0..mesh.num_vertices())
        .map(|v| {
            let s: Complex64 =
                mesh.incidence(v).iter().map(|inc| (f[inc.other] - f[v]) * (w[inc.dir.edge] * x.along(inc.dir))).sum();
            s / (2.0 * mu[v])
        })
        .collect()
}

/// Type-0 momentum P(X) = (A + A†)/2 with A = −iħ∇_X + (−iħ/2 + ħc) div_μ X.
pub fn momentum_operator(
    mesh: &MeshComplex,
    conn: &ConnectionU1,
    x: &VectorField,
    c: f64,
    units: &Units,
) -> Result<SparseOperator> {
    let hbar = units.hbar;
    let nabla = covariant_derivative(mesh, conn, x)?;
    let div: Vec<Complex64> = mesh.divergence(x).into_iter().map(real).collect();
    let q = SparseOperator::diagonal(mesh.measure().to_vec(), &div);
    let a = nabla.scaled(-I * hbar).add_scaled(Complex64::new(c * hbar, -hbar / 2.0), &q)?;
    Ok(a.hermitian_part())
}

/// Momentum on a diagonal flat bundle: one block per line connection, the
/// same c in every block.
pub fn momentum_operator_block(
    mesh: &MeshComplex,
    conns: &[ConnectionU1],
    x: &VectorField,
    c: f64,
    units: &Units,
) -> Result<SparseOperator> {
    let blocks = conns.iter().map(|a| momentum_operator(mesh, a, x, c, units)).collect::<Result<Vec<_>>>()?;
    Ok(SparseOperator::direct_sum(&blocks))
}

/// Trial states for operator-norm estimates.
pub enum Probes<'a> {
    /// Analytic sections sampled at the vertices.
    Functions(Vec<&'a dyn Fn(Point) -> Complex64>),
    /// The lowest eigenvectors of the magnetic Hamiltonian (smooth in any gauge).
    LowModes(usize),
}

impl Probes<'_> {
    pub fn vectors(&self, mesh: &MeshComplex, conn: &ConnectionU1, units: &Units) -> Result<Vec<Vec<Complex64>>> {
        match self {
            Probes::Functions(fs) => fs.iter().map(|f| VertexFunction::sample(mesh, f).map(|g| g.values)).collect(),
            Probes::LowModes(k) => {
                let h = crate::spectra::magnetic_hamiltonian(mesh, conn, units)?;
                let opts = crate::spectra::EigenOptions { want_vectors: true, ..Default::default() };
                let res = crate::spectra::eigen(&h, (*k).min(mesh.num_vertices()), &opts)?;
                Ok(res.eigenvectors.unwrap_or_default())
            }
        }
    }
}

/// Norm of A restricted to the span of the probes: max ‖Aψ‖_μ / ‖ψ‖_μ over
/// ψ in the span, which does not depend on the basis chosen inside a
/// degenerate eigenspace.
pub fn probe_norm(op: &SparseOperator, probes: &[Vec<Complex64>]) -> f64 {
    let m = op.measure();
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for p in probes {
        let n0 = norm(m, p);
        if n0 == 0.0 {
            continue;
        }
        let mut q = p.clone();
        for _ in 0..2 {
            for b in &basis {
                let h = inner(m, b, &q);
                for (qi, bi) in q.iter_mut().zip(b) {
                    *qi -= h * bi;
                }
            }
        }
        let n1 = norm(m, &q);
        if n1 > 1e-10 * n0 {
            basis.push(q.into_iter().map(|z| z / n1).collect());
        }
    }
    if basis.is_empty() {
        return 0.0;
    }
    let images: Vec<Vec<Complex64>> = basis.iter().map(|b| op.apply(b)).collect();
    let k = images.len();
    let gram = nalgebra::DMatrix::from_fn(k, k, |i, j| inner(m, &images[i], &images[j]));
    gram.symmetric_eigen().eigenvalues.iter().copied().fold(0.0, f64::max).sqrt()
}

/// The operator [Q(f), P(X)] − iħ Q(Xf).
pub fn heisenberg_operator(
    mesh: &MeshComplex,
    conn: &ConnectionU1,
    f: &[f64],
    x: &VectorField,
    c: f64,
    units: &Units,
) -> Result<SparseOperator> {
    let fc: Vec<Complex64> = f.iter().map(|&v| real(v)).collect();
    let q = position_operator(mesh, &VertexFunction::complex(fc.clone()))?;
    let p = momentum_operator(mesh, conn, x, c, units)?;
    let xf = directional_derivative(mesh, x, &fc);
    let qxf = SparseOperator::diagonal(mesh.measure().to_vec(), &xf);
    SparseOperator::commutator(&q, &p)?.add_scaled(-I * units.hbar, &qxf)
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelResidual {
    pub vertices: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct HeisenbergReport {
    pub levels: Vec<LevelResidual>,
    /// log₂(r_ℓ / r_{ℓ+1}) for consecutive levels.
    pub orders: Vec<f64>,
}

impl HeisenbergReport {
    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn orders_of(r: &[f64]) -> Vec<f64> {
    r.windows(2).map(|w| if w[0] == 0.0 && w[1] == 0.0 { f64::INFINITY } else { (w[0] / w[1]).log2() }).collect()
}

/// Residual of the Heisenberg relation on a sequence of refinements, with
/// the operator norm estimated on smooth probe states.
pub fn heisenberg_residual(
    levels: &[MeshComplex],
    conn: &dyn Fn(&MeshComplex) -> Result<ConnectionU1>,
    f: &dyn Fn(Point) -> f64,
    x: &dyn Fn(&MeshComplex) -> Result<VectorField>,
    c: f64,
    units: &Units,
    probes: &Probes,
) -> Result<HeisenbergReport> {
    if levels.len() < 2 {
        return Err(Error::InvalidArgument("a convergence order needs at least 2 levels".into()));
    }
    let mut out = Vec::new();
    for mesh in levels {
        let a = conn(mesh)?;
        let fv = VertexFunction::sample(mesh, |p| real(f(p)))?.values.iter().map(|z| z.re).collect::<Vec<_>>();
        let r = heisenberg_operator(mesh, &a, &fv, &x(mesh)?, c, units)?;
        let ps = probes.vectors(mesh, &a, units)?;
        out.push(LevelResidual { vertices: mesh.num_vertices(), residual: probe_norm(&r, &ps) });
    }
    let orders = orders_of(&out.iter().map(|l| l.residual).collect::<Vec<_>>());
    Ok(HeisenbergReport { levels: out, orders })
}

/// ([P(X), P(Y)] + iħ P([X,Y])) / (−ħ²), which approximates the curvature
/// R(X,Y) = −i F(X,Y). The bracket is computed when not supplied.
pub fn curvature_from_commutators(
    mesh: &MeshComplex,
    conn: &ConnectionU1,
    x: &VectorField,
    y: &VectorField,
    bracket: Option<&VectorField>,
    c: f64,
    units: &Units,
) -> Result<SparseOperator> {
    let computed;
    let xy = match bracket {
        Some(b) => b,
        None => {
            computed = lie_bracket(mesh, x, y)?;
            &computed
        }
    };
    let px = momentum_operator(mesh, conn, x, c, units)?;
    let py = momentum_operator(mesh, conn, y, c, units)?;
    let pxy = momentum_operator(mesh, conn, xy, c, units)?;
    let hbar = units.hbar;
    let k = SparseOperator::commutator(&px, &py)?.add_scaled(I * hbar, &pxy)?;
    Ok(k.scaled(real(-1.0 / (hbar * hbar))))
}

/// Vertex samples of the field strength F(X,Y) = b (X × Y)·n, with b the
/// face flux per area, averaged over the faces around each vertex.
pub fn curvature_density(
    mesh: &MeshComplex,
    conn: &ConnectionU1,
    x: &VectorField,
    y: &VectorField,
) -> Result<Vec<f64>> {
    let xv = vertex_vectors(mesh, x)?;
    let yv = vertex_vectors(mesh, y)?;
    let curv = gauge::curvature(mesh, conn);
    let mut num = vec![0.0; mesh.num_vertices()];
    let mut area = vec![0.0; mesh.num_vertices()];
    for f in 0..mesh.num_faces() {
        let (cs, pts) = bracket::lifted_corners(mesh, f)?;
        let n = bracket::polygon_normal(&pts);
        let a = mesh.face_area(f);
        for &v in &cs {
            num[v] += curv.principal[f] * geometry::dot(geometry::cross(xv[v], yv[v]), n);
            area[v] += a;
        }
    }
    Ok(num.iter().zip(&area).map(|(n, a)| if *a > 0.0 { n / a } else { 0.0 }).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureProbe {
    /// ⟨ψ, iC ψ⟩ / ⟨ψ, ψ⟩ for the commutator curvature C.
    pub commutator: f64,
    /// ⟨ψ, F ψ⟩ / ⟨ψ, ψ⟩ for the prescribed field strength.
    pub prescribed: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureComparison {
    pub vertices: usize,
    pub probes: Vec<CurvatureProbe>,
    /// max |commutator − prescribed| over probes.
    pub max_error: f64,
    /// max |F| over vertices.
    pub scale: f64,
    /// max over probes of ‖Cψ‖/‖ψ‖.
    pub probe_norm: f64,
}

/// Compares C = curvature_from_commutators with −iF through Rayleigh quotients.
#[allow(clippy::too_many_arguments)]
pub fn compare_curvature(
    mesh: &MeshComplex,
    conn: &ConnectionU1,
    x: &VectorField,
    y: &VectorField,
    bracket: Option<&VectorField>,
    c: f64,
    units: &Units,
    probes: &Probes,
) -> Result<CurvatureComparison> {
    let cop = curvature_from_commutators(mesh, conn, x, y, bracket, c, units)?;
    let f = curvature_density(mesh, conn, x, y)?;
    let m = mesh.measure();
    let ps = probes.vectors(mesh, conn, units)?;
    let mut out = Vec::new();
    for p in &ps {
        let nn = inner(m, p, p).re;
        let cp = cop.apply(p);
        let commutator = (I * inner(m, p, &cp)).re / nn;
        let fp: Vec<Complex64> = p.iter().zip(&f).map(|(z, g)| z * g).collect();
        let prescribed = inner(m, p, &fp).re / nn;
        out.push(CurvatureProbe { commutator, prescribed });
    }
    let max_error = out.iter().map(|p| (p.commutator - p.prescribed).abs()).fold(0.0, f64::max);
    Ok(CurvatureComparison {
        vertices: mesh.num_vertices(),
        max_error,
        scale: f.iter().map(|v| v.abs()).fold(0.0, f64::max),
        probe_norm: probe_norm(&cop, &ps),
        probes: out,
    })
}
