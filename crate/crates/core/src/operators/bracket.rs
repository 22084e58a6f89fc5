//! Ambient reconstruction of edge fields and the discrete Lie bracket.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::error::{Error, Result};
use crate::mesh::{geometry, MeshComplex, Point, VectorField};

fn coordinates(mesh: &MeshComplex) -> Result<&[Point]> {
    match mesh.positions() {
        Some(p) if mesh.embedding().has_geometry() => Ok(p),
        _ => Err(Error::InvalidArgument("operation needs embedding coordinates".into())),
    }
}

/// Minimum-norm least-squares solution of Σ (V·d_k − x_k)².
fn fit_vector(rows: &[(Point, f64)]) -> Point {
    let mut ata = Matrix3::<f64>::zeros();
    let mut atb = Vector3::<f64>::zeros();
    for &(d, x) in rows {
        let d = Vector3::from(d);
        ata += d * d.transpose();
        atb += d * x;
    }
    let eig = SymmetricEigen::new(ata);
    let cutoff = 1e-10 * eig.eigenvalues.amax();
    let mut v = Vector3::zeros();
    for k in 0..3 {
        let lam = eig.eigenvalues[k];
        if lam > cutoff {
            let u = eig.eigenvectors.column(k);
            v += u * (u.dot(&atb) / lam);
        }
    }
    [v[0], v[1], v[2]]
}

/// Ambient vector at each vertex whose edge integrals best match X.
pub fn vertex_vectors(mesh: &MeshComplex, x: &VectorField) -> Result<Vec<Point>> {
    let pos = coordinates(mesh)?;
    let emb = mesh.embedding();
    Ok((0..mesh.num_vertices())
        .map(|v| {
            let rows: Vec<(Point, f64)> =
                mesh.incidence(v).iter().map(|inc| (emb.delta(pos[v], pos[inc.other]), x.along(inc.dir))).collect();
            fit_vector(&rows)
        })
        .collect())
}

/// Corner positions of a face lifted next to its first corner.
pub(crate) fn lifted_corners(mesh: &MeshComplex, f: usize) -> Result<(Vec<usize>, Vec<Point>)> {
    let pos = coordinates(mesh)?;
    let emb = mesh.embedding();
    let cs = mesh.face_vertices(f);
    let base = pos[cs[0]];
    let mut pts = Vec::with_capacity(cs.len());
    let mut prev = base;
    for &c in &cs {
        // lift step by step so that the polygon stays connected
        let q = emb.lift(prev, pos[c]);
        pts.push(q);
        prev = q;
    }
    Ok((cs, pts))
}

/// Unit normal of a polygon in loop order (Newell's method).
pub(crate) fn polygon_normal(pts: &[Point]) -> Point {
    let mut n = [0.0; 3];
    for k in 0..pts.len() {
        let a = pts[k];
        let b = pts[(k + 1) % pts.len()];
        n[0] += (a[1] - b[1]) * (a[2] + b[2]);
        n[1] += (a[2] - b[2]) * (a[0] + b[0]);
        n[2] += (a[0] - b[0]) * (a[1] + b[1]);
    }
    let l = geometry::norm(n);
    [n[0] / l, n[1] / l, n[2] / l]
}

fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// Solves Lφ = r for the weighted graph Laplacian
/// (Lφ)_v = (1/μ_v) Σ w_e (φ_v − φ_other) by conjugate gradients in the
/// μ-inner product; r must have zero μ-mean on every component.
fn solve_laplacian(mesh: &MeshComplex, r: &[f64]) -> Vec<f64> {
    let (w, mu) = (mesh.weights(), mesh.measure());
    let apply = |x: &[f64]| -> Vec<f64> {
        (0..mesh.num_vertices())
            .map(|v| mesh.incidence(v).iter().map(|inc| w[inc.dir.edge] * (x[v] - x[inc.other])).sum::<f64>() / mu[v])
            .collect()
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).zip(mu).map(|((x, y), m)| x * y * m).sum::<f64>();
    let n = mesh.num_vertices();
    let mut x = vec![0.0; n];
    let mut res = r.to_vec();
    // the range of L is the μ-orthogonal complement of the locally constant functions
    let mut comp = vec![usize::MAX; n];
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let mut stack = vec![s];
        let mut members = Vec::new();
        comp[s] = s;
        while let Some(v) = stack.pop() {
            members.push(v);
            for inc in mesh.incidence(v) {
                if comp[inc.other] == usize::MAX {
                    comp[inc.other] = s;
                    stack.push(inc.other);
                }
            }
        }
        let total: f64 = members.iter().map(|&v| mu[v]).sum();
        let mean = members.iter().map(|&v| res[v] * mu[v]).sum::<f64>() / total;
        for &v in &members {
            res[v] -= mean;
        }
    }
    let mut p = res.clone();
    let mut rr = dot(&res, &res);
    let stop = 1e-30 * rr.max(1e-300);
    for _ in 0..(10 * n + 100) {
        if rr <= stop {
            break;
        }
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            res[i] -= alpha * ap[i];
        }
        let rr_new = dot(&res, &res);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = res[i] + beta * p[i];
        }
    }
    x
}

/// Discrete bracket [X,Y] = (X·∇)Y − (Y·∇)X from per-face affine fits of the
/// reconstructed vertex vectors, integrated along each edge and averaged
/// over the faces containing it. A gradient correction then enforces
/// div[X,Y] = X(div Y) − Y(div X) with the derivative stencil of the
/// operators module, so that the c terms of the curvature cancel.
pub fn lie_bracket(mesh: &MeshComplex, x: &VectorField, y: &VectorField) -> Result<VectorField> {
    if mesh.num_faces() == 0 {
        return Err(Error::InvalidArgument("the discrete bracket needs a 2-complex".into()));
    }
    let pos = coordinates(mesh)?;
    let emb = mesh.embedding();
    let xv = vertex_vectors(mesh, x)?;
    let yv = vertex_vectors(mesh, y)?;
    let mut face_bracket = Vec::with_capacity(mesh.num_faces());
    for f in 0..mesh.num_faces() {
        let (cs, pts) = lifted_corners(mesh, f)?;
        let k = cs.len() as f64;
        let n = polygon_normal(&pts);
        let t1 = {
            let d = sub(pts[1], pts[0]);
            let dn = geometry::dot(d, n);
            let t = [d[0] - dn * n[0], d[1] - dn * n[1], d[2] - dn * n[2]];
            let l = geometry::norm(t);
            [t[0] / l, t[1] / l, t[2] / l]
        };
        let t2 = geometry::cross(n, t1);
        let mut centre = [0.0; 3];
        for p in &pts {
            for i in 0..3 {
                centre[i] += p[i] / k;
            }
        }
        let mean = |vs: &[Point]| {
            let mut m = [0.0; 3];
            for &c in &cs {
                for i in 0..3 {
                    m[i] += vs[c][i] / k;
                }
            }
            m
        };
        let (xm, ym) = (mean(&xv), mean(&yv));
        // G = Σ s sᵀ and the gradient moments Σ ΔV sᵀ in the face frame
        let mut g = nalgebra::Matrix2::<f64>::zeros();
        let mut mx = nalgebra::Matrix3x2::<f64>::zeros();
        let mut my = nalgebra::Matrix3x2::<f64>::zeros();
        for (idx, &c) in cs.iter().enumerate() {
            let d = sub(pts[idx], centre);
            let s = nalgebra::Vector2::new(geometry::dot(d, t1), geometry::dot(d, t2));
            g += s * s.transpose();
            mx += Vector3::from(sub(xv[c], xm)) * s.transpose();
            my += Vector3::from(sub(yv[c], ym)) * s.transpose();
        }
        let ginv = g.try_inverse().ok_or_else(|| Error::InvalidMesh(format!("degenerate face {}", f + 1)))?;
        let (jx, jy) = (mx * ginv, my * ginv);
        let frame = |w: Point| nalgebra::Vector2::new(geometry::dot(w, t1), geometry::dot(w, t2));
        let b = jy * frame(xm) - jx * frame(ym);
        face_bracket.push([b[0], b[1], b[2]]);
    }
    let values = mesh
        .edges()
        .iter()
        .enumerate()
        .map(|(e, &(t, h))| {
            let d = emb.delta(pos[t], pos[h]);
            let fs = mesh.edge_faces(e);
            fs.iter().map(|&(f, _)| geometry::dot(face_bracket[f], d)).sum::<f64>() / fs.len().max(1) as f64
        })
        .collect();
    let mut b = VectorField::new(values);
    let to_c = |v: Vec<f64>| v.into_iter().map(|x| num_complex::Complex64::new(x, 0.0)).collect::<Vec<_>>();
    let xdy = super::directional_derivative(mesh, x, &to_c(mesh.divergence(y)));
    let ydx = super::directional_derivative(mesh, y, &to_c(mesh.divergence(x)));
    let target: Vec<f64> = xdy.iter().zip(&ydx).map(|(a, c)| a.re - c.re).collect();
    let rhs: Vec<f64> = mesh.divergence(&b).iter().zip(&target).map(|(d, t)| d - t).collect();
    if rhs.iter().any(|&r| r != 0.0) {
        let phi = solve_laplacian(mesh, &rhs);
        for (e, &(t, h)) in mesh.edges().iter().enumerate() {
            b.values[e] += phi[h] - phi[t];
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::catalogue;

    #[test]
    fn reconstructs_linear_fields() {
        let m = catalogue::torus(6, 6).unwrap();
        let x = VectorField::coordinate(&m, 0).unwrap();
        for v in vertex_vectors(&m, &x).unwrap() {
            assert!((v[0] - 1.0).abs() < 1e-12 && v[1].abs() < 1e-12 && v[2].abs() < 1e-12);
        }
    }

    #[test]
    fn coordinate_fields_commute() {
        let m = catalogue::torus(5, 7).unwrap();
        let x = VectorField::coordinate(&m, 0).unwrap();
        let y = VectorField::coordinate(&m, 1).unwrap();
        let b = lie_bracket(&m, &x, &y).unwrap();
        assert!(b.values.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn rotation_fields_close_under_bracket() {
        // [e_x × p, e_y × p] = −e_z × p
        let rot = |a: usize| {
            move |p: Point| {
                let mut e = [0.0; 3];
                e[a] = 1.0;
                geometry::cross(e, p)
            }
        };
        let err = |level| {
            let m = catalogue::sphere(level).unwrap();
            let jx = VectorField::from_ambient(&m, rot(0)).unwrap();
            let jy = VectorField::from_ambient(&m, rot(1)).unwrap();
            let jz = VectorField::from_ambient(&m, rot(2)).unwrap();
            let b = lie_bracket(&m, &jx, &jy).unwrap();
            let scale: f64 = jz.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
            b.values.iter().zip(&jz.values).map(|(b, z)| (b + z).abs()).fold(0.0, f64::max) / scale
        };
        let (e2, e3) = (err(2), err(3));
        assert!(e3 < 0.1, "{e3}");
        assert!(e3 < e2, "{e2} → {e3}");
    }
}
