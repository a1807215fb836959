//! Piecewise-linear finite element matrices on the discrete surface.

use rayon::prelude::*;

use crate::coefficients::{project_to_mesh, CoefficientField};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::SurfaceMesh;
use crate::sparse::CsrMatrix;

/// Nodal-basis matrices: `M` (mass), `T` (form of the drift operator) and
/// `K` (form of the operator whose fractional power colors the noise).
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub mass: CsrMatrix,
    pub drift: CsrMatrix,
    pub covariance: CsrMatrix,
    pub drift_field: CoefficientField,
    pub covariance_field: CoefficientField,
    pub mesh_id: String,
}

impl OperatorSet {
    pub fn assemble(mesh: &SurfaceMesh, drift: CoefficientField, covariance: CoefficientField) -> Result<Self> {
        Ok(Self {
            mass: assemble_mass(mesh)?,
            drift: assemble_form(mesh, drift)?,
            covariance: assemble_form(mesh, covariance)?,
            drift_field: drift,
            covariance_field: covariance,
            mesh_id: mesh.id(),
        })
    }

    pub fn dim(&self) -> usize {
        self.mass.nrows()
    }

    /// `M⁻¹T` and `M⁻¹K` commute (both are stiffness/mass combinations).
    pub fn is_commuting(&self) -> bool {
        self.drift_field.is_laplace_plus_mass() && self.covariance_field.is_laplace_plus_mass()
    }
}

/// Constant tangential gradients of the barycentric coordinates.
pub fn hat_gradients(points: &[Point]) -> Result<Vec<Point>> {
    match points.len() {
        2 => {
            let e = points[1] - points[0];
            let len2 = e.norm_squared();
            if !(len2 > 0.0) {
                return Err(Error::Mesh("degenerate segment".into()));
            }
            let g = e / len2;
            Ok(vec![-g, g])
        }
        3 => {
            let e1 = points[1] - points[0];
            let e2 = points[2] - points[0];
            let (a11, a12, a22) = (e1.dot(&e1), e1.dot(&e2), e2.dot(&e2));
            let det = a11 * a22 - a12 * a12;
            if !(det > 1e-300) {
                return Err(Error::Mesh("degenerate triangle".into()));
            }
            let g1 = (e1 * a22 - e2 * a12) / det;
            let g2 = (e2 * a11 - e1 * a12) / det;
            Ok(vec![-g1 - g2, g1, g2])
        }
        n => Err(Error::Mesh(format!("unsupported simplex with {n} vertices"))),
    }
}

fn local_mass(measure: f64, nv: usize) -> Vec<f64> {
    // exact P1 mass: |τ|/((d+1)(d+2)) · (1 + δ_ij)
    let scale = measure / ((nv * (nv + 1)) as f64);
    let mut m = vec![scale; nv * nv];
    for i in 0..nv {
        m[i * nv + i] = 2.0 * scale;
    }
    m
}

fn scatter(mesh: &SurfaceMesh, local: Vec<Vec<f64>>) -> CsrMatrix {
    let nv = mesh.dim() + 1;
    let mut entries = Vec::with_capacity(local.len() * nv * nv);
    for (s, block) in local.into_iter().enumerate() {
        let verts = mesh.simplex(s);
        for a in 0..nv {
            for b in 0..nv {
                entries.push((verts[a], verts[b], block[a * nv + b]));
            }
        }
    }
    let n = mesh.num_vertices();
    CsrMatrix::from_triplets(n, n, &entries)
}

fn checked_measure(mesh: &SurfaceMesh, s: usize) -> Result<f64> {
    let m = mesh.measure(s);
    if !(m > 0.0) {
        return Err(Error::Mesh(format!("simplex {s} has zero measure")));
    }
    Ok(m)
}

pub fn assemble_mass(mesh: &SurfaceMesh) -> Result<CsrMatrix> {
    let nv = mesh.dim() + 1;
    let local = (0..mesh.num_simplices())
        .into_par_iter()
        .map(|s| Ok(local_mass(checked_measure(mesh, s)?, nv)))
        .collect::<Result<Vec<_>>>()?;
    Ok(scatter(mesh, local))
}

/// Matrix of `a_h(φ_j, φ_i)` with one-point (barycenter) evaluation of the
/// projected coefficients and exact integration of the polynomial parts.
pub fn assemble_form(mesh: &SurfaceMesh, field: CoefficientField) -> Result<CsrMatrix> {
    let nv = mesh.dim() + 1;
    let projected = project_to_mesh(field, mesh);
    let local = (0..mesh.num_simplices())
        .into_par_iter()
        .map(|s| {
            let measure = checked_measure(mesh, s)?;
            let grads = hat_gradients(&mesh.simplex_points(s))?;
            let c = projected.at_simplex(s)?;
            let mut block = local_mass(measure, nv);
            block.iter_mut().for_each(|v| *v *= c.reaction);
            let mean_hat = measure / nv as f64;
            for i in 0..nv {
                for j in 0..nv {
                    let diffusion = (c.diffusion * grads[j]).dot(&grads[i]) * measure;
                    let advection = c.advection.dot(&grads[j]) * mean_hat;
                    block[i * nv + j] += diffusion + advection;
                }
            }
            if block.iter().any(|v| !v.is_finite()) {
                return Err(Error::Precondition(format!("non-finite element matrix on simplex {s}")));
            }
            Ok(block)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(scatter(mesh, local))
}

/// Smallest eigenvalue of the symmetric part of `K + shift·M` (dense; for
/// small diagnostic problems only).
pub fn coercivity_margin(k: &CsrMatrix, m: &CsrMatrix, shift: f64) -> Result<f64> {
    if k.nrows() > 2000 {
        return Err(Error::Precondition(format!("dense coercivity check on {} unknowns", k.nrows())));
    }
    let a = k.linear_combination(1.0, m, shift).to_dense();
    let sym = (&a + a.transpose()) * 0.5;
    let eig = sym.symmetric_eigenvalues();
    Ok(eig.iter().copied().fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Surface;
    use crate::mesh::generate_mesh;
    use approx::assert_abs_diff_eq;

    #[test]
    fn square_mass_and_stiffness() {
        let mesh = generate_mesh(Surface::Circle, 0);
        let m = assemble_mass(&mesh).unwrap();
        let s2 = 2f64.sqrt();
        for i in 0..4 {
            assert_abs_diff_eq!(m.get(i, i), 2.0 * s2 / 3.0, epsilon = 1e-12);
            assert_abs_diff_eq!(m.get(i, (i + 1) % 4), s2 / 6.0, epsilon = 1e-12);
            assert_eq!(m.get(i, (i + 2) % 4), 0.0);
        }
        let t = assemble_form(&mesh, CoefficientField::Laplace).unwrap();
        for i in 0..4 {
            assert_abs_diff_eq!(t.get(i, i), s2, epsilon = 1e-12);
            assert_abs_diff_eq!(t.get(i, (i + 1) % 4), -1.0 / s2, epsilon = 1e-12);
        }
    }

    #[test]
    fn mass_sums_to_measure() {
        for (surface, level) in [(Surface::Circle, 3), (Surface::Sphere, 2), (Surface::DeformedSphere, 2)] {
            let mesh = generate_mesh(surface, level);
            let m = assemble_mass(&mesh).unwrap();
            let total = mesh.metrics().unwrap().total_measure;
            assert_abs_diff_eq!(m.sum(), total, epsilon = 1e-12 * total);
            assert!(m.is_symmetric(1e-14));
        }
    }

    #[test]
    fn shifted_equals_laplace_plus_mass() {
        let mesh = generate_mesh(Surface::Sphere, 2);
        let m = assemble_mass(&mesh).unwrap();
        let l = assemble_form(&mesh, CoefficientField::Laplace).unwrap();
        let s = assemble_form(&mesh, CoefficientField::ShiftedLaplace).unwrap();
        let diff = s.linear_combination(1.0, &l.linear_combination(1.0, &m, 1.0), -1.0);
        assert!(diff.triplets().all(|(_, _, v)| v.abs() <= 1e-12));
    }

    #[test]
    fn laplace_kernel_and_symmetry() {
        for (surface, level) in [(Surface::Circle, 4), (Surface::Sphere, 3), (Surface::DeformedSphere, 2)] {
            let mesh = generate_mesh(surface, level);
            let t = assemble_form(&mesh, CoefficientField::Laplace).unwrap();
            let ones = vec![1.0; mesh.num_vertices()];
            let r = t.mul_vec(&ones);
            let worst = r.iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!(worst <= 1e-10 * t.inf_norm(), "{surface}: {worst}");
            assert!(t.is_symmetric(1e-12));
        }
    }

    #[test]
    fn symmetry_iff_no_advection() {
        let mesh = generate_mesh(Surface::Sphere, 2);
        for field in CoefficientField::ALL {
            let a = assemble_form(&mesh, field).unwrap();
            assert_eq!(a.is_symmetric(1e-12), !field.has_advection(), "{field}");
        }
        let t = assemble_form(&mesh, CoefficientField::Example3A1).unwrap();
        assert!(t.asymmetry() > 0.0);
    }

    #[test]
    fn scaling_on_circle() {
        let mesh = generate_mesh(Surface::Circle, 3);
        let scaled = mesh.scaled(2.5);
        let m = assemble_mass(&mesh).unwrap();
        let ms = assemble_mass(&scaled).unwrap();
        let t = assemble_form(&mesh, CoefficientField::Laplace).unwrap();
        let ts = assemble_form(&scaled, CoefficientField::Laplace).unwrap();
        for (i, j, v) in m.triplets() {
            assert_abs_diff_eq!(ms.get(i, j), 2.5 * v, epsilon = 1e-10);
        }
        for (i, j, v) in t.triplets() {
            assert_abs_diff_eq!(ts.get(i, j), v / 2.5, epsilon = 1e-10);
        }
    }

    #[test]
    fn icosahedron_mass_is_spd() {
        let mesh = generate_mesh(Surface::Sphere, 0);
        let m = assemble_mass(&mesh).unwrap();
        assert!(m.to_dense().cholesky().is_some());
    }

    #[test]
    fn coercivity_spot_check() {
        let mesh = generate_mesh(Surface::Sphere, 1);
        let m = assemble_mass(&mesh).unwrap();
        for field in CoefficientField::ALL {
            let k = assemble_form(&mesh, field).unwrap();
            assert!(coercivity_margin(&k, &m, 1.0).unwrap() > 0.0, "{field}");
        }
    }
}
