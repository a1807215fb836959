//! Nested polygonal (d = 1) and triangulated (d = 2) approximations of the
//! reference surfaces, with all vertices on the surface.

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{deform, Point, Surface};
use crate::sparse::CsrMatrix;

/// Tolerance for "vertex lies on the surface".
pub const VERTEX_ON_SURFACE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    surface: Surface,
    level: Option<usize>,
    vertices: Vec<Point>,
    /// Flat connectivity, `dim + 1` vertex indices per simplex.
    simplices: Vec<usize>,
    normals: Vec<Point>,
    h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshMetrics {
    pub h: f64,
    pub min_diameter: f64,
    pub quasi_uniformity_ratio: f64,
    pub total_measure: f64,
}

impl SurfaceMesh {
    /// Builds a mesh from raw data. Computes per-simplex normals and `h`;
    /// call [`SurfaceMesh::validate`] to check the closed-surface invariants.
    pub fn from_raw(surface: Surface, vertices: Vec<Point>, simplices: Vec<usize>) -> Result<Self> {
        let nv = surface.dim() + 1;
        if !simplices.len().is_multiple_of(nv) {
            return Err(Error::Mesh(format!("connectivity length {} is not a multiple of {nv}", simplices.len())));
        }
        if let Some(&bad) = simplices.iter().find(|&&v| v >= vertices.len()) {
            return Err(Error::Mesh(format!("vertex index {bad} out of range")));
        }
        let mut mesh = Self { surface, level: None, vertices, simplices, normals: Vec::new(), h: 0.0 };
        mesh.normals = (0..mesh.num_simplices()).map(|s| mesh.compute_normal(s)).collect::<Result<_>>()?;
        mesh.h = (0..mesh.num_simplices()).map(|s| mesh.diameter(s)).fold(0.0, f64::max);
        Ok(mesh)
    }

    pub fn surface(&self) -> Surface {
        self.surface
    }

    pub fn dim(&self) -> usize {
        self.surface.dim()
    }

    pub fn level(&self) -> Option<usize> {
        self.level
    }

    pub fn id(&self) -> String {
        match self.level {
            Some(l) => format!("{}/level-{l}", self.surface),
            None => format!("{}/custom-{}", self.surface, self.num_vertices()),
        }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_simplices(&self) -> usize {
        self.simplices.len() / (self.dim() + 1)
    }

    pub fn simplex(&self, s: usize) -> &[usize] {
        let nv = self.dim() + 1;
        &self.simplices[s * nv..(s + 1) * nv]
    }

    pub fn simplices(&self) -> impl Iterator<Item = &[usize]> {
        self.simplices.chunks(self.dim() + 1)
    }

    pub fn simplex_points(&self, s: usize) -> Vec<Point> {
        self.simplex(s).iter().map(|&v| self.vertices[v]).collect()
    }

    /// Maximum simplex diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn discrete_normal(&self, s: usize) -> Point {
        self.normals[s]
    }

    pub fn barycenter(&self, s: usize) -> Point {
        let pts = self.simplex_points(s);
        pts.iter().sum::<Point>() / pts.len() as f64
    }

    /// Length (d = 1) or area (d = 2) of simplex `s`.
    pub fn measure(&self, s: usize) -> f64 {
        let p = self.simplex_points(s);
        match self.dim() {
            1 => (p[1] - p[0]).norm(),
            _ => 0.5 * (p[1] - p[0]).cross(&(p[2] - p[0])).norm(),
        }
    }

    pub fn diameter(&self, s: usize) -> f64 {
        let p = self.simplex_points(s);
        let mut d: f64 = 0.0;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                d = d.max((p[i] - p[j]).norm());
            }
        }
        d
    }

    /// Inradius of simplex `s` (half the length for a segment).
    pub fn inradius(&self, s: usize) -> f64 {
        let p = self.simplex_points(s);
        match self.dim() {
            1 => 0.5 * (p[1] - p[0]).norm(),
            _ => {
                let perimeter = (p[1] - p[0]).norm() + (p[2] - p[1]).norm() + (p[0] - p[2]).norm();
                2.0 * self.measure(s) / perimeter
            }
        }
    }

    fn compute_normal(&self, s: usize) -> Result<Point> {
        let p = self.simplex_points(s);
        let raw = match self.dim() {
            1 => {
                let t = p[1] - p[0];
                Point::new(t.y, -t.x, 0.0)
            }
            _ => (p[1] - p[0]).cross(&(p[2] - p[0])),
        };
        let norm = raw.norm();
        if !(norm > 0.0) {
            return Err(Error::Mesh(format!("simplex {s} is degenerate")));
        }
        let n = raw / norm;
        let reference = self.surface.normal_near(&self.barycenter(s))?;
        Ok(if n.dot(&reference) < 0.0 { -n } else { n })
    }

    /// Orthogonal projector onto the tangent space of simplex `s`.
    pub fn tangent_projector(&self, s: usize) -> nalgebra::Matrix3<f64> {
        let n = self.normals[s];
        let mut p = nalgebra::Matrix3::identity() - n * n.transpose();
        if self.dim() == 1 {
            p -= Point::z() * Point::z().transpose();
        }
        p
    }

    pub fn metrics(&self) -> Result<MeshMetrics> {
        let mut total = 0.0;
        let mut min_diam = f64::INFINITY;
        let mut min_incircle = f64::INFINITY;
        for s in 0..self.num_simplices() {
            let m = self.measure(s);
            if !(m > 0.0) {
                return Err(Error::Mesh(format!("simplex {s} has zero measure")));
            }
            total += m;
            min_diam = min_diam.min(self.diameter(s));
            min_incircle = min_incircle.min(2.0 * self.inradius(s));
        }
        Ok(MeshMetrics {
            h: self.h,
            min_diameter: min_diam,
            quasi_uniformity_ratio: self.h / min_incircle,
            total_measure: total,
        })
    }

    /// Checks vertices-on-surface, non-degeneracy and closedness.
    pub fn validate(&self) -> Result<()> {
        for (i, v) in self.vertices.iter().enumerate() {
            let p = self.surface.closest_point(v)?;
            let dist = (p - v).norm();
            if dist > VERTEX_ON_SURFACE_TOL {
                return Err(Error::Mesh(format!("vertex {i} is {dist:.3e} off the surface")));
            }
        }
        self.metrics()?;
        let mut facets: HashMap<Vec<usize>, usize> = HashMap::new();
        for simplex in self.simplices() {
            if self.dim() == 1 {
                for &v in simplex {
                    *facets.entry(vec![v]).or_default() += 1;
                }
            } else {
                for k in 0..3 {
                    let (a, b) = (simplex[k], simplex[(k + 1) % 3]);
                    *facets.entry(vec![a.min(b), a.max(b)]).or_default() += 1;
                }
            }
        }
        if let Some((facet, count)) = facets.iter().find(|(_, &c)| c != 2) {
            return Err(Error::Mesh(format!("facet {facet:?} is shared by {count} simplices, expected 2")));
        }
        Ok(())
    }

    /// Uniformly scales all vertices (the result no longer lies on the surface).
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.vertices.iter_mut().for_each(|v| *v *= factor);
        out.h *= factor;
        out
    }
}

/// Nested mesh of `surface` at refinement depth `level`.
///
/// Circle: regular `2^(level+2)`-gon. Sphere: icosahedron subdivided
/// `level` times with midpoints pushed radially onto S². Deformed sphere:
/// the sphere mesh mapped through the deformation.
pub fn generate_mesh(surface: Surface, level: usize) -> SurfaceMesh {
    let (vertices, simplices) = match surface {
        Surface::Circle => {
            let n = 1usize << (level + 2);
            let vertices = (0..n)
                .map(|j| {
                    let t = 2.0 * PI * j as f64 / n as f64;
                    Point::new(t.cos(), t.sin(), 0.0)
                })
                .collect();
            let simplices = (0..n).flat_map(|j| [j, (j + 1) % n]).collect();
            (vertices, simplices)
        }
        Surface::Sphere => icosphere(level),
        Surface::DeformedSphere => {
            let (v, s) = icosphere(level);
            (v.iter().map(deform).collect(), s)
        }
    };
    let mut mesh = SurfaceMesh::from_raw(surface, vertices, simplices).expect("built-in meshes are non-degenerate");
    mesh.level = Some(level);
    mesh
}

/// Level whose measured `h` is closest to `target_h`, searching `0..=max_level`.
pub fn level_for_h(surface: Surface, target_h: f64, max_level: usize) -> usize {
    (0..=max_level)
        .min_by(|&a, &b| {
            let da = (generate_mesh(surface, a).h().ln() - target_h.ln()).abs();
            let db = (generate_mesh(surface, b).h().ln() - target_h.ln()).abs();
            da.total_cmp(&db)
        })
        .unwrap_or(0)
}

fn icosphere(level: usize) -> (Vec<Point>, Vec<usize>) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut vertices: Vec<Point> = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Point::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
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
    for f in &mut faces {
        let (a, b, c) = (vertices[f[0]], vertices[f[1]], vertices[f[2]]);
        if (b - a).cross(&(c - a)).dot(&(a + b + c)) < 0.0 {
            f.swap(1, 2);
        }
    }
    for _ in 0..level {
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point>| -> usize {
            *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                vertices.push(((vertices[a] + vertices[b]) * 0.5).normalize());
                vertices.len() - 1
            })
        };
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut vertices);
            let bc = midpoint(b, c, &mut vertices);
            let ca = midpoint(c, a, &mut vertices);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    (vertices, faces.into_iter().flatten().collect())
}

/// Sparse `A` with `A[i][j] = φ_i(x̃_j)`: coarse hat functions evaluated at
/// the fine vertices, each fine vertex first mapped to its nearest point on
/// the coarse mesh.
#[derive(Debug, Clone)]
pub struct CouplingOperator {
    pub matrix: CsrMatrix,
    pub coarse_id: String,
    pub fine_id: String,
}

impl CouplingOperator {
    /// `A·x` (fine → coarse loads).
    pub fn restrict(&self, fine: &[f64]) -> Result<Vec<f64>> {
        self.matrix.checked_mul_vec(fine)
    }

    /// `Aᵀ·α` (coarse coefficients interpolated at fine vertices).
    pub fn interpolate(&self, coarse: &[f64]) -> Result<Vec<f64>> {
        if coarse.len() != self.matrix.nrows() {
            return Err(Error::Dimension { expected: self.matrix.nrows(), got: coarse.len() });
        }
        let mut out = vec![0.0; self.matrix.ncols()];
        for (i, j, v) in self.matrix.triplets() {
            out[j] += v * coarse[i];
        }
        Ok(out)
    }
}

/// Closest point on a segment or triangle; returns barycentric weights and
/// the distance.
fn closest_on_simplex(x: &Point, p: &[Point]) -> ([f64; 3], f64) {
    if p.len() == 2 {
        let e = p[1] - p[0];
        let t = ((x - p[0]).dot(&e) / e.norm_squared()).clamp(0.0, 1.0);
        let q = p[0] + e * t;
        return ([1.0 - t, t, 0.0], (x - q).norm());
    }
    // Region classification for the closest point of a triangle.
    let (a, b, c) = (p[0], p[1], p[2]);
    let ab = b - a;
    let ac = c - a;
    let ap = x - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    let w = if d1 <= 0.0 && d2 <= 0.0 {
        [1.0, 0.0, 0.0]
    } else {
        let bp = x - b;
        let d3 = ab.dot(&bp);
        let d4 = ac.dot(&bp);
        let cp = x - c;
        let d5 = ab.dot(&cp);
        let d6 = ac.dot(&cp);
        let vc = d1 * d4 - d3 * d2;
        let vb = d5 * d2 - d1 * d6;
        let va = d3 * d6 - d5 * d4;
        if d3 >= 0.0 && d4 <= d3 {
            [0.0, 1.0, 0.0]
        } else if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
            let v = d1 / (d1 - d3);
            [1.0 - v, v, 0.0]
        } else if d6 >= 0.0 && d5 <= d6 {
            [0.0, 0.0, 1.0]
        } else if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
            let v = d2 / (d2 - d6);
            [1.0 - v, 0.0, v]
        } else if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
            let v = (d4 - d3) / ((d4 - d3) + (d5 - d6));
            [0.0, 1.0 - v, v]
        } else {
            let denom = 1.0 / (va + vb + vc);
            let v = vb * denom;
            let u = vc * denom;
            [1.0 - v - u, v, u]
        }
    };
    let q = a * w[0] + b * w[1] + c * w[2];
    (w, (x - q).norm())
}

/// Assembles the coarse-to-fine coupling matrix `A` (`N_coarse × N_fine`).
pub fn coarse_to_fine_matrix(coarse: &SurfaceMesh, fine: &SurfaceMesh, surface: Surface) -> Result<CouplingOperator> {
    if coarse.surface() != surface || fine.surface() != surface {
        return Err(Error::Precondition(format!(
            "meshes approximate {} and {}, expected {surface}",
            coarse.surface(),
            fine.surface()
        )));
    }
    if let (Some(lc), Some(lf)) = (coarse.level(), fine.level()) {
        if lc > lf {
            return Err(Error::Precondition(format!("coarse level {lc} is finer than fine level {lf}")));
        }
    }
    let bounds: Vec<(Point, f64)> = (0..coarse.num_simplices())
        .map(|s| {
            let c = coarse.barycenter(s);
            let r = coarse.simplex_points(s).iter().map(|p| (p - c).norm()).fold(0.0, f64::max);
            (c, r)
        })
        .collect();
    let tie_tol = 1e-13;
    let max_dist = coarse.h().max(1e-12);

    let columns: Vec<Result<Vec<(usize, f64)>>> = fine
        .vertices()
        .par_iter()
        .enumerate()
        .map(|(j, x)| {
            let guess = (0..bounds.len())
                .min_by(|&a, &b| {
                    let la = (x - bounds[a].0).norm() - bounds[a].1;
                    let lb = (x - bounds[b].0).norm() - bounds[b].1;
                    la.total_cmp(&lb)
                })
                .expect("coarse mesh has simplices");
            let pts = coarse.simplex_points(guess);
            let mut best = closest_on_simplex(x, &pts).1;
            let mut candidates: Vec<(usize, [f64; 3], f64)> = Vec::new();
            for (s, (c, r)) in bounds.iter().enumerate() {
                if (x - c).norm() - r > best + tie_tol {
                    continue;
                }
                let (w, d) = closest_on_simplex(x, &coarse.simplex_points(s));
                if d < best {
                    best = d;
                }
                candidates.push((s, w, d));
            }
            if best > max_dist {
                return Err(Error::Location { vertex: j, distance: best });
            }
            let (s, mut w, _) = candidates
                .into_iter()
                .find(|&(_, _, d)| d <= best + tie_tol)
                .expect("the best simplex is among the candidates");
            let nv = coarse.dim() + 1;
            for wi in w.iter_mut().take(nv) {
                if *wi < 1e-14 {
                    *wi = 0.0;
                }
            }
            if let Some(k) = (0..nv).find(|&k| w[k] > 1.0 - 1e-12) {
                w = [0.0; 3];
                w[k] = 1.0;
            }
            let total: f64 = w[..nv].iter().sum();
            let simplex = coarse.simplex(s);
            Ok((0..nv).filter(|&k| w[k] != 0.0).map(|k| (simplex[k], w[k] / total)).collect())
        })
        .collect();

    let mut entries = Vec::new();
    for (j, col) in columns.into_iter().enumerate() {
        for (i, v) in col? {
            entries.push((i, j, v));
        }
    }
    Ok(CouplingOperator {
        matrix: CsrMatrix::from_triplets(coarse.num_vertices(), fine.num_vertices(), &entries),
        coarse_id: coarse.id(),
        fine_id: fine.id(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn icosphere_counts() {
        let m = generate_mesh(Surface::Sphere, 0);
        assert_eq!((m.num_vertices(), m.num_simplices()), (12, 20));
        for l in 1..=4 {
            let m = generate_mesh(Surface::Sphere, l);
            assert_eq!(m.num_simplices(), 20 * 4usize.pow(l as u32));
            assert_eq!(m.num_vertices(), 10 * 4usize.pow(l as u32) + 2);
            m.validate().unwrap();
            assert!(m.metrics().unwrap().quasi_uniformity_ratio <= 10.0);
        }
    }

    #[test]
    fn circle_counts_and_h() {
        for l in 0..6 {
            let m = generate_mesh(Surface::Circle, l);
            let n = 1usize << (l + 2);
            assert_eq!(m.num_simplices(), n);
            assert_abs_diff_eq!(m.h(), 2.0 * (PI / n as f64).sin(), epsilon = 1e-14);
            m.validate().unwrap();
            let metrics = m.metrics().unwrap();
            assert_abs_diff_eq!(metrics.total_measure, 2.0 * n as f64 * (PI / n as f64).sin(), epsilon = 1e-12);
            assert!(metrics.quasi_uniformity_ratio >= 1.0);
        }
        let square = generate_mesh(Surface::Circle, 0).metrics().unwrap();
        assert_abs_diff_eq!(square.total_measure, 4.0 * 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn deformed_mesh_is_valid() {
        let m = generate_mesh(Surface::DeformedSphere, 3);
        m.validate().unwrap();
        let q = m.metrics().unwrap().quasi_uniformity_ratio;
        assert!(q.is_finite() && q >= 1.0);
    }

    #[test]
    fn discrete_normal_examples() {
        let tri = SurfaceMesh::from_raw(
            Surface::Sphere,
            vec![Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0), Point::new(0.0, 0.0, 1.0)],
            vec![0, 2, 1],
        )
        .unwrap();
        assert_abs_diff_eq!(tri.discrete_normal(0), Point::new(1.0, 1.0, 1.0) / 3f64.sqrt(), epsilon = 1e-15);
        let seg = SurfaceMesh::from_raw(
            Surface::Circle,
            vec![Point::new(1.0, 0.0, 0.0), Point::new(0.0, 1.0, 0.0)],
            vec![0, 1],
        )
        .unwrap();
        assert_abs_diff_eq!(seg.discrete_normal(0), Point::new(1.0, 1.0, 0.0) / 2f64.sqrt(), epsilon = 1e-15);
        let m = generate_mesh(Surface::DeformedSphere, 2);
        for s in 0..m.num_simplices() {
            assert_abs_diff_eq!(m.discrete_normal(s).norm(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn degenerate_simplex_rejected() {
        let bad = SurfaceMesh::from_raw(
            Surface::Sphere,
            vec![Point::new(1.0, 0.0, 0.0), Point::new(1.0, 0.0, 0.0), Point::new(0.0, 0.0, 1.0)],
            vec![0, 1, 2],
        );
        assert!(matches!(bad, Err(Error::Mesh(_))));
    }

    #[test]
    fn sphere_area_converges_at_second_order() {
        let defect: Vec<f64> =
            (2..=5).map(|l| 4.0 * PI - generate_mesh(Surface::Sphere, l).metrics().unwrap().total_measure).collect();
        for w in defect.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
        }
        let l4 = generate_mesh(Surface::Sphere, 4).metrics().unwrap().total_measure;
        assert!(l4 < 4.0 * PI && l4 > 4.0 * PI - 0.05);
    }

    #[test]
    fn nested_vertices() {
        for surface in [Surface::Circle, Surface::Sphere, Surface::DeformedSphere] {
            let c = generate_mesh(surface, 1);
            let f = generate_mesh(surface, 2);
            for v in c.vertices() {
                assert!(f.vertices().iter().any(|w| (v - w).norm() < 1e-14));
            }
        }
    }

    #[test]
    fn coupling_identity_on_same_mesh() {
        for surface in [Surface::Circle, Surface::Sphere] {
            let m = generate_mesh(surface, 2);
            let a = coarse_to_fine_matrix(&m, &m, surface).unwrap();
            assert_eq!(a.matrix, CsrMatrix::identity(m.num_vertices()));
        }
    }

    #[test]
    fn coupling_circle_midpoints() {
        let c = generate_mesh(Surface::Circle, 0);
        let f = generate_mesh(Surface::Circle, 1);
        let a = coarse_to_fine_matrix(&c, &f, Surface::Circle).unwrap().matrix;
        for j in 0..8 {
            if j % 2 == 0 {
                assert_eq!(a.get(j / 2, j), 1.0);
            } else {
                assert_abs_diff_eq!(a.get(j / 2, j), 0.5, epsilon = 1e-15);
                assert_abs_diff_eq!(a.get((j / 2 + 1) % 4, j), 0.5, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn coupling_partition_of_unity_and_affine_reproduction() {
        for (surface, lc, lf) in [(Surface::Circle, 2, 5), (Surface::Sphere, 1, 3), (Surface::DeformedSphere, 1, 3)] {
            let c = generate_mesh(surface, lc);
            let f = generate_mesh(surface, lf);
            let op = coarse_to_fine_matrix(&c, &f, surface).unwrap();
            let ones = op.interpolate(&vec![1.0; c.num_vertices()]).unwrap();
            assert!(ones.iter().all(|v| (v - 1.0).abs() <= 1e-12));
            assert!(op.matrix.triplets().all(|(_, _, v)| (0.0..=1.0).contains(&v)));

            let g = |p: &Point| 0.3 + 1.5 * p.x - 0.7 * p.y + 2.0 * p.z;
            let alpha: Vec<f64> = c.vertices().iter().map(g).collect();
            let interp = op.interpolate(&alpha).unwrap();
            for (j, x) in f.vertices().iter().enumerate() {
                // value of g at the point where x lands on the coarse mesh
                let mut target = Point::zeros();
                for (i, v) in (0..c.num_vertices()).map(|i| (i, op.matrix.get(i, j))) {
                    target += c.vertices()[i] * v;
                }
                assert!((interp[j] - g(&target)).abs() <= 1e-10);
                if c.vertices().iter().any(|v| (v - x).norm() < 1e-14) {
                    assert!((interp[j] - g(x)).abs() <= 1e-10);
                }
            }
        }
    }
}
