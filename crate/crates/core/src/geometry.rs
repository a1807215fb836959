//! Smooth reference surfaces: the unit circle, the unit sphere and the
//! deformed sphere `f(S²)` with
//! `f(x) = (1 - 0.5 cos²(π x₃)) (x₁, x₂, 0) + (0, 0, x₃)`.
//!
//! Points are carried as `Vector3` throughout. The circle lives in the
//! `x₃ = 0` plane and its projection ignores the third coordinate.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

pub type Point = Vector3<f64>;

/// Distance from the surface tolerated by `unit_normal`.
pub const ON_SURFACE_TOL: f64 = 1e-10;

const GN_MAX_ITER: usize = 200;
const GN_STEP_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Surface {
    Circle,
    Sphere,
    DeformedSphere,
}

impl Surface {
    /// Intrinsic dimension `d`.
    pub fn dim(&self) -> usize {
        match self {
            Surface::Circle => 1,
            Surface::Sphere | Surface::DeformedSphere => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Surface::Circle => "circle",
            Surface::Sphere => "sphere",
            Surface::DeformedSphere => "deformed-sphere",
        }
    }

    pub fn closest_point(&self, x: &Point) -> Result<Point> {
        match self {
            Surface::Circle => {
                let r = x.x.hypot(x.y);
                if !(r > 0.0) || !r.is_finite() {
                    return Err(Error::Domain(format!("{x:?} projects onto the circle's center")));
                }
                Ok(Point::new(x.x / r, x.y / r, 0.0))
            }
            Surface::Sphere => {
                let r = x.norm();
                if !(r > 0.0) || !r.is_finite() {
                    return Err(Error::Domain(format!("{x:?} is the sphere's center")));
                }
                Ok(x / r)
            }
            Surface::DeformedSphere => Ok(deform(&deformed_preimage(x)?)),
        }
    }

    pub fn unit_normal(&self, p: &Point) -> Result<Point> {
        let proj = self.closest_point(p)?;
        let dist = (proj - p).norm();
        if dist > ON_SURFACE_TOL {
            return Err(Error::Precondition(format!(
                "point {p:?} is {dist:.3e} away from the {} surface",
                self.name()
            )));
        }
        match self {
            Surface::Circle | Surface::Sphere => Ok(proj),
            Surface::DeformedSphere => Ok(deformed_normal_at(&deformed_preimage(p)?)),
        }
    }

    /// Outward normal evaluated at the closest point of `x`.
    pub fn normal_near(&self, x: &Point) -> Result<Point> {
        match self {
            Surface::Circle | Surface::Sphere => self.closest_point(x),
            Surface::DeformedSphere => Ok(deformed_normal_at(&deformed_preimage(x)?)),
        }
    }
}

impl fmt::Display for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Surface {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "circle" | "s1" => Ok(Surface::Circle),
            "sphere" | "s2" => Ok(Surface::Sphere),
            "deformed-sphere" | "deformed_sphere" | "deformed" => Ok(Surface::DeformedSphere),
            other => Err(Error::param("surface", format!("unknown surface `{other}`"))),
        }
    }
}

fn planar_scale(z: f64) -> f64 {
    let c = (PI * z).cos();
    1.0 - 0.5 * c * c
}

fn planar_scale_derivative(z: f64) -> f64 {
    0.5 * PI * (2.0 * PI * z).sin()
}

/// The deformation map `f`, evaluated on a point of the unit sphere.
pub fn deform(q: &Point) -> Point {
    let s = planar_scale(q.z);
    Point::new(s * q.x, s * q.y, q.z)
}

/// Jacobian of `f` as a map on R³.
pub fn deform_jacobian(q: &Point) -> Matrix3<f64> {
    let s = planar_scale(q.z);
    let ds = planar_scale_derivative(q.z);
    Matrix3::new(s, 0.0, ds * q.x, 0.0, s, ds * q.y, 0.0, 0.0, 1.0)
}

/// Orthonormal tangent pair `(e1, e2)` at a unit vector `q` with `e1 × e2 = q`.
pub(crate) fn tangent_frame(q: &Point) -> (Point, Point) {
    let a = if q.x.abs() <= q.y.abs() && q.x.abs() <= q.z.abs() {
        Point::x()
    } else if q.y.abs() <= q.z.abs() {
        Point::y()
    } else {
        Point::z()
    };
    let e1 = (a - q * q.dot(&a)).normalize();
    let e2 = q.cross(&e1);
    (e1, e2)
}

fn deformed_normal_at(q: &Point) -> Point {
    let jac = deform_jacobian(q);
    let (e1, e2) = tangent_frame(q);
    (jac * e1).cross(&(jac * e2)).normalize()
}

/// Preimage on S² of the closest point of `x` on the deformed sphere.
///
/// Gauss-Newton on `q ↦ |x - f(q)|²` over unit `q`, seeded by undoing the
/// planar rescaling of `x` and normalizing.
pub(crate) fn deformed_preimage(x: &Point) -> Result<Point> {
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::Domain(format!("non-finite point {x:?}")));
    }
    let s0 = planar_scale(x.z.clamp(-1.0, 1.0));
    let seed = Point::new(x.x / s0, x.y / s0, x.z);
    let norm = seed.norm();
    if !(norm > 0.0) {
        return Err(Error::Domain(format!("{x:?} has no well-defined closest point")));
    }
    let mut q = seed / norm;
    for _ in 0..GN_MAX_ITER {
        let (e1, e2) = tangent_frame(&q);
        let jac = deform_jacobian(&q);
        let (j1, j2) = (jac * e1, jac * e2);
        let r = deform(&q) - x;
        let (a11, a12, a22) = (j1.dot(&j1), j1.dot(&j2), j2.dot(&j2));
        let (g1, g2) = (j1.dot(&r), j2.dot(&r));
        let det = a11 * a22 - a12 * a12;
        if !(det > 0.0) {
            return Err(Error::Domain(format!("degenerate Jacobian while projecting {x:?}")));
        }
        let d1 = -(a22 * g1 - a12 * g2) / det;
        let d2 = -(a11 * g2 - a12 * g1) / det;
        q = (q + e1 * d1 + e2 * d2).normalize();
        if d1.hypot(d2) < GN_STEP_TOL {
            return Ok(q);
        }
    }
    // Linear convergence for points far off the surface can stall at the
    // rounding level; accept if the gradient of the objective vanishes.
    let (e1, e2) = tangent_frame(&q);
    let jac = deform_jacobian(&q);
    let r = deform(&q) - x;
    let grad = (jac * e1).dot(&r).hypot((jac * e2).dot(&r));
    if grad <= 1e-12 * (1.0 + r.norm()) {
        Ok(q)
    } else {
        Err(Error::Domain(format!("closest-point iteration did not converge for {x:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_unit(rng: &mut ChaCha8Rng) -> Point {
        loop {
            let v = Point::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let n = v.norm();
            if n > 0.1 && n <= 1.0 {
                return v / n;
            }
        }
    }

    #[test]
    fn sphere_and_circle_projection() {
        let p = Surface::Sphere.closest_point(&Point::new(2.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(p, Point::new(1.0, 0.0, 0.0), epsilon = 1e-15);
        assert!(matches!(Surface::Circle.closest_point(&Point::zeros()), Err(Error::Domain(_))));
        assert!(matches!(Surface::Sphere.closest_point(&Point::zeros()), Err(Error::Domain(_))));
    }

    #[test]
    fn deform_examples() {
        assert_abs_diff_eq!(deform(&Point::new(0.0, 0.0, 1.0)), Point::new(0.0, 0.0, 1.0), epsilon = 1e-15);
        assert_abs_diff_eq!(deform(&Point::new(1.0, 0.0, 0.0)), Point::new(0.5, 0.0, 0.0), epsilon = 1e-15);
        assert_abs_diff_eq!(deform(&Point::new(0.0, 1.0, 0.0)), Point::new(0.0, 0.5, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn simple_normals() {
        let n = Surface::Sphere.unit_normal(&Point::new(0.0, 0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(n, Point::new(0.0, 0.0, 1.0), epsilon = 1e-15);
        let n = Surface::Circle.unit_normal(&Point::new(1.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(n, Point::new(1.0, 0.0, 0.0), epsilon = 1e-15);
        assert!(matches!(Surface::Sphere.unit_normal(&Point::new(1.1, 0.0, 0.0)), Err(Error::Precondition(_))));
    }

    /// Brute-force nearest point on f(S²): dense (θ, φ) sampling followed by
    /// coordinate pattern search.
    fn brute_force_nearest(x: &Point) -> Point {
        let param = |t: f64, p: f64| Point::new(t.sin() * p.cos(), t.sin() * p.sin(), t.cos());
        let dist = |t: f64, p: f64| (deform(&param(t, p)) - x).norm_squared();
        let (mut bt, mut bp, mut best) = (0.0, 0.0, f64::INFINITY);
        let n = 400;
        for i in 0..=n {
            let t = PI * i as f64 / n as f64;
            for j in 0..(2 * n) {
                let p = PI * j as f64 / n as f64;
                let v = dist(t, p);
                if v < best {
                    (bt, bp, best) = (t, p, v);
                }
            }
        }
        let mut step = PI / n as f64;
        while step > 1e-13 {
            let mut improved = false;
            for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                let v = dist(bt + dt, bp + dp);
                if v < best {
                    (bt, bp, best) = (bt + dt, bp + dp, v);
                    improved = true;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        deform(&param(bt, bp))
    }

    #[test]
    fn deformed_projection_matches_brute_force() {
        let mut targets = vec![Point::new(0.01, -0.02, 1.03), Point::new(-0.52, 0.01, 0.05)];
        for q in [Point::new(0.3, 0.55, 0.4), Point::new(-0.2, 0.1, -0.8), Point::new(0.7, -0.7, 0.1)] {
            let p = deform(&q.normalize());
            targets.push(p + Surface::DeformedSphere.unit_normal(&p).unwrap() * 0.03);
        }
        for x in targets {
            let p = Surface::DeformedSphere.closest_point(&x).unwrap();
            let oracle = brute_force_nearest(&x);
            assert!((p - oracle).norm() < 1e-6, "{p:?} vs {oracle:?}");
        }
        let near_pole = Surface::DeformedSphere.closest_point(&Point::new(0.01, -0.02, 1.03)).unwrap();
        assert!((near_pole - Point::new(0.0, 0.0, 1.0)).norm() < 0.05);
    }

    #[test]
    fn deformed_normal_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let q = random_unit(&mut rng);
            let p = deform(&q);
            let n = Surface::DeformedSphere.unit_normal(&p).unwrap();
            assert_abs_diff_eq!(n.norm(), 1.0, epsilon = 1e-14);
            let (e1, e2) = tangent_frame(&q);
            let eps = 1e-6;
            for e in [e1, e2] {
                let plus = deform(&(q + e * eps).normalize());
                let minus = deform(&(q - e * eps).normalize());
                let t = (plus - minus) / (2.0 * eps);
                assert!(n.dot(&t).abs() <= 1e-8 * t.norm().max(1.0));
            }
            assert!(n.dot(&p) > 0.0);
        }
    }

    #[test]
    fn projection_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for surface in [Surface::Circle, Surface::Sphere, Surface::DeformedSphere] {
            for _ in 0..1000 {
                let mut q = random_unit(&mut rng);
                if surface == Surface::Circle {
                    q.z = 0.0;
                    q = q.normalize();
                }
                let base = if surface == Surface::DeformedSphere { deform(&q) } else { q };
                let normal = surface.normal_near(&base).unwrap();
                let x = base + normal * rng.random_range(-0.05..0.05);
                let p = surface.closest_point(&x).unwrap();
                let pp = surface.closest_point(&p).unwrap();
                assert!((p - pp).norm() <= 1e-12, "{surface}: {p:?} {pp:?}");
            }
        }
    }

    #[test]
    fn deformation_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let q = random_unit(&mut rng);
            let p = deform(&q);
            let nu = Surface::DeformedSphere.unit_normal(&p).unwrap();
            let back = Surface::DeformedSphere.closest_point(&(p + nu * 1e-3)).unwrap();
            assert!((back - p).norm() <= 1e-6);
        }
    }
}
