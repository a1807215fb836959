//! Coefficient fields `(𝒜, b, α)` of the second-order surface operators and
//! their tangential projection onto the discrete surface.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::mesh::SurfaceMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoefficientField {
    /// `𝒜 = I, b = 0, α = 0`.
    Laplace,
    /// `𝒜 = I, b = 0, α = 1`.
    ShiftedLaplace,
    /// Spatially varying operator with `α = 1`, `𝒜 = I + 5 v vᵀ` and a
    /// vertical drift `b`.
    Example3A1,
    /// `𝒜 = I, b = 0, α = 1`.
    Example3A2,
}

impl CoefficientField {
    pub const ALL: [CoefficientField; 4] = [
        CoefficientField::Laplace,
        CoefficientField::ShiftedLaplace,
        CoefficientField::Example3A1,
        CoefficientField::Example3A2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CoefficientField::Laplace => "laplace",
            CoefficientField::ShiftedLaplace => "shifted-laplace",
            CoefficientField::Example3A1 => "example3-a1",
            CoefficientField::Example3A2 => "example3-a2",
        }
    }

    /// Whether the assembled matrix is a combination `c₁·stiffness + c₂·mass`.
    /// Two such operators commute in the `M`-inner product.
    pub fn is_laplace_plus_mass(&self) -> bool {
        !matches!(self, CoefficientField::Example3A1)
    }

    pub fn has_advection(&self) -> bool {
        matches!(self, CoefficientField::Example3A1)
    }

    /// Diffusion tensor at `x`, with `nu` the smooth unit normal at the
    /// closest point of `x`.
    pub fn diffusion(&self, x: &Point, nu: &Point) -> Matrix3<f64> {
        match self {
            CoefficientField::Example3A1 => {
                let v = rotational_direction(x, nu);
                Matrix3::identity() + 5.0 * v * v.transpose()
            }
            _ => Matrix3::identity(),
        }
    }

    pub fn advection(&self, x: &Point, nu: &Point) -> Point {
        match self {
            CoefficientField::Example3A1 => -tangential(nu, &Point::new(0.0, 0.0, 0.5 * x.z)),
            _ => Point::zeros(),
        }
    }

    pub fn reaction(&self, _x: &Point) -> f64 {
        match self {
            CoefficientField::Laplace => 0.0,
            _ => 1.0,
        }
    }
}

/// `(I − ννᵀ) w`.
fn tangential(nu: &Point, w: &Point) -> Point {
    w - nu * nu.dot(w)
}

/// `v = cos²(π x₃ / 2) (I − ννᵀ) (x₂, −x₁, 0)`.
pub fn rotational_direction(x: &Point, nu: &Point) -> Point {
    let c = (0.5 * PI * x.z).cos();
    tangential(nu, &Point::new(x.y, -x.x, 0.0)) * (c * c)
}

impl fmt::Display for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CoefficientField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Self::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownField(s.to_string()))
    }
}

pub fn builtin_field(name: &str) -> Result<CoefficientField> {
    name.parse()
}

/// Coefficients of one simplex after tangential projection with `ν_h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementCoefficients {
    pub diffusion: Matrix3<f64>,
    pub advection: Point,
    pub reaction: f64,
}

/// Evaluates a field on the simplices of a mesh:
/// `𝒜_h = P 𝒜 P`, `b_h = P b` with `P = I − ν_h ν_hᵀ`.
#[derive(Debug, Clone, Copy)]
pub struct ProjectedField<'a> {
    field: CoefficientField,
    mesh: &'a SurfaceMesh,
}

pub fn project_to_mesh(field: CoefficientField, mesh: &SurfaceMesh) -> ProjectedField<'_> {
    ProjectedField { field, mesh }
}

impl ProjectedField<'_> {
    pub fn field(&self) -> CoefficientField {
        self.field
    }

    /// Coefficients at point `x` of simplex `s`.
    pub fn evaluate(&self, s: usize, x: &Point) -> Result<ElementCoefficients> {
        let nu = self.mesh.surface().normal_near(x)?;
        let p = self.mesh.tangent_projector(s);
        let out = ElementCoefficients {
            diffusion: p * self.field.diffusion(x, &nu) * p,
            advection: p * self.field.advection(x, &nu),
            reaction: self.field.reaction(x),
        };
        let finite =
            out.diffusion.iter().chain(out.advection.iter()).all(|v| v.is_finite()) && out.reaction.is_finite();
        if !finite {
            return Err(Error::Precondition(format!("non-finite {} coefficients on simplex {s}", self.field)));
        }
        Ok(out)
    }

    /// Coefficients at the barycenter (the one-point quadrature node).
    pub fn at_simplex(&self, s: usize) -> Result<ElementCoefficients> {
        self.evaluate(s, &self.mesh.barycenter(s))
    }
}
