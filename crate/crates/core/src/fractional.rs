//! Sinc quadrature for negative fractional powers of the discrete operator,
//! in nodal-matrix form:
//!
//! ```text
//! θ = (k sin(πγ)/π) Σ_{j=-N₋}^{N₊} e^{(1-γ) j k} (e^{j k} M + K)⁻¹ b
//! ```
//!
//! with the conventions `θ = K⁻¹ b` for `γ = 1` and `θ = M⁻¹ b` for `γ = 0`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::factor::{EnvelopeCholesky, SparseSolver};
use crate::sparse::CsrMatrix;

/// Shifts above this are replaced by `(e^{y} M)⁻¹`.
pub const ASYMPTOTIC_SHIFT: f64 = 1e100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractionalSpec {
    pub gamma: f64,
    pub k: f64,
    pub n_plus: usize,
    pub n_minus: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureNode {
    pub index: i64,
    pub y: f64,
    pub weight: f64,
}

/// Quadrature for `γ ∈ (0, 1)`.
pub fn sinc_nodes(gamma: f64, k: f64) -> Result<FractionalSpec> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::param("gamma", format!("{gamma} is outside (0, 1); use the γ ∈ {{0, 1}} conventions")));
    }
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::param("k", format!("quadrature resolution must be positive, got {k}")));
    }
    let base = PI * PI / (2.0 * k * k);
    Ok(FractionalSpec {
        gamma,
        k,
        n_plus: (base / gamma).ceil() as usize,
        n_minus: (base / (1.0 - gamma)).ceil() as usize,
    })
}

impl FractionalSpec {
    /// Any `γ ∈ [0, 1]`; the endpoints carry no quadrature nodes.
    pub fn new(gamma: f64, k: f64) -> Result<Self> {
        if gamma == 0.0 || gamma == 1.0 {
            if !(k > 0.0) || !k.is_finite() {
                return Err(Error::param("k", format!("quadrature resolution must be positive, got {k}")));
            }
            return Ok(Self { gamma, k, n_plus: 0, n_minus: 0 });
        }
        sinc_nodes(gamma, k)
    }

    pub fn is_convention(&self) -> bool {
        self.gamma == 0.0 || self.gamma == 1.0
    }

    pub fn num_nodes(&self) -> usize {
        if self.is_convention() {
            0
        } else {
            self.n_plus + self.n_minus + 1
        }
    }

    pub fn nodes(&self) -> Vec<QuadratureNode> {
        if self.is_convention() {
            return Vec::new();
        }
        let scale = self.k * (PI * self.gamma).sin() / PI;
        (-(self.n_minus as i64)..=self.n_plus as i64)
            .map(|j| {
                let y = j as f64 * self.k;
                QuadratureNode { index: j, y, weight: scale * ((1.0 - self.gamma) * y).exp() }
            })
            .collect()
    }
}

/// Largest admissible quadrature resolution for mesh size `h`, capped at `k_max`.
pub fn choose_k(gamma: f64, h: f64, k_max: f64) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::param("h", format!("mesh size must lie in (0, 1), got {h}")));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::param("gamma", format!("{gamma} is outside (0, 1]")));
    }
    if !(k_max > 0.0) {
        return Err(Error::param("k_max", format!("must be positive, got {k_max}")));
    }
    let bound = PI * PI / (2.0 * (2.0 * gamma + 1.0) * (1.0 / h).ln());
    Ok(k_max.min(bound))
}

#[derive(Debug, Clone)]
enum ShiftedTerm {
    Factored {
        index: i64,
        weight: f64,
        solver: SparseSolver,
    },
    /// `e^{(1-γ)y} (e^{y} M)⁻¹ = e^{-γ y} M⁻¹` with the mass factor.
    Asymptotic {
        scale: f64,
    },
}

#[derive(Debug, Clone)]
enum Kind {
    Identity,
    Inverse(SparseSolver),
    Sinc(Vec<ShiftedTerm>),
}

/// `Q_k^{-γ}` in nodal form with all shifted systems factored once.
#[derive(Debug, Clone)]
pub struct FractionalOperator {
    spec: FractionalSpec,
    mass: EnvelopeCholesky,
    kind: Kind,
}

impl FractionalOperator {
    pub fn new(mass: &CsrMatrix, stiffness: &CsrMatrix, spec: FractionalSpec) -> Result<Self> {
        if mass.nrows() != stiffness.nrows() {
            return Err(Error::Dimension { expected: mass.nrows(), got: stiffness.nrows() });
        }
        let mass_factor = EnvelopeCholesky::new(mass)?;
        let kind = if spec.gamma == 0.0 {
            Kind::Identity
        } else if spec.gamma == 1.0 {
            Kind::Inverse(
                SparseSolver::new(stiffness)
                    .map_err(|e| Error::ShiftedSolve { node: 0, reason: format!("K is singular: {e}") })?,
            )
        } else {
            let terms = spec
                .nodes()
                .into_par_iter()
                .map(|node| {
                    let shift = node.y.exp();
                    if shift > ASYMPTOTIC_SHIFT {
                        return Ok(ShiftedTerm::Asymptotic { scale: node.weight / shift });
                    }
                    let system = stiffness.linear_combination(1.0, mass, shift);
                    let solver = SparseSolver::new(&system)
                        .map_err(|e| Error::ShiftedSolve { node: node.index, reason: e.to_string() })?;
                    Ok(ShiftedTerm::Factored { index: node.index, weight: node.weight, solver })
                })
                .collect::<Result<Vec<_>>>()?;
            Kind::Sinc(terms)
        };
        Ok(Self { spec, mass: mass_factor, kind })
    }

    pub fn spec(&self) -> &FractionalSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.mass.dim()
    }

    /// Applies the operator to a load vector `b`.
    pub fn apply(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: b.len() });
        }
        let out = match &self.kind {
            Kind::Identity => self.mass.solve(b),
            Kind::Inverse(solver) => self.check(0, solver.solve(b))?,
            Kind::Sinc(terms) => {
                let needs_mass = terms.iter().any(|t| matches!(t, ShiftedTerm::Asymptotic { .. }));
                let mass_solution = needs_mass.then(|| self.mass.solve(b));
                let parts = terms
                    .par_iter()
                    .map(|term| match term {
                        ShiftedTerm::Factored { index, weight, solver } => {
                            let mut x = self.check(*index, solver.solve(b))?;
                            x.iter_mut().for_each(|v| *v *= weight);
                            Ok(x)
                        }
                        ShiftedTerm::Asymptotic { scale } => {
                            Ok(mass_solution.as_ref().unwrap().iter().map(|v| v * scale).collect())
                        }
                    })
                    .collect::<Result<Vec<Vec<f64>>>>()?;
                // fixed node order keeps the sum reproducible
                let mut sum = vec![0.0; b.len()];
                for part in parts {
                    sum.iter_mut().zip(part).for_each(|(s, v)| *s += v);
                }
                sum
            }
        };
        Ok(out)
    }

    fn check(&self, node: i64, x: Vec<f64>) -> Result<Vec<f64>> {
        if x.iter().all(|v| v.is_finite()) {
            Ok(x)
        } else {
            Err(Error::ShiftedSolve { node, reason: "non-finite solution".into() })
        }
    }
}

pub fn apply_fractional(mass: &CsrMatrix, stiffness: &CsrMatrix, spec: FractionalSpec, b: &[f64]) -> Result<Vec<f64>> {
    FractionalOperator::new(mass, stiffness, spec)?.apply(b)
}

/// `V Λ^{-γ} Vᵀ b` from the generalized eigenproblem `K V = M V Λ`,
/// `VᵀMV = I`. Dense; intended as a validation oracle.
pub fn dense_fractional_oracle(
    mass: &DMatrix<f64>,
    stiffness: &DMatrix<f64>,
    gamma: f64,
    b: &[f64],
) -> Result<Vec<f64>> {
    let n = mass.nrows();
    if n > 1000 {
        return Err(Error::Precondition(format!("dense oracle limited to 1000 unknowns, got {n}")));
    }
    if stiffness.shape() != (n, n) || b.len() != n {
        return Err(Error::Dimension { expected: n, got: b.len() });
    }
    let chol = mass.clone().cholesky().ok_or_else(|| Error::Eigen("mass matrix is not SPD".into()))?;
    let l = chol.l();
    let l_inv = l.clone().try_inverse().ok_or_else(|| Error::Eigen("singular mass factor".into()))?;
    let sym_k = (stiffness + stiffness.transpose()) * 0.5;
    let c = &l_inv * sym_k * l_inv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    if gamma > 0.0 {
        if let Some(bad) = eig.eigenvalues.iter().find(|&&v| !(v > 0.0)) {
            return Err(Error::Eigen(format!("non-positive generalized eigenvalue {bad:.3e}")));
        }
    }
    let v = l_inv.transpose() * &eig.eigenvectors;
    let coeffs = v.transpose() * DVector::from_column_slice(b);
    let scaled = DVector::from_iterator(n, coeffs.iter().zip(eig.eigenvalues.iter()).map(|(c, l)| c * l.powf(-gamma)));
    Ok((v * scaled).iter().copied().collect())
}
