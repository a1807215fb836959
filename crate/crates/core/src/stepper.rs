//! Backward Euler in time for the nodal coefficients:
//!
//! ```text
//! (M + Δt T) αⁿ⁺¹ = M (αⁿ + θⁿ),   θⁿ = Q_k^{-γ} applied to the noise load
//! ```

use crate::assembly::OperatorSet;
use crate::error::{Error, Result};
use crate::factor::SparseSolver;
use crate::fractional::{FractionalOperator, FractionalSpec};
use crate::noise::NoiseStream;
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub alpha: Vec<f64>,
    pub n: usize,
}

impl StateVector {
    pub fn new(alpha: Vec<f64>) -> Self {
        Self { alpha, n: 0 }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::new(vec![0.0; dim])
    }

    /// `‖α‖_M`.
    pub fn mass_norm(&self, mass: &CsrMatrix) -> f64 {
        mass.bilinear(&self.alpha, &self.alpha).max(0.0).sqrt()
    }
}

/// Factored `M + Δt T` plus the factored fractional operator of one run.
#[derive(Debug, Clone)]
pub struct StepOperator {
    mass: CsrMatrix,
    lhs: SparseSolver,
    fractional: FractionalOperator,
    dt: f64,
}

pub fn build_stepper(ops: &OperatorSet, spec: FractionalSpec, dt: f64) -> Result<StepOperator> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::param("dt", format!("time step must be positive, got {dt}")));
    }
    let system = ops.mass.linear_combination(1.0, &ops.drift, dt);
    let lhs = SparseSolver::new(&system)?;
    let fractional = FractionalOperator::new(&ops.mass, &ops.covariance, spec)?;
    Ok(StepOperator { mass: ops.mass.clone(), lhs, fractional, dt })
}

impl StepOperator {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dim(&self) -> usize {
        self.mass.nrows()
    }

    pub fn spec(&self) -> &FractionalSpec {
        self.fractional.spec()
    }

    pub fn fractional(&self) -> &FractionalOperator {
        &self.fractional
    }

    /// Solves `(M + Δt T) x = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        self.lhs.solve(rhs)
    }

    /// One backward Euler step. `noise_load` is the already scaled load
    /// `√Δt·Lρ` (or a coupled load); `None` means no noise.
    pub fn step(&self, state: &StateVector, noise_load: Option<&[f64]>) -> Result<StateVector> {
        if state.alpha.len() != self.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: state.alpha.len() });
        }
        if !state.alpha.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { step: state.n });
        }
        let rhs = match noise_load {
            None => self.mass.mul_vec(&state.alpha),
            Some(load) if self.spec().gamma == 0.0 => {
                // θ = M⁻¹ b, so M(α + θ) = Mα + b
                if load.len() != self.dim() {
                    return Err(Error::Dimension { expected: self.dim(), got: load.len() });
                }
                let mut rhs = self.mass.mul_vec(&state.alpha);
                rhs.iter_mut().zip(load).for_each(|(r, b)| *r += b);
                rhs
            }
            Some(load) => {
                let theta = self.fractional.apply(load)?;
                let sum: Vec<f64> = state.alpha.iter().zip(&theta).map(|(a, t)| a + t).collect();
                self.mass.mul_vec(&sum)
            }
        };
        let alpha = self.lhs.solve(&rhs);
        if !alpha.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite { step: state.n + 1 });
        }
        Ok(StateVector { alpha, n: state.n + 1 })
    }
}

/// Supplies the noise load of each step (0-based step index).
pub trait NoiseSource {
    fn load(&mut self, step: usize) -> Option<Vec<f64>>;
}

pub struct NoNoise;

impl NoiseSource for NoNoise {
    fn load(&mut self, _step: usize) -> Option<Vec<f64>> {
        None
    }
}

/// Uncoupled noise sampled at the run's own resolution.
pub struct StreamNoise<'a> {
    pub stream: &'a NoiseStream,
    pub realization: u64,
}

impl NoiseSource for StreamNoise<'_> {
    fn load(&mut self, step: usize) -> Option<Vec<f64>> {
        Some(self.stream.load(self.realization, step as u64))
    }
}

impl<F: FnMut(usize) -> Vec<f64>> NoiseSource for F {
    fn load(&mut self, step: usize) -> Option<Vec<f64>> {
        Some(self(step))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Record {
    None,
    Final,
    Trajectory,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunOutput {
    None,
    Final(StateVector),
    Trajectory(Vec<StateVector>),
}

impl RunOutput {
    pub fn final_state(&self) -> Option<&StateVector> {
        match self {
            RunOutput::None => None,
            RunOutput::Final(s) => Some(s),
            RunOutput::Trajectory(t) => t.last(),
        }
    }
}

/// Iterates `n_steps` steps from `alpha0`; `t_final` must equal `n_steps·Δt`.
pub fn run(
    op: &StepOperator,
    t_final: f64,
    n_steps: usize,
    alpha0: Vec<f64>,
    noise: &mut dyn NoiseSource,
    record: Record,
) -> Result<RunOutput> {
    if (n_steps as f64 * op.dt() - t_final).abs() > 1e-12 * t_final.abs().max(1.0) {
        return Err(Error::Precondition(format!("{n_steps} steps of {} do not reach T = {t_final}", op.dt())));
    }
    let mut state = StateVector::new(alpha0);
    let mut trajectory = Vec::new();
    if record == Record::Trajectory {
        trajectory.push(state.clone());
    }
    for n in 0..n_steps {
        let load = noise.load(n);
        state = op.step(&state, load.as_deref())?;
        if record == Record::Trajectory {
            trajectory.push(state.clone());
        }
    }
    Ok(match record {
        Record::None => RunOutput::None,
        Record::Final => RunOutput::Final(state),
        Record::Trajectory => RunOutput::Trajectory(trajectory),
    })
}

/// Applies the fractional operator once to coefficients obtained from the
/// `γ = 0` noise path. Equal to the per-step scheme when `M⁻¹T` and `M⁻¹K`
/// commute.
pub fn apply_fractional_final(ops: &OperatorSet, spec: FractionalSpec, alpha: &[f64]) -> Result<Vec<f64>> {
    if !ops.is_commuting() {
        return Err(Error::Contract(format!(
            "final-time fractional application needs commuting operators, got {} / {}",
            ops.drift_field, ops.covariance_field
        )));
    }
    let op = FractionalOperator::new(&ops.mass, &ops.covariance, spec)?;
    apply_final_with(&op, &ops.mass, alpha)
}

/// Same as [`apply_fractional_final`] with a pre-factored operator.
pub fn apply_final_with(op: &FractionalOperator, mass: &CsrMatrix, alpha: &[f64]) -> Result<Vec<f64>> {
    if op.spec().gamma == 0.0 {
        return Ok(alpha.to_vec());
    }
    op.apply(&mass.checked_mul_vec(alpha)?)
}
