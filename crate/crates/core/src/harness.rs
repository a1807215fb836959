//! Coarse-versus-reference convergence studies.
//!
//! A study runs one reference discretization and a grid of coarser ones on
//! the same Wiener path. Coarse loads are built from the fine loads by time
//! summation followed by the coupling matrix `A`. Each coarse final state is
//! compared with the reference through
//!
//! ```text
//! ê² = (Aᵀα − α̃)ᵀ M̃ (Aᵀα − α̃) / (α̃ᵀ M̃ α̃)
//! ```
//!
//! and the medians over realizations are fitted on a log-log scale.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::assembly::OperatorSet;
use crate::coefficients::CoefficientField;
use crate::error::{Error, Result};
use crate::fractional::{choose_k, FractionalOperator, FractionalSpec};
use crate::geometry::Surface;
use crate::mesh::{coarse_to_fine_matrix, generate_mesh, CouplingOperator, SurfaceMesh};
use crate::noise::NoiseStream;
use crate::sparse::CsrMatrix;
use crate::stepper::{apply_final_with, build_stepper, StateVector, StepOperator};

/// Upper bound on the quadrature resolution used by `k = auto`.
pub const K_MAX: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadratureChoice {
    Fixed(f64),
    /// `choose_k(γ, h̃, K_MAX)` on the reference mesh, shared by all levels.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// Coarse runs consume the fine path.
    Coupled,
    /// Coarse runs draw their own increments (a baseline without coupling).
    Independent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FractionalMode {
    /// Final-time application when the operators commute, per step otherwise.
    Auto,
    PerStep,
    Final,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub surface: Surface,
    pub gammas: Vec<f64>,
    pub k: QuadratureChoice,
    pub reference_level: usize,
    pub reference_dt: f64,
    pub coarse_levels: Vec<usize>,
    pub coarse_dts: Vec<f64>,
    pub realizations: usize,
    pub seed: u64,
    pub t_final: f64,
    pub coupling: Coupling,
    pub drift: CoefficientField,
    pub covariance: CoefficientField,
    pub fractional_mode: FractionalMode,
}

impl StudyConfig {
    /// Defaults of the model `du = Δu dt + (I − Δ)^{-γ} dW` on `surface`.
    pub fn new(surface: Surface) -> Self {
        Self {
            surface,
            gammas: vec![0.5],
            k: QuadratureChoice::Auto,
            reference_level: 6,
            reference_dt: 2f64.powi(-10),
            coarse_levels: vec![3, 4, 5],
            coarse_dts: vec![2f64.powi(-10)],
            realizations: 8,
            seed: 0,
            t_final: 1.0,
            coupling: Coupling::Coupled,
            drift: CoefficientField::Laplace,
            covariance: CoefficientField::ShiftedLaplace,
            fractional_mode: FractionalMode::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.gammas.is_empty() {
            return Err(Error::config("gammas", "at least one value is required"));
        }
        for &g in &self.gammas {
            if !(0.0..=1.0).contains(&g) {
                return Err(Error::config("gammas", format!("entry {g} is outside [0, 1]")));
            }
        }
        if let QuadratureChoice::Fixed(k) = self.k {
            if !(k > 0.0) || !k.is_finite() {
                return Err(Error::config("k", format!("must be positive, got {k}")));
            }
        }
        if !(self.reference_dt > 0.0) || !self.reference_dt.is_finite() {
            return Err(Error::config("reference_dt", format!("must be positive, got {}", self.reference_dt)));
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(Error::config("t_final", format!("must be positive, got {}", self.t_final)));
        }
        steps_for(self.t_final, self.reference_dt).map_err(|r| Error::config("reference_dt", r))?;
        if self.coarse_levels.is_empty() {
            return Err(Error::config("coarse_levels", "at least one level is required"));
        }
        if self.coarse_dts.is_empty() {
            return Err(Error::config("coarse_dts", "at least one time step is required"));
        }
        for &l in &self.coarse_levels {
            if l > self.reference_level {
                return Err(Error::config(
                    "coarse_levels",
                    format!("entry {l} is finer than reference_level {}", self.reference_level),
                ));
            }
        }
        for &dt in &self.coarse_dts {
            if !(dt >= self.reference_dt) {
                return Err(Error::config(
                    "coarse_dts",
                    format!("entry {dt} is finer than reference_dt {}", self.reference_dt),
                ));
            }
            time_ratio(dt, self.reference_dt).map_err(|r| Error::config("coarse_dts", r))?;
            steps_for(self.t_final, dt).map_err(|r| Error::config("coarse_dts", r))?;
        }
        if self.realizations == 0 {
            return Err(Error::config("realizations", "must be at least 1"));
        }
        if self.fractional_mode == FractionalMode::Final && !self.commuting() {
            return Err(Error::config(
                "fractional_mode",
                format!("`final` needs commuting operators, got {} / {}", self.drift, self.covariance),
            ));
        }
        Ok(())
    }

    fn commuting(&self) -> bool {
        self.drift.is_laplace_plus_mass() && self.covariance.is_laplace_plus_mass()
    }

    fn uses_final(&self) -> bool {
        match self.fractional_mode {
            FractionalMode::Auto => self.commuting(),
            FractionalMode::PerStep => false,
            FractionalMode::Final => true,
        }
    }
}

fn steps_for(t_final: f64, dt: f64) -> std::result::Result<usize, String> {
    let n = (t_final / dt).round();
    if n < 1.0 || (n * dt - t_final).abs() > 1e-12 * t_final.max(1.0) {
        return Err(format!("entry {dt} does not divide t_final {t_final}"));
    }
    Ok(n as usize)
}

fn time_ratio(dt: f64, reference_dt: f64) -> std::result::Result<usize, String> {
    let r = (dt / reference_dt).round();
    if r < 1.0 || (r * reference_dt - dt).abs() > 1e-12 * dt {
        return Err(format!("entry {dt} is not an integer multiple of reference_dt {reference_dt}"));
    }
    Ok(r as usize)
}

/// `γ`, measured `h` of the coarse mesh, coarse `Δt`, realization, `ê`.
/// A failed run is recorded with `rel_error = NaN`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRecord {
    pub gamma: f64,
    pub h: f64,
    pub dt: f64,
    pub realization: usize,
    pub rel_error: f64,
}

impl ConvergenceRecord {
    pub fn failed(&self) -> bool {
        !self.rel_error.is_finite()
    }
}

/// Relative `M̃`-norm distance between the interpolated coarse solution and
/// the reference.
pub fn relative_error(
    alpha_coarse: &[f64],
    alpha_ref: &[f64],
    coupling: &CouplingOperator,
    mass_ref: &CsrMatrix,
) -> Result<f64> {
    if alpha_ref.len() != mass_ref.nrows() {
        return Err(Error::Dimension { expected: mass_ref.nrows(), got: alpha_ref.len() });
    }
    let denom = mass_ref.bilinear(alpha_ref, alpha_ref);
    if !(denom > 0.0) {
        return Err(Error::Precondition("reference solution has zero norm".into()));
    }
    let diff: Vec<f64> = coupling.interpolate(alpha_coarse)?.iter().zip(alpha_ref).map(|(a, b)| a - b).collect();
    if diff.len() != alpha_ref.len() {
        return Err(Error::Dimension { expected: alpha_ref.len(), got: diff.len() });
    }
    Ok((mass_ref.bilinear(&diff, &diff).max(0.0) / denom).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least squares line through `(ln scale, ln error)`.
pub fn fit_rate(samples: &[(f64, f64)]) -> Result<LineFit> {
    for &(s, e) in samples {
        if !(s > 0.0) || !(e > 0.0) || !s.is_finite() || !e.is_finite() {
            return Err(Error::param("samples", format!("entries must be positive, got ({s}, {e})")));
        }
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(s, e)| (s.ln(), e.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if pts.len() < 2 || !(sxx > 1e-24) {
        return Err(Error::param("samples", "at least two distinct scales are required"));
    }
    let slope = sxy / sxx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(LineFit { slope, intercept: my - slope * mx, r_squared })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoreticalRate {
    pub space: f64,
    pub time: f64,
}

/// Supremum of the admissible rates: `θ = min(2γ + 1 − d/2, 2)` in space and
/// `θ/2` in time.
pub fn theoretical_rate(gamma: f64, d: usize) -> Result<TheoreticalRate> {
    let lower = d as f64 / 4.0 - 0.5;
    if !(gamma > lower && (0.0..=1.0).contains(&gamma)) {
        return Err(Error::param("gamma", format!("{gamma} is not admissible for d = {d}")));
    }
    let space = (2.0 * gamma + 1.0 - d as f64 / 2.0).min(2.0);
    Ok(TheoreticalRate { space, time: space / 2.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Space,
    Time,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::Space => "space",
            Axis::Time => "time",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MedianEntry {
    pub gamma: f64,
    pub h: f64,
    pub dt: f64,
    pub median: f64,
    pub failed: usize,
}

/// One axis of one `γ`: the median errors along the axis and their fit.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSeries {
    pub gamma: f64,
    pub axis: Axis,
    /// `(scale, median error)` from coarse to fine.
    pub points: Vec<(f64, f64)>,
    pub fit: Option<LineFit>,
    pub theoretical: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub config: StudyConfig,
    pub reference_h: f64,
    pub records: Vec<ConvergenceRecord>,
    pub medians: Vec<MedianEntry>,
    pub series: Vec<RateSeries>,
    pub warnings: Vec<String>,
}

impl ConvergenceReport {
    pub fn series(&self, gamma: f64, axis: Axis) -> Option<&RateSeries> {
        self.series.iter().find(|s| s.gamma == gamma && s.axis == axis)
    }

    pub fn slope(&self, gamma: f64, axis: Axis) -> Option<f64> {
        self.series(gamma, axis).and_then(|s| s.fit).map(|f| f.slope)
    }

    pub fn write_records_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "gamma,h,dt,realization,rel_error")?;
        for r in &self.records {
            writeln!(w, "{},{},{},{},{}", r.gamma, r.h, r.dt, r.realization, r.rel_error)?;
        }
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "gamma,axis,scale,median_error,fitted_slope,theoretical_slope")?;
        for s in &self.series {
            let fitted = s.fit.map_or(f64::NAN, |f| f.slope);
            let theo = s.theoretical.unwrap_or(f64::NAN);
            for &(scale, err) in &s.points {
                writeln!(w, "{},{},{},{},{},{}", s.gamma, s.axis.name(), scale, err, fitted, theo)?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for ConvergenceReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.series {
            let fitted = s.fit.map_or("n/a".to_string(), |f| format!("{:.3}", f.slope));
            let theo = s.theoretical.map_or("n/a".to_string(), |t| format!("{t:.3}"));
            writeln!(f, "gamma {} {:5}: fitted {fitted} theoretical {theo}", s.gamma, s.axis.name())?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        Ok(())
    }
}

struct Level {
    mesh: SurfaceMesh,
    ops: OperatorSet,
    coupling: CouplingOperator,
}

/// Steppers and final-time operators of one noise path family.
struct PathGroup {
    /// `γ` values reported from this path, with their final-time operators
    /// (reference first, then one per coarse level).
    outputs: Vec<(f64, Option<Vec<FractionalOperator>>)>,
    reference: StepOperator,
    /// `coarse[level][dt]`
    coarse: Vec<Vec<StepOperator>>,
}

fn spec_for(config: &StudyConfig, gamma: f64, reference_h: f64) -> Result<FractionalSpec> {
    let k = match config.k {
        QuadratureChoice::Fixed(k) => k,
        QuadratureChoice::Auto if gamma > 0.0 && gamma < 1.0 => choose_k(gamma, reference_h, K_MAX)?,
        QuadratureChoice::Auto => K_MAX,
    };
    FractionalSpec::new(gamma, k)
}

pub fn run_study(config: &StudyConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let surface = config.surface;
    let fine_mesh = generate_mesh(surface, config.reference_level);
    let fine_ops = OperatorSet::assemble(&fine_mesh, config.drift, config.covariance)?;
    let reference_h = fine_mesh.h();
    let levels = config
        .coarse_levels
        .par_iter()
        .map(|&l| {
            let mesh = generate_mesh(surface, l);
            let ops = OperatorSet::assemble(&mesh, config.drift, config.covariance)?;
            let coupling = coarse_to_fine_matrix(&mesh, &fine_mesh, surface)?;
            Ok(Level { mesh, ops, coupling })
        })
        .collect::<Result<Vec<_>>>()?;

    let final_time = config.uses_final();
    let group_gammas: Vec<f64> = if final_time { vec![0.0] } else { config.gammas.clone() };
    let mut groups = Vec::new();
    for &pg in &group_gammas {
        let path_spec = spec_for(config, pg, reference_h)?;
        let reference = build_stepper(&fine_ops, path_spec, config.reference_dt)?;
        let coarse = levels
            .iter()
            .map(|lv| config.coarse_dts.iter().map(|&dt| build_stepper(&lv.ops, path_spec, dt)).collect())
            .collect::<Result<Vec<Vec<_>>>>()?;
        let outputs = if final_time {
            config
                .gammas
                .iter()
                .map(|&g| {
                    let spec = spec_for(config, g, reference_h)?;
                    let mut ops = vec![FractionalOperator::new(&fine_ops.mass, &fine_ops.covariance, spec)?];
                    for lv in &levels {
                        ops.push(FractionalOperator::new(&lv.ops.mass, &lv.ops.covariance, spec)?);
                    }
                    Ok((g, Some(ops)))
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            vec![(pg, None)]
        };
        groups.push(PathGroup { outputs, reference, coarse });
    }

    let stream = NoiseStream::new(config.seed, &fine_ops.mass, config.reference_dt, fine_mesh.id())?;
    let independent = match config.coupling {
        Coupling::Coupled => None,
        Coupling::Independent => Some(
            levels
                .iter()
                .enumerate()
                .map(|(li, lv)| {
                    config
                        .coarse_dts
                        .iter()
                        .enumerate()
                        .map(|(di, &dt)| {
                            let salt = 1 + (li * config.coarse_dts.len() + di) as u64;
                            let seed = config.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
                            NoiseStream::new(seed, &lv.ops.mass, dt, lv.mesh.id())
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?,
        ),
    };

    let ctx =
        Context { config, fine_ops: &fine_ops, levels: &levels, stream: &stream, independent: independent.as_deref() };
    let per_realization: Vec<Vec<ConvergenceRecord>> = (0..config.realizations)
        .into_par_iter()
        .map(|r| groups.iter().flat_map(|g| ctx.realization(g, r)).collect())
        .collect();

    let mut records: Vec<ConvergenceRecord> = per_realization.into_iter().flatten().collect();
    let gamma_pos = |g: f64| config.gammas.iter().position(|&x| x == g).unwrap_or(usize::MAX);
    let level_pos = |h: f64| levels.iter().position(|lv| lv.mesh.h() == h).unwrap_or(usize::MAX);
    let dt_pos = |dt: f64| config.coarse_dts.iter().position(|&x| x == dt).unwrap_or(usize::MAX);
    records.sort_by_key(|r| (gamma_pos(r.gamma), level_pos(r.h), dt_pos(r.dt), r.realization));

    let mut medians = Vec::new();
    for &g in &config.gammas {
        for lv in &levels {
            for &dt in &config.coarse_dts {
                let mut errs: Vec<f64> = records
                    .iter()
                    .filter(|r| r.gamma == g && r.h == lv.mesh.h() && r.dt == dt)
                    .map(|r| r.rel_error)
                    .collect();
                let total = errs.len();
                errs.retain(|e| e.is_finite());
                let failed = total - errs.len();
                medians.push(MedianEntry { gamma: g, h: lv.mesh.h(), dt, median: median(&mut errs), failed });
            }
        }
    }

    let d = surface.dim();
    let finest_dt = config.coarse_dts.iter().cloned().fold(f64::INFINITY, f64::min);
    let finest_h = levels.iter().map(|lv| lv.mesh.h()).fold(f64::INFINITY, f64::min);
    let mut series = Vec::new();
    let mut warnings = Vec::new();
    for &g in &config.gammas {
        let theo = theoretical_rate(g, d).ok();
        for axis in [Axis::Space, Axis::Time] {
            let mut points: Vec<(f64, f64)> = medians
                .iter()
                .filter(|m| m.gamma == g)
                .filter(|m| match axis {
                    Axis::Space => m.dt == finest_dt,
                    Axis::Time => m.h == finest_h,
                })
                .map(|m| (if axis == Axis::Space { m.h } else { m.dt }, m.median))
                .collect();
            points.sort_by(|a, b| b.0.total_cmp(&a.0));
            points.dedup_by(|a, b| a.0 == b.0);
            let usable: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.1 > 0.0 && p.1.is_finite()).collect();
            let fit = fit_rate(&usable).ok();
            let theoretical = theo.map(|t| if axis == Axis::Space { t.space } else { t.time });
            check_trend(g, axis, &usable, &mut warnings);
            if let (Some(f), Some(t)) = (fit, theoretical) {
                if f.slope > t + 0.5 {
                    warnings.push(format!(
                        "gamma {g} {}: fitted slope {:.3} exceeds the theoretical rate {t} by more than 0.5",
                        axis.name(),
                        f.slope
                    ));
                }
            }
            series.push(RateSeries { gamma: g, axis, points, fit, theoretical });
        }
    }
    for m in &medians {
        if m.failed > 0 {
            warnings.push(format!("gamma {} h {} dt {}: {} failed records", m.gamma, m.h, m.dt, m.failed));
        }
    }
    Ok(ConvergenceReport { config: config.clone(), reference_h, records, medians, series, warnings })
}

/// Flags a median that grows over one of the last two refinements.
fn check_trend(gamma: f64, axis: Axis, points: &[(f64, f64)], warnings: &mut Vec<String>) {
    let n = points.len();
    for i in n.saturating_sub(3)..n.saturating_sub(1) {
        if points[i + 1].1 > points[i].1 {
            warnings.push(format!(
                "gamma {gamma} {}: median error grows from {:.3e} to {:.3e} when refining {} -> {}",
                axis.name(),
                points[i].1,
                points[i + 1].1,
                points[i].0,
                points[i + 1].0
            ));
        }
    }
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

struct Context<'a> {
    config: &'a StudyConfig,
    fine_ops: &'a OperatorSet,
    levels: &'a [Level],
    stream: &'a NoiseStream,
    independent: Option<&'a [Vec<NoiseStream>]>,
}

impl Context<'_> {
    fn realization(&self, group: &PathGroup, r: usize) -> Vec<ConvergenceRecord> {
        let cfg = self.config;
        let nl = self.levels.len();
        let nd = cfg.coarse_dts.len();
        let ratios: Vec<usize> = cfg.coarse_dts.iter().map(|&dt| time_ratio(dt, cfg.reference_dt).unwrap()).collect();
        let n_ref = steps_for(cfg.t_final, cfg.reference_dt).unwrap();
        let dim = self.fine_ops.dim();

        let mut reference: Result<StateVector> = Ok(StateVector::zeros(dim));
        let mut coarse: Vec<Vec<Result<StateVector>>> =
            self.levels.iter().map(|lv| (0..nd).map(|_| Ok(StateVector::zeros(lv.ops.dim()))).collect()).collect();
        let mut sums = vec![vec![0.0; dim]; nd];
        for n in 0..n_ref {
            let load = self.stream.load(r as u64, n as u64);
            reference = reference.and_then(|s| group.reference.step(&s, Some(&load)));
            for (d, sum) in sums.iter_mut().enumerate() {
                if self.independent.is_none() {
                    sum.iter_mut().zip(&load).for_each(|(s, v)| *s += v);
                }
                if !(n + 1).is_multiple_of(ratios[d]) {
                    continue;
                }
                for l in 0..nl {
                    let step = (n + 1) / ratios[d] - 1;
                    let state = std::mem::replace(&mut coarse[l][d], Err(Error::Contract(String::new())));
                    coarse[l][d] = state.and_then(|s| {
                        let coarse_load = match self.independent {
                            Some(streams) => streams[l][d].load(r as u64, step as u64),
                            None => self.levels[l].coupling.restrict(sum)?,
                        };
                        group.coarse[l][d].step(&s, Some(&coarse_load))
                    });
                }
                sum.iter_mut().for_each(|v| *v = 0.0);
            }
        }

        let mut out = Vec::new();
        for (gamma, finals) in &group.outputs {
            let finish = |state: &Result<StateVector>, which: usize, mass: &CsrMatrix| -> Result<Vec<f64>> {
                let state = state.as_ref().map_err(clone_error)?;
                match finals {
                    Some(ops) => apply_final_with(&ops[which], mass, &state.alpha),
                    None => Ok(state.alpha.clone()),
                }
            };
            let alpha_ref = finish(&reference, 0, &self.fine_ops.mass);
            for (l, lv) in self.levels.iter().enumerate() {
                for (d, &dt) in cfg.coarse_dts.iter().enumerate() {
                    let err = alpha_ref.as_ref().map_err(clone_error).and_then(|a_ref| {
                        let alpha = finish(&coarse[l][d], l + 1, &lv.ops.mass)?;
                        relative_error(&alpha, a_ref, &lv.coupling, &self.fine_ops.mass)
                    });
                    out.push(ConvergenceRecord {
                        gamma: *gamma,
                        h: lv.mesh.h(),
                        dt,
                        realization: r,
                        rel_error: err.unwrap_or(f64::NAN),
                    });
                }
            }
        }
        out
    }
}

fn clone_error(e: &Error) -> Error {
    Error::Contract(e.to_string())
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Coupling::Coupled => "coupled",
            Coupling::Independent => "independent",
        })
    }
}

impl FromStr for Coupling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "coupled" => Ok(Coupling::Coupled),
            "independent" => Ok(Coupling::Independent),
            other => Err(Error::param("coupling", format!("expected coupled or independent, got `{other}`"))),
        }
    }
}

impl fmt::Display for FractionalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FractionalMode::Auto => "auto",
            FractionalMode::PerStep => "per-step",
            FractionalMode::Final => "final",
        })
    }
}

impl FromStr for FractionalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(FractionalMode::Auto),
            "per-step" => Ok(FractionalMode::PerStep),
            "final" => Ok(FractionalMode::Final),
            other => Err(Error::param("fractional_mode", format!("expected auto, per-step or final, got `{other}`"))),
        }
    }
}
