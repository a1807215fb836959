//! Flat `key = value` configuration files.
//!
//! One entry per line, `#` starts a comment. Numbers accept the usual float
//! syntax and powers of two written `2^-14`. Lists are comma separated.
//! Unknown keys are rejected so typos do not silently fall back to defaults.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use crate::coefficients::CoefficientField;
use crate::error::{Error, Result};
use crate::geometry::Surface;
use crate::harness::{Coupling, FractionalMode, QuadratureChoice, StudyConfig};

#[derive(Debug, Clone, Default)]
pub struct KeyValues {
    entries: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}", n + 1), format!("expected `key = value`, got `{line}`"))
            })?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(Error::config(format!("line {}", n + 1), "empty key"));
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::config(key, "given more than once"));
            }
        }
        Ok(Self { entries })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    pub fn parsed<T: FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.take(key).map(|v| v.parse::<T>().map_err(|e| Error::config(key, format!("`{v}`: {e}")))).transpose()
    }

    pub fn number(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key).map(|v| parse_number(&v).map_err(|r| Error::config(key, r))).transpose()
    }

    pub fn numbers(&mut self, key: &str) -> Result<Option<Vec<f64>>> {
        self.take(key)
            .map(|v| split_list(&v).map(|x| parse_number(x).map_err(|r| Error::config(key, r))).collect())
            .transpose()
    }

    pub fn integers(&mut self, key: &str) -> Result<Option<Vec<usize>>> {
        self.take(key)
            .map(|v| {
                split_list(&v)
                    .map(|x| x.parse::<usize>().map_err(|e| Error::config(key, format!("`{x}`: {e}"))))
                    .collect()
            })
            .transpose()
    }

    pub fn flag(&mut self, key: &str) -> Result<Option<bool>> {
        self.take(key)
            .map(|v| match v.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(Error::config(key, format!("expected true or false, got `{v}`"))),
            })
            .transpose()
    }

    /// Fails on the first key that no getter consumed.
    pub fn finish(self) -> Result<()> {
        match self.entries.into_keys().next() {
            Some(key) => Err(Error::config(key, "unknown key")),
            None => Ok(()),
        }
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// `1.5`, `1e-3` or `2^-14`.
pub fn parse_number(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let value = match s.split_once('^') {
        Some((base, exp)) => {
            let b: f64 = base.trim().parse().map_err(|_| format!("bad base in `{s}`"))?;
            let e: f64 = exp.trim().parse().map_err(|_| format!("bad exponent in `{s}`"))?;
            b.powf(e)
        }
        None => s.parse().map_err(|_| format!("`{s}` is not a number"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn quadrature(kv: &mut KeyValues) -> Result<Option<QuadratureChoice>> {
    match kv.take("k") {
        None => Ok(None),
        Some(v) if v == "auto" => Ok(Some(QuadratureChoice::Auto)),
        Some(v) => parse_number(&v).map(|k| Some(QuadratureChoice::Fixed(k))).map_err(|r| Error::config("k", r)),
    }
}

fn field(kv: &mut KeyValues, key: &str) -> Result<Option<CoefficientField>> {
    kv.parsed::<CoefficientField>(key)
}

/// Study configuration. `surface` is required; everything else defaults to
/// [`StudyConfig::new`].
///
/// Keys: `surface`, `gammas`, `k` (number or `auto`), `reference_level`,
/// `reference_dt`, `coarse_levels`, `coarse_dts`, `realizations`, `seed`,
/// `t_final`, `coupling` (`coupled` | `independent`), `drift`, `covariance`,
/// `fractional_mode` (`auto` | `per-step` | `final`).
pub fn study_config(text: &str) -> Result<StudyConfig> {
    let mut kv = KeyValues::parse(text)?;
    let surface: Surface = kv.parsed("surface")?.ok_or_else(|| Error::config("surface", "missing"))?;
    let mut c = StudyConfig::new(surface);
    if let Some(v) = kv.numbers("gammas")? {
        c.gammas = v;
    }
    if let Some(v) = quadrature(&mut kv)? {
        c.k = v;
    }
    if let Some(v) = kv.parsed("reference_level")? {
        c.reference_level = v;
    }
    if let Some(v) = kv.number("reference_dt")? {
        c.reference_dt = v;
    }
    if let Some(v) = kv.integers("coarse_levels")? {
        c.coarse_levels = v;
    }
    if let Some(v) = kv.numbers("coarse_dts")? {
        c.coarse_dts = v;
    }
    if let Some(v) = kv.parsed("realizations")? {
        c.realizations = v;
    }
    if let Some(v) = kv.parsed("seed")? {
        c.seed = v;
    }
    if let Some(v) = kv.number("t_final")? {
        c.t_final = v;
    }
    if let Some(v) = kv.parsed::<Coupling>("coupling")? {
        c.coupling = v;
    }
    if let Some(v) = field(&mut kv, "drift")? {
        c.drift = v;
    }
    if let Some(v) = field(&mut kv, "covariance")? {
        c.covariance = v;
    }
    if let Some(v) = kv.parsed::<FractionalMode>("fractional_mode")? {
        c.fractional_mode = v;
    }
    kv.finish()?;
    c.validate()?;
    Ok(c)
}

/// Single-trajectory run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateConfig {
    pub surface: Surface,
    pub level: usize,
    pub drift: CoefficientField,
    pub covariance: CoefficientField,
    pub gamma: f64,
    pub k: QuadratureChoice,
    pub dt: f64,
    pub t_final: f64,
    pub seed: u64,
    pub realization: u64,
    /// Drop the noise term.
    pub zero_noise: bool,
    /// Constant initial coefficient value.
    pub initial_value: f64,
    /// Also write a snapshot every this many steps (0: final state only).
    pub snapshot_every: usize,
    /// Write the standard normals of every step to `rho.bin`.
    pub dump_rho: bool,
    pub out_dir: Option<PathBuf>,
}

impl SimulateConfig {
    pub fn new(surface: Surface) -> Self {
        Self {
            surface,
            level: 3,
            drift: CoefficientField::Laplace,
            covariance: CoefficientField::ShiftedLaplace,
            gamma: 0.5,
            k: QuadratureChoice::Fixed(0.5),
            dt: 2f64.powi(-6),
            t_final: 1.0,
            seed: 0,
            realization: 0,
            zero_noise: false,
            initial_value: 0.0,
            snapshot_every: 0,
            dump_rho: false,
            out_dir: None,
        }
    }
}

/// Keys: `surface` (required), `level`, `drift`, `covariance`, `gamma`, `k`,
/// `dt`, `t_final`, `seed`, `realization`, `zero_noise`, `initial_value`,
/// `snapshot_every`, `dump_rho`, `out_dir`.
pub fn simulate_config(text: &str) -> Result<SimulateConfig> {
    let mut kv = KeyValues::parse(text)?;
    let surface: Surface = kv.parsed("surface")?.ok_or_else(|| Error::config("surface", "missing"))?;
    let mut c = SimulateConfig::new(surface);
    if let Some(v) = kv.parsed("level")? {
        c.level = v;
    }
    if let Some(v) = field(&mut kv, "drift")? {
        c.drift = v;
    }
    if let Some(v) = field(&mut kv, "covariance")? {
        c.covariance = v;
    }
    if let Some(v) = kv.number("gamma")? {
        c.gamma = v;
    }
    if let Some(v) = quadrature(&mut kv)? {
        c.k = v;
    }
    if let Some(v) = kv.number("dt")? {
        c.dt = v;
    }
    if let Some(v) = kv.number("t_final")? {
        c.t_final = v;
    }
    if let Some(v) = kv.parsed("seed")? {
        c.seed = v;
    }
    if let Some(v) = kv.parsed("realization")? {
        c.realization = v;
    }
    if let Some(v) = kv.flag("zero_noise")? {
        c.zero_noise = v;
    }
    if let Some(v) = kv.number("initial_value")? {
        c.initial_value = v;
    }
    if let Some(v) = kv.parsed("snapshot_every")? {
        c.snapshot_every = v;
    }
    if let Some(v) = kv.flag("dump_rho")? {
        c.dump_rho = v;
    }
    if let Some(v) = kv.take("out_dir") {
        c.out_dir = Some(PathBuf::from(v));
    }
    kv.finish()?;
    if !(0.0..=1.0).contains(&c.gamma) {
        return Err(Error::config("gamma", format!("{} is outside [0, 1]", c.gamma)));
    }
    if !(c.dt > 0.0) {
        return Err(Error::config("dt", format!("must be positive, got {}", c.dt)));
    }
    if !(c.t_final > 0.0) {
        return Err(Error::config("t_final", format!("must be positive, got {}", c.t_final)));
    }
    if let QuadratureChoice::Fixed(k) = c.k {
        if !(k > 0.0) {
            return Err(Error::config("k", format!("must be positive, got {k}")));
        }
    }
    Ok(c)
}
