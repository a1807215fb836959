//! Command implementations behind the `surface-spde` binary.

use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::assembly::OperatorSet;
use crate::config::{simulate_config, study_config, SimulateConfig};
use crate::error::{Error, Result};
use crate::fractional::{choose_k, dense_fractional_oracle, FractionalOperator, FractionalSpec};
use crate::geometry::Surface;
use crate::harness::{run_study, ConvergenceReport, QuadratureChoice, K_MAX};
use crate::mesh::{coarse_to_fine_matrix, generate_mesh, MeshMetrics};
use crate::noise::{coarsen_time, write_rho_dump, NoiseStream};
use crate::sparse::norm2;
use crate::stepper::{build_stepper, StateVector};
use crate::vtk::write_vtk_file;

/// Environment variable read for the default worker count.
pub const THREADS_ENV: &str = "SURFACE_SPDE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "surface-spde",
    version,
    about = "Surface finite elements for parabolic SPDEs with Whittle-Matern noise"
)]
pub struct Cli {
    /// Overrides the seed of the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (default: $SURFACE_SPDE_THREADS or all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a mesh, write it as VTK and print its metrics.
    Mesh {
        #[arg(long)]
        surface: Surface,
        #[arg(long)]
        level: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one trajectory and export u(T) plus the per-step mass norms.
    Simulate {
        config: PathBuf,
        /// Output directory (overrides `out_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a convergence study and write `records.csv` and `summary.csv`.
    Converge {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Check the fractional solver and the noise covariance against dense references.
    Oracle,
}

/// Runs the parsed command line and returns the process exit code.
pub fn run_cli(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(true) => 0,
        Ok(false) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        2
    } else {
        1
    }
}

fn execute(cli: Cli) -> Result<bool> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Mesh { surface, level, out } => {
            let m = cmd_mesh(surface, level, &out)?;
            println!("h = {}", m.h);
            println!("N_h = {}", m.num_vertices);
            println!("quasi-uniformity ratio = {}", m.quasi_uniformity_ratio);
            Ok(true)
        }
        Command::Simulate { config, out } => {
            let mut cfg = simulate_config(&read_config(&config)?)?;
            if let Some(seed) = cli.seed {
                cfg.seed = seed;
            }
            if out.is_some() {
                cfg.out_dir = out;
            }
            if cfg.out_dir.is_none() {
                cfg.out_dir = Some(PathBuf::from("."));
            }
            let result = cmd_simulate(&cfg)?;
            println!("steps = {}", result.norms.len() - 1);
            println!("final mass norm = {}", result.norms.last().unwrap());
            println!("nodal std = {}", nodal_std(&result.final_alpha));
            for f in &result.files {
                println!("wrote {}", f.display());
            }
            Ok(true)
        }
        Command::Converge { config, out } => {
            let report = cmd_converge(&config, &out, cli.seed)?;
            print!("{report}");
            Ok(true)
        }
        Command::Oracle => {
            let checks = cmd_oracle()?;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(checks.iter().all(|c| c.passed))
        }
    }
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let threads = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.trim().parse().map_err(|_| Error::config(THREADS_ENV, format!("`{v}` is not a count")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::config("threads", "must be at least 1"));
        }
        // a pool configured earlier in the process stays in place
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn read_config(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::config(path.display().to_string(), e.to_string()))
}

pub struct MeshSummary {
    pub h: f64,
    pub num_vertices: usize,
    pub num_simplices: usize,
    pub quasi_uniformity_ratio: f64,
}

pub fn cmd_mesh(surface: Surface, level: usize, out: &Path) -> Result<MeshSummary> {
    let mesh = generate_mesh(surface, level);
    mesh.validate()?;
    let MeshMetrics { h, quasi_uniformity_ratio, .. } = mesh.metrics()?;
    write_vtk_file(out, &mesh, &[])?;
    Ok(MeshSummary {
        h,
        num_vertices: mesh.num_vertices(),
        num_simplices: mesh.num_simplices(),
        quasi_uniformity_ratio,
    })
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub final_alpha: Vec<f64>,
    /// `‖αⁿ‖_M` for `n = 0..=steps`.
    pub norms: Vec<f64>,
    pub files: Vec<PathBuf>,
}

/// Population standard deviation of the nodal values.
pub fn nodal_std(alpha: &[f64]) -> f64 {
    let n = alpha.len() as f64;
    let mean = alpha.iter().sum::<f64>() / n;
    (alpha.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Runs one trajectory with the fractional power applied at every step.
/// Writes `u_final.vtk`, `norms.csv` and optionally snapshots and `rho.bin`
/// when `out_dir` is set.
pub fn cmd_simulate(cfg: &SimulateConfig) -> Result<SimulationOutput> {
    let mesh = generate_mesh(cfg.surface, cfg.level);
    let ops = OperatorSet::assemble(&mesh, cfg.drift, cfg.covariance)?;
    let k = match cfg.k {
        QuadratureChoice::Fixed(k) => k,
        QuadratureChoice::Auto if cfg.gamma > 0.0 && cfg.gamma < 1.0 => choose_k(cfg.gamma, mesh.h(), K_MAX)?,
        QuadratureChoice::Auto => K_MAX,
    };
    let spec = FractionalSpec::new(cfg.gamma, k)?;
    let op = build_stepper(&ops, spec, cfg.dt)?;
    let steps = (cfg.t_final / cfg.dt).round() as usize;
    if steps == 0 || (steps as f64 * cfg.dt - cfg.t_final).abs() > 1e-12 * cfg.t_final.max(1.0) {
        return Err(Error::config("dt", format!("{} does not divide t_final {}", cfg.dt, cfg.t_final)));
    }
    let stream = NoiseStream::new(cfg.seed, &ops.mass, cfg.dt, mesh.id())?;
    if let Some(dir) = &cfg.out_dir {
        fs::create_dir_all(dir)?;
    }
    let mut files = Vec::new();
    let mut rho_records = Vec::new();
    let mut state = StateVector::new(vec![cfg.initial_value; mesh.num_vertices()]);
    let mut norms = vec![state.mass_norm(&ops.mass)];
    for n in 0..steps {
        let load = if cfg.zero_noise {
            None
        } else {
            let inc = stream.sample_increment(cfg.realization, n as u64, cfg.dt)?;
            if cfg.dump_rho {
                rho_records.push(inc.rho);
            }
            Some(inc.load)
        };
        state = op.step(&state, load.as_deref())?;
        norms.push(state.mass_norm(&ops.mass));
        if let Some(dir) = &cfg.out_dir {
            if cfg.snapshot_every > 0 && (n + 1).is_multiple_of(cfg.snapshot_every) && n + 1 < steps {
                let path = dir.join(format!("u_step_{:06}.vtk", n + 1));
                write_vtk_file(&path, &mesh, &[("u", &state.alpha)])?;
                files.push(path);
            }
        }
    }
    if let Some(dir) = &cfg.out_dir {
        let path = dir.join("u_final.vtk");
        write_vtk_file(&path, &mesh, &[("u", &state.alpha)])?;
        files.push(path);
        let path = dir.join("norms.csv");
        let mut w = BufWriter::new(File::create(&path)?);
        writeln!(w, "step,time,mass_norm")?;
        for (n, v) in norms.iter().enumerate() {
            writeln!(w, "{n},{},{v}", n as f64 * cfg.dt)?;
        }
        w.flush()?;
        files.push(path);
        if cfg.dump_rho && !cfg.zero_noise {
            let path = dir.join("rho.bin");
            write_rho_dump(BufWriter::new(File::create(&path)?), mesh.num_vertices(), &rho_records)?;
            files.push(path);
        }
    }
    Ok(SimulationOutput { final_alpha: state.alpha, norms, files })
}

/// Runs the study described by `config` and writes `records.csv` and
/// `summary.csv` into `out`.
pub fn cmd_converge(config: &Path, out: &Path, seed: Option<u64>) -> Result<ConvergenceReport> {
    let mut study = study_config(&read_config(config)?)?;
    if let Some(seed) = seed {
        study.seed = seed;
    }
    fs::create_dir_all(out)?;
    let report = run_study(&study)?;
    let mut w = BufWriter::new(File::create(out.join("records.csv"))?);
    report.write_records_csv(&mut w)?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(out.join("summary.csv"))?);
    report.write_summary_csv(&mut w)?;
    w.flush()?;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct OracleCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn relative_distance(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm2(&d) / norm2(b)
}

/// Sinc quadrature against the dense eigen-decomposition, and the empirical
/// covariance of plain and coupled noise loads against `Δt·M` and
/// `Δt·A M̃ Aᵀ`.
pub fn cmd_oracle() -> Result<Vec<OracleCheck>> {
    let mut checks = Vec::new();
    let k = 0.5;
    let tol = 10.0 * (-PI * PI / (2.0 * k)).exp();
    for (surface, level) in [(Surface::Circle, 4), (Surface::Sphere, 1), (Surface::DeformedSphere, 1)] {
        let mesh = generate_mesh(surface, level);
        let ops = OperatorSet::assemble(
            &mesh,
            crate::coefficients::CoefficientField::Laplace,
            crate::coefficients::CoefficientField::ShiftedLaplace,
        )?;
        let b = crate::noise::standard_normals(1, 0, 0, mesh.num_vertices());
        for gamma in [0.25, 0.5, 0.75] {
            let got = FractionalOperator::new(&ops.mass, &ops.covariance, FractionalSpec::new(gamma, k)?)?.apply(&b)?;
            let want = dense_fractional_oracle(&ops.mass.to_dense(), &ops.covariance.to_dense(), gamma, &b)?;
            let err = relative_distance(&got, &want);
            checks.push(OracleCheck {
                name: format!("fractional {} gamma={gamma}", mesh.id()),
                passed: err <= tol,
                detail: format!("relative error {err:.3e} (tolerance {tol:.3e})"),
            });
        }
    }

    let samples = 10_000;
    let dt = 0.01;
    let fine = generate_mesh(Surface::Circle, 1);
    let coarse = generate_mesh(Surface::Circle, 0);
    let m = crate::assembly::assemble_mass(&fine)?;
    let stream = NoiseStream::new(3, &m, dt, fine.id())?;
    let a = coarse_to_fine_matrix(&coarse, &fine, Surface::Circle)?;
    let plain: Vec<Vec<f64>> = (0..samples).map(|i| stream.load(0, i)).collect();
    let target = m.to_dense() * dt;
    let err = covariance_error(&plain, &target);
    checks.push(OracleCheck {
        name: format!("noise covariance {}", fine.id()),
        passed: err <= 0.05,
        detail: format!("relative Frobenius error {err:.3e} (tolerance 5e-2)"),
    });
    let coupled: Vec<Vec<f64>> = (0..samples)
        .map(|i| {
            let sum = coarsen_time(&[stream.load(1, 2 * i), stream.load(1, 2 * i + 1)], 2)?;
            a.restrict(&sum)
        })
        .collect::<Result<_>>()?;
    let ad = a.matrix.to_dense();
    let target = &ad * m.to_dense() * ad.transpose() * (2.0 * dt);
    let err = covariance_error(&coupled, &target);
    checks.push(OracleCheck {
        name: format!("coupled noise covariance {} -> {}", fine.id(), coarse.id()),
        passed: err <= 0.05,
        detail: format!("relative Frobenius error {err:.3e} (tolerance 5e-2)"),
    });
    Ok(checks)
}

/// `‖Ĉ − C‖_F / ‖C‖_F` for the zero-mean empirical covariance `Ĉ`.
pub fn covariance_error(samples: &[Vec<f64>], target: &nalgebra::DMatrix<f64>) -> f64 {
    let n = target.nrows();
    let mut c = nalgebra::DMatrix::<f64>::zeros(n, n);
    for s in samples {
        let v = nalgebra::DVector::from_column_slice(s);
        c += &v * v.transpose();
    }
    c /= samples.len() as f64;
    (c - target).norm() / target.norm()
}
