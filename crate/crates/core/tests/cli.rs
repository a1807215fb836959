use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_surface-spde"));
    c.env_remove("SURFACE_SPDE_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const MINIMAL: &str = "surface = circle\ngammas = 0.5, 1\nreference_level = 4\nreference_dt = 2^-5\n\
                       coarse_levels = 2, 3\ncoarse_dts = 2^-3, 2^-5\nrealizations = 3\nseed = 4\n";

#[test]
fn mesh_command_writes_vtk() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("sphere.vtk");
    let o = run(&["mesh", "--surface", "sphere", "--level", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("CELLS 320 1280"));
    assert!(stdout(&o).contains("N_h = 162"));
    assert!(stdout(&o).contains("quasi-uniformity ratio"));

    let out = dir.path().join("circle.vtk");
    let o = run(&["mesh", "--surface", "circle", "--level", "0", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.contains("CELLS 4 12"));
    assert!(text.contains("CELL_TYPES 4\n3\n3\n3\n3\n"));
}

#[test]
fn mesh_command_reports_bad_path() {
    let o = run(&["mesh", "--surface", "circle", "--level", "1", "--out", "/nonexistent/dir/m.vtk"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error"));
}

#[test]
fn converge_writes_both_csvs() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "study.conf", MINIMAL);
    let out = dir.path().join("out");
    let o = run(&["converge", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let records = fs::read_to_string(out.join("records.csv")).unwrap();
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(records.starts_with("gamma,h,dt,realization,rel_error\n"));
    assert_eq!(records.lines().count(), 1 + 2 * 2 * 2 * 3);
    assert!(summary.starts_with("gamma,axis,scale,median_error,fitted_slope,theoretical_slope\n"));
    for gamma in ["0.5,space", "0.5,time", "1,space", "1,time"] {
        assert!(summary.lines().any(|l| l.starts_with(gamma)), "{gamma} missing in\n{summary}");
    }
}

#[test]
fn converge_is_deterministic_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "study.conf", MINIMAL);
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("t{threads}"));
        let o = run(&["converge", &cfg, "--out", out.to_str().unwrap(), "--threads", threads]);
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push((fs::read(out.join("records.csv")).unwrap(), fs::read(out.join("summary.csv")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);

    let out = dir.path().join("seeded");
    let o = run(&["--seed", "99", "converge", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_ne!(fs::read(out.join("records.csv")).unwrap(), outputs[0].0);
}

#[test]
fn converge_validation_names_the_entry() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "bad.conf", &MINIMAL.replace("coarse_levels = 2, 3", "coarse_levels = 2, 6"));
    let o = run(&["converge", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("coarse_levels"), "{}", stderr(&o));
    assert!(stderr(&o).contains('6'));

    let cfg = write(dir.path(), "typo.conf", &format!("{MINIMAL}realisations = 3\n"));
    let o = run(&["converge", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("realisations"));
}

#[test]
fn simulate_zero_noise_keeps_constants() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "sim.conf",
        "surface = sphere\nlevel = 2\ndrift = example3-a1\ncovariance = example3-a2\ngamma = 0.5\n\
         dt = 2^-4\nzero_noise = true\ninitial_value = 1.5\n",
    );
    let out = dir.path().join("sim");
    let o = run(&["simulate", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let vtk = fs::read_to_string(out.join("u_final.vtk")).unwrap();
    let values: Vec<f64> =
        vtk.lines().skip_while(|l| !l.starts_with("LOOKUP_TABLE")).skip(1).map(|l| l.parse().unwrap()).collect();
    assert_eq!(values.len(), 162);
    // constants stay constant; the unit reaction scales them by (1 + Δt)⁻ⁿ
    let expected = 1.5 * (1.0f64 + 0.0625).powi(-16);
    assert!(values.iter().all(|v| (v - expected).abs() <= 1e-10));
    let norms = fs::read_to_string(out.join("norms.csv")).unwrap();
    assert!(norms.starts_with("step,time,mass_norm\n0,0,"));
    assert_eq!(norms.lines().count(), 1 + 17);
}

#[test]
fn simulate_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "sim.conf",
        "surface = deformed-sphere\nlevel = 2\ndrift = example3-a1\ncovariance = example3-a2\ngamma = 0.1\n\
         dt = 2^-4\nseed = 8\nsnapshot_every = 8\ndump_rho = true\n",
    );
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = run(&["simulate", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        let mut files: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        let names: Vec<String> = files.iter().map(|f| f.file_name().unwrap().to_string_lossy().into_owned()).collect();
        assert_eq!(names, ["norms.csv", "rho.bin", "u_final.vtk", "u_step_000008.vtk"]);
        outputs.push(files.iter().map(|f| fs::read(f).unwrap()).collect::<Vec<_>>());
    }
    assert_eq!(outputs[0], outputs[1]);
    let rho = &outputs[0][1];
    assert_eq!(rho.len(), 16 + 16 * 162 * 8);
}

#[test]
fn simulate_rejects_bad_gamma() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "sim.conf", "surface = sphere\ngamma = 1.5\n");
    let o = run(&["simulate", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("gamma"));
}

#[test]
fn oracle_passes() {
    let o = run(&["oracle"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let text = stdout(&o);
    assert!(text.lines().count() >= 11);
    assert!(text.lines().all(|l| l.starts_with("PASS ")), "{text}");
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        if name.starts_with("example3") {
            surface_spde::config::simulate_config(&text).unwrap();
        } else {
            surface_spde::config::study_config(&text).unwrap();
        }
        seen += 1;
    }
    assert!(seen >= 5);
}
