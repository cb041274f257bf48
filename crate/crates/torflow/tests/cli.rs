//! End-to-end driver tests: configuration handling, exit codes, and
//! deterministic serialization.

use std::path::{Path, PathBuf};

use torflow::cli;

struct TempDir {
    path: PathBuf,
}

impl TempDir {
    fn new(tag: &str) -> Self {
        let path = std::env::temp_dir().join(format!(
            "torflow_cli_{tag}_{}",
            std::process::id()
        ));
        std::fs::remove_dir_all(&path).ok();
        std::fs::create_dir_all(&path).unwrap();
        Self { path }
    }

    fn file(&self, name: &str, contents: &str) -> PathBuf {
        let p = self.path.join(name);
        std::fs::write(&p, contents).unwrap();
        p
    }

    fn join(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        std::fs::remove_dir_all(&self.path).ok();
    }
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn trivial_run_exits_zero_and_converges_at_t0() {
    let dir = TempDir::new("trivial");
    let config = dir.file(
        "run.cfg",
        "backend=grid\ngrid.nx=32\ngrid.ny=32\ninitial_u=zero\ntorsion=none\n\
         flow.t_max=1\noutputs=out\n",
    );
    let code = cli::cmd_run(&config, None, true);
    assert_eq!(code, 0);
    let summary = read(&dir.join("out/summary.txt"));
    assert!(summary.contains("termination=converged"));
    assert!(summary.contains("final_t=0."));
    assert!(dir.join("out/diagnostics.csv").exists());
    assert!(dir.join("out/state_final.fld").exists());
}

#[test]
fn missing_mesh_file_exits_two_and_names_the_path() {
    let dir = TempDir::new("missing_mesh");
    let config = dir.file(
        "run.cfg",
        "backend=mesh\nmesh.source=path\nmesh.path=no_such_surface.off\noutputs=out\n",
    );
    assert_eq!(cli::cmd_run(&config, None, true), 2);
}

#[test]
fn malformed_config_exits_two() {
    let dir = TempDir::new("badcfg");
    let config = dir.file("run.cfg", "backend=grid\ngrid.nx\n");
    assert_eq!(cli::cmd_run(&config, None, true), 2);
}

#[test]
fn odd_grid_dimension_exits_two() {
    let dir = TempDir::new("oddgrid");
    let config = dir.file("run.cfg", "backend=grid\ngrid.nx=33\ngrid.ny=32\noutputs=out\n");
    assert_eq!(cli::cmd_check(&config, None, true), 2);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new("determinism");
    let config_text = "backend=grid\ngrid.nx=32\ngrid.ny=32\n\
        initial_u=random\ninitial_u.amplitude=0.2\n\
        torsion=oneform\ntorsion.preset=random\ntorsion.amplitude=0.3\n\
        flow.t_max=0.3\nflow.stop_tol=1e-12\nflow.sample_interval=0.05\n\
        seed=2024\noutputs=out\n";
    let config = dir.file("run.cfg", config_text);
    assert_eq!(cli::cmd_run(&config, Some(&dir.join("a")), true), 0);
    assert_eq!(cli::cmd_run(&config, Some(&dir.join("b")), true), 0);
    for name in ["diagnostics.csv", "summary.txt", "state_final.fld", "snap_000000.fld"] {
        let a = std::fs::read(dir.join("a").join(name)).unwrap();
        let b = std::fs::read(dir.join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between repeated runs");
    }
    // every sample snapshot matches too
    let mut k = 0;
    loop {
        let name = format!("snap_{k:06}.fld");
        let pa = dir.join("a").join(&name);
        if !pa.exists() {
            break;
        }
        let a = std::fs::read(&pa).unwrap();
        let b = std::fs::read(dir.join("b").join(&name)).unwrap();
        assert_eq!(a, b, "{name} differs");
        k += 1;
    }
    assert!(k >= 5, "expected several snapshots, found {k}");
}

#[test]
fn oracle_on_torus_with_torsion_meets_poisson_tolerance() {
    let dir = TempDir::new("oracle_torus");
    let config = dir.file(
        "run.cfg",
        "backend=grid\ngrid.nx=32\ngrid.ny=32\n\
         torsion=oneform\ntorsion.preset=trig\ntorsion.kx=1\ntorsion.a=0.4\n\
         outputs=out\n",
    );
    assert_eq!(cli::cmd_oracle(&config, None, true), 0);
    let summary = read(&dir.join("out/oracle_summary.txt"));
    let deviation: f64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("achieved_R_deviation="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(deviation <= 1e-9, "oracle deviation {deviation:e}");
}

#[test]
fn oracle_rejects_positive_euler_characteristic() {
    let dir = TempDir::new("oracle_sphere");
    let config = dir.file(
        "run.cfg",
        "backend=mesh\nmesh.source=icosphere\nmesh.subdivisions=2\noutputs=out\n",
    );
    assert_eq!(cli::cmd_oracle(&config, None, true), 2);
}

#[test]
fn oracle_compares_against_a_finished_run() {
    let dir = TempDir::new("oracle_compare");
    let config = dir.file(
        "run.cfg",
        "backend=grid\ngrid.nx=32\ngrid.ny=32\n\
         initial_u=random\ninitial_u.amplitude=0.2\n\
         torsion=oneform\ntorsion.preset=random\ntorsion.amplitude=0.3\n\
         flow.t_max=40\nflow.stop_tol=1e-9\nflow.sample_interval=0.5\n\
         seed=7\noutputs=out\n",
    );
    assert_eq!(cli::cmd_run(&config, None, true), 0);
    assert_eq!(cli::cmd_oracle(&config, None, true), 0);
    let summary = read(&dir.join("out/oracle_summary.txt"));
    let diff: f64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("flow_vs_oracle_max_diff="))
        .expect("comparison line present after a finished run")
        .parse()
        .unwrap();
    assert!(diff <= 1e-6, "flow vs oracle {diff:e}");
}

#[test]
fn check_suite_passes_on_the_default_grid_config() {
    let dir = TempDir::new("check_grid");
    let config = dir.file(
        "run.cfg",
        "backend=grid\ngrid.nx=32\ngrid.ny=32\n\
         initial_u=random\ninitial_u.amplitude=0.2\n\
         torsion=oneform\ntorsion.preset=random\ntorsion.amplitude=0.3\n\
         flow.sample_interval=0.05\nseed=5\noutputs=out\n",
    );
    assert_eq!(cli::cmd_check(&config, None, true), 0);
    let report = read(&dir.join("out/check_report.txt"));
    assert!(report.contains("PASS operators.self-adjointness"));
    assert!(report.contains("PASS flow.volume-preservation"));
    assert!(report.contains("SKIP operators.mesh-sphere-eigenvalue"));
    assert!(!report.contains("FAIL"));
}

#[test]
fn check_suite_gates_grid_only_checks_on_meshes() {
    let dir = TempDir::new("check_mesh");
    let config = dir.file(
        "run.cfg",
        "backend=mesh\nmesh.source=icosphere\nmesh.subdivisions=2\n\
         torsion=d0\ntorsion.preset=zonal\ntorsion.amplitude=0.3\n\
         flow.integrator=imex\nflow.dt_initial=0.02\nflow.sample_interval=0.04\n\
         seed=5\noutputs=out\n",
    );
    let code = cli::cmd_check(&config, None, true);
    let report = read(&dir.join("out/check_report.txt"));
    assert!(report.contains("SKIP flow.curvature-evolution"), "{report}");
    assert!(report.contains("SKIP diag.hessian-identity"), "{report}");
    assert!(report.contains("PASS stationary.hersch"), "{report}");
    assert!(!report.contains("FAIL"), "{report}");
    assert_eq!(code, 0);
}

#[test]
fn check_offline_recompute_verifies_emitted_outputs() {
    let dir = TempDir::new("check_offline");
    let config = dir.file(
        "run.cfg",
        "backend=grid\ngrid.nx=32\ngrid.ny=32\n\
         initial_u=random\ninitial_u.amplitude=0.2\n\
         torsion=oneform\ntorsion.preset=random\ntorsion.amplitude=0.3\n\
         flow.t_max=0.2\nflow.stop_tol=1e-12\nflow.sample_interval=0.05\n\
         seed=11\noutputs=out\n",
    );
    assert_eq!(cli::cmd_run(&config, None, true), 0);
    assert_eq!(cli::cmd_check(&config, None, true), 0);
    let report = read(&dir.join("out/check_report.txt"));
    assert!(
        report.contains("PASS offline.diagnostics-recompute"),
        "{report}"
    );
}

#[test]
fn stability_classifies_the_relaxed_round_sphere() {
    let dir = TempDir::new("stability");
    let config = dir.file(
        "run.cfg",
        "backend=mesh\nmesh.source=icosphere\nmesh.subdivisions=3\n\
         flow.integrator=imex\nflow.dt_initial=0.05\nflow.t_max=20\n\
         outputs=out\n",
    );
    assert_eq!(cli::cmd_stability(&config, None, true), 0);
    let report = read(&dir.join("out/stability.txt"));
    assert!(report.contains("class=marginal"), "{report}");
    assert!(report.contains("hersch_ok=1"), "{report}");
}

#[test]
fn stability_rejects_non_sphere_configs() {
    let dir = TempDir::new("stability_torus");
    let config = dir.file("run.cfg", "backend=grid\ngrid.nx=32\ngrid.ny=32\noutputs=out\n");
    assert_eq!(cli::cmd_stability(&config, None, true), 2);
}
