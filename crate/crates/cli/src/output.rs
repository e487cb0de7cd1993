//! Artifact files. Every file is written to a temporary sibling and renamed
//! into place, so a failed run never leaves a partial file behind.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::error::{CliError, CliResult};
use crate::pipeline::{GraphCheck, RunOutcome, SweepRow};
use crate::scenario::Scenario;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "EDGESYNC_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "edgesync-out";

/// `--out-dir` (already folded into the scenario) wins, then the scenario's
/// `[output] dir`, then the environment, then [`DEFAULT_OUT_DIR`].
pub fn output_dir(scenario: &Scenario) -> PathBuf {
    scenario
        .output_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

pub fn write_atomic(dir: &Path, name: &str, write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> CliResult<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let target = dir.join(name);
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        write(&mut buf).and_then(|_| buf.flush()).map_err(|e| CliError::io(&target, e))?;
    }
    tmp.persist(&target).map_err(|e| CliError::io(&target, e.error))?;
    Ok(target)
}

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn list(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(real).collect::<Vec<_>>().join(" ")
}

/// `graph_check.txt`: spectra, `Υ`, residuals and the critical gain.
pub fn graph_check_text(scenario: &Scenario, c: &GraphCheck) -> String {
    let g = &scenario.graph;
    let mut s = String::new();
    let _ = writeln!(s, "scenario {}", scenario.name);
    let _ = writeln!(s, "graph_hash {:016x}", g.fingerprint());
    let _ = writeln!(s, "nodes {}", g.node_count());
    let _ = writeln!(s, "edges {}", g.edge_count());
    let _ = writeln!(s, "components {}", c.components);
    for e in g.edges() {
        let _ = writeln!(s, "edge {} {} {}", e.k + 1, e.l + 1, real(e.weight));
    }
    let _ = writeln!(s, "weights {}", list(g.weights()));
    let _ = writeln!(s, "laplacian_eigenvalues {}", list(c.spectral.laplacian_eigs.iter().copied()));
    let _ = writeln!(s, "edge_laplacian_eigenvalues {}", list(c.spectral.edge_laplacian_eigs.iter().copied()));
    let _ = writeln!(s, "algebraic_connectivity {}", real(c.spectral.lambda2));
    let _ = writeln!(s, "kernel_dim {}", c.upsilon.kernel_dim);
    let _ = writeln!(s, "upsilon_mu {}", real(c.upsilon.mu));
    let _ = writeln!(s, "pd_margin {}", real(c.upsilon.pd_margin));
    let _ = writeln!(s, "identity_residual {}", real(c.identity_residual));
    let _ = writeln!(s, "endpoint_residual_k {}", real(c.endpoint_residuals.0));
    let _ = writeln!(s, "endpoint_residual_l {}", real(c.endpoint_residuals.1));
    if let Some((rho, d)) = &c.gain {
        let _ = writeln!(s, "rho {}", real(*rho));
        let _ = writeln!(s, "w_max {}", real(d.w_max));
        let _ = writeln!(s, "lambda_min_sym {}", real(d.lambda_min_sym));
        let _ = writeln!(s, "lambda_min_wu_real {}", real(d.lambda_min_wu_real));
        let _ = writeln!(s, "beta_star {}", real(d.beta_star));
    }
    let u = &c.upsilon.upsilon;
    for i in 0..u.rows() {
        let _ = writeln!(s, "upsilon_row {} {}", i + 1, list(u.row_slice(i).iter().copied()));
    }
    s
}

pub fn report_text(scenario: &Scenario, out: &RunOutcome) -> String {
    let t = &out.trajectory;
    let a = &out.analysis;
    let c = &out.certificate;
    let i = scenario.integration;
    let mut s = String::new();
    let _ = writeln!(s, "scenario {}", scenario.name);
    let _ = writeln!(s, "model {}", t.meta.model);
    for (k, v) in &out.model_parameters {
        let _ = writeln!(s, "param_{k} {}", real(*v));
    }
    let _ = writeln!(s, "graph_hash {:016x}", t.meta.graph_hash);
    let _ = writeln!(s, "agents {}", t.meta.agents);
    let _ = writeln!(s, "state_dim {}", t.meta.state_dim);
    let _ = writeln!(s, "seed {}", t.meta.seed.map_or_else(|| "none".into(), |v| v.to_string()));
    let _ = writeln!(s, "h {}", real(i.h));
    let _ = writeln!(s, "t_end {}", real(i.t_end));
    let _ = writeln!(s, "record_interval {}", real(i.record_interval));
    let _ = writeln!(s, "beta {}", real(out.beta));
    let _ = writeln!(s, "beta_star {}", real(out.beta_star));
    let _ = writeln!(s, "below_critical {}", out.beta < out.beta_star);
    let _ = writeln!(s, "certificate_approximate {}", c.approximate);
    let _ = writeln!(s, "certificate_samples {}", c.samples);
    let _ = writeln!(s, "certificate_radius {}", real(c.radius));
    let _ = writeln!(s, "ari_margin_min {}", real(c.ari_margin));
    let _ = writeln!(s, "killing_residual {}", real(c.killing));
    let _ = writeln!(s, "integrability_residual {}", real(c.integrability));
    match &a.fit {
        Some(f) => {
            let _ = writeln!(s, "decay_rate {}", real(f.rate));
            let _ = writeln!(s, "r_squared {}", real(f.r_squared));
            let _ = writeln!(s, "fit_window {} {}", real(f.window.0), real(f.window.1));
            let _ = writeln!(s, "fit_clipped {}", f.clipped);
        }
        None => {
            let _ = writeln!(s, "decay_rate none");
        }
    }
    let _ = writeln!(s, "largest_uptick {}", real(a.monotone.largest_uptick));
    let _ = writeln!(s, "largest_relative_uptick {}", real(a.monotone.largest_relative_uptick));
    let _ = writeln!(s, "monotone {}", a.monotone.passed);
    let _ = writeln!(s, "initial_sync_error {}", real(a.initial_sync_error));
    let _ = writeln!(s, "final_sync_error {}", real(a.final_sync_error));
    for w in &out.warnings {
        let _ = writeln!(s, "warning {w}");
    }
    s
}

/// Writes `trajectory.csv`, `report.txt` and `graph_check.txt`.
pub fn write_run(dir: &Path, scenario: &Scenario, out: &RunOutcome) -> CliResult<()> {
    write_atomic(dir, "trajectory.csv", |w| out.trajectory.write_csv(w))?;
    write_atomic(dir, "graph_check.txt", |w| w.write_all(graph_check_text(scenario, &out.graph).as_bytes()))?;
    write_atomic(dir, "report.txt", |w| w.write_all(report_text(scenario, out).as_bytes()))?;
    Ok(())
}

pub fn write_graph_check(dir: &Path, scenario: &Scenario, check: &GraphCheck) -> CliResult<PathBuf> {
    write_atomic(dir, "graph_check.txt", |w| w.write_all(graph_check_text(scenario, check).as_bytes()))
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let opt = |v: Option<f64>| v.map_or_else(|| "nan".into(), real);
    let mut s = String::from("multiplier,beta,rate,r_squared,largest_uptick,final_sync_error,status\n");
    for r in rows {
        let status = r.status.replace([',', '\n'], ";");
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{status}",
            real(r.multiplier),
            real(r.beta),
            opt(r.rate),
            opt(r.r_squared),
            opt(r.largest_uptick),
            opt(r.final_sync_error)
        );
    }
    s
}

pub fn write_sweep(dir: &Path, rows: &[SweepRow]) -> CliResult<PathBuf> {
    write_atomic(dir, "sweep.csv", |w| w.write_all(sweep_csv(rows).as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_leaves_no_partial_file() {
        let dir = tempfile::tempdir().unwrap();
        let err = write_atomic(dir.path(), "a.txt", |w| {
            w.write_all(b"partial")?;
            Err(std::io::Error::other("boom"))
        });
        assert!(err.is_err());
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
        write_atomic(dir.path(), "a.txt", |w| w.write_all(b"done")).unwrap();
        assert_eq!(std::fs::read_to_string(dir.path().join("a.txt")).unwrap(), "done");
    }

    #[test]
    fn sweep_csv_layout() {
        let rows = [SweepRow {
            multiplier: 1.0,
            beta: 0.5,
            rate: None,
            r_squared: None,
            largest_uptick: Some(-1.0),
            final_sync_error: Some(0.0),
            status: "failed: x, y".into(),
        }];
        let text = sweep_csv(&rows);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1].split(',').count(), 7);
        assert!(lines[1].ends_with("failed: x; y"));
    }
}
