//! Scenario pipeline: graph checks, model and certificate construction,
//! simulation and analysis. Nothing here touches the filesystem.

use std::path::PathBuf;

use edgesync_core::analysis::{check_monotone, fit_decay_rate, Channel, DecayFit, MonotoneCheck};
use edgesync_core::controller::{gain_diagnostics, GainDiagnostics};
use edgesync_core::graph::{components, spectral_report, SpectralReport};
use edgesync_core::metric::{sample_ball, verify_ari_sampled, verify_killing_integrability, DEFAULT_FD_STEP};
use edgesync_core::models::{default_lorenz_alpha, lorenz_attractor_point, lorenz_input_at_origin};
use edgesync_core::riccati::solve_ari;
use edgesync_core::simulator::{perturbed_initial_conditions, simulate, Monitors, SimConfig, Trajectory};
use edgesync_core::upsilon::verify_endpoint_identities;
use edgesync_core::{
    build_matrices, build_upsilon, AgentModel, Feedback, GraphMatrices, LinearAgent, LorenzAgent, Matrix,
    MetricCertificate, TanhAgent, UpsilonResult,
};

use crate::error::{CliError, CliResult};
use crate::scenario::{Base, BetaSpec, CertificateMode, CertificateSpec, Gamma, InitialSpec, ModelKind, ModelSpec, Scenario};

/// Command-line values that take precedence over the scenario file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub h: Option<f64>,
    pub t_end: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, scenario: &mut Scenario) -> CliResult<()> {
        for (name, v) in [("--h", self.h), ("--t-end", self.t_end)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(CliError::Scenario(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if let Some(h) = self.h {
            scenario.integration.h = h;
        }
        if let Some(t) = self.t_end {
            scenario.integration.t_end = t;
        }
        if let Some(seed) = self.seed {
            if let Some(InitialSpec::Perturbed { seed: s, .. }) = &mut scenario.initial {
                *s = seed;
            }
        }
        if let Some(dir) = &self.out_dir {
            scenario.output_dir = Some(dir.clone());
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GraphCheck {
    pub matrices: GraphMatrices,
    pub upsilon: UpsilonResult,
    pub spectral: SpectralReport,
    pub components: usize,
    pub identity_residual: f64,
    pub endpoint_residuals: (f64, f64),
    /// Present when the scenario has a certificate section.
    pub gain: Option<(f64, GainDiagnostics)>,
}

/// Graph matrices, `Υ`, spectra and (given `ρ`) the critical gain.
///
/// Fails with [`CliError::Disconnected`] when a controller is requested on
/// a graph with several components.
pub fn check_graph(scenario: &Scenario) -> CliResult<GraphCheck> {
    let comps = components(&scenario.graph);
    if scenario.controller.is_some() && comps > 1 {
        return Err(CliError::Disconnected { components: comps });
    }
    let matrices = build_matrices(&scenario.graph)?;
    let upsilon = build_upsilon(&matrices)?;
    let spectral = spectral_report(&matrices, &scenario.graph)?;
    let gain = match &scenario.certificate {
        Some(c) => Some((c.rho, gain_diagnostics(&matrices, &upsilon, c.rho)?)),
        None => None,
    };
    Ok(GraphCheck {
        identity_residual: upsilon.identity_residual(&matrices),
        endpoint_residuals: verify_endpoint_identities(&matrices, &upsilon),
        matrices,
        upsilon,
        spectral,
        components: comps,
        gain,
    })
}

pub struct Agent {
    pub model: Box<dyn AgentModel>,
    pub certificate: MetricCertificate,
}

fn gain_matrix(k: &[f64]) -> CliResult<Matrix> {
    Ok(Matrix::row(k)?)
}

/// Builds the agent model with its feedback and metric certificate.
pub fn build_agent(spec: &ModelSpec, cert: &CertificateSpec) -> CliResult<Agent> {
    let n = spec.state_dim();
    let (certificate, derived_gain) = match (&spec.kind, &cert.mode) {
        (ModelKind::Linear { a, b } | ModelKind::Tanh { a, b, .. }, CertificateMode::Riccati | CertificateMode::Linearized) => {
            let d = solve_ari(a, b, cert.rho, cert.mu)?;
            (d.certificate, d.gain)
        }
        (ModelKind::Linear { b, .. } | ModelKind::Tanh { b, .. }, CertificateMode::Inline(p)) => {
            let c = MetricCertificate::new(p.clone(), cert.rho, cert.mu)?;
            let k = &b.transpose() * &c.p;
            (c, k)
        }
        (ModelKind::Lorenz { params }, CertificateMode::Linearized) => {
            let d = default_lorenz_alpha(*params, cert.rho, cert.mu)?;
            (d.certificate, d.gain)
        }
        (ModelKind::Lorenz { .. }, CertificateMode::Inline(p)) => {
            let c = MetricCertificate::new(p.clone(), cert.rho, cert.mu)?.mark_approximate();
            let k = &lorenz_input_at_origin().transpose() * &c.p;
            (c, k)
        }
        (ModelKind::Lorenz { .. }, CertificateMode::Riccati) => {
            return Err(CliError::Scenario("lorenz models use certificate mode linearized or inline".into()));
        }
    };
    let gain = match &spec.gain {
        Some(k) => gain_matrix(k)?,
        None => derived_gain,
    };
    let model: Box<dyn AgentModel> = match &spec.kind {
        ModelKind::Linear { a, b } => Box::new(LinearAgent::new(a.clone(), b.clone(), gain)?),
        ModelKind::Tanh { a, b, gamma } => {
            let gamma = match *gamma {
                Gamma::Absolute(g) => g,
                Gamma::RelativeToMetric(r) => r / certificate.p_upper,
            };
            Box::new(TanhAgent::new(a.clone(), b.clone(), gamma, gain)?)
        }
        ModelKind::Lorenz { params } => Box::new(LorenzAgent::new(*params, Feedback::from_gain(&gain, n)?)),
    };
    Ok(Agent { model, certificate })
}

/// Stacked initial state plus the ball used for certificate sampling.
pub fn initial_state(scenario: &Scenario, spec: &ModelSpec) -> CliResult<(Vec<f64>, Vec<f64>, f64)> {
    let agents = scenario.graph.node_count();
    let n = spec.state_dim();
    match &scenario.initial {
        None => Err(CliError::Scenario("missing [initial] section".into())),
        Some(InitialSpec::Explicit(states)) => {
            let center: Vec<f64> = (0..n)
                .map(|j| states.iter().map(|s| s[j]).sum::<f64>() / agents as f64)
                .collect();
            let radius = states
                .iter()
                .map(|s| s.iter().zip(&center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt())
                .fold(0.0, f64::max);
            Ok((states.concat(), center, radius))
        }
        Some(InitialSpec::Perturbed { base, radius, seed }) => {
            let base = match (base, &spec.kind) {
                (Base::Point(p), _) => p.clone(),
                (Base::Attractor, ModelKind::Lorenz { params }) => lorenz_attractor_point(*params).to_vec(),
                (Base::Attractor, _) => {
                    return Err(CliError::Scenario("`base attractor` needs a lorenz model".into()));
                }
            };
            Ok((perturbed_initial_conditions(&base, agents, *radius, *seed), base, *radius))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateCheck {
    pub samples: usize,
    pub radius: f64,
    pub ari_margin: f64,
    pub killing: f64,
    pub integrability: f64,
    pub approximate: bool,
}

pub fn check_certificate(scenario: &Scenario, agent: &Agent, center: &[f64], radius: f64) -> CliResult<CertificateCheck> {
    let a = &scenario.analysis;
    let radius = a.sample_radius.unwrap_or(radius.max(1.0));
    let samples = sample_ball(center, radius, a.samples.max(1), a.sample_seed);
    let ari_margin = verify_ari_sampled(&agent.certificate, agent.model.as_ref(), &samples)?;
    let (killing, integrability) =
        verify_killing_integrability(&agent.certificate, agent.model.as_ref(), &samples, DEFAULT_FD_STEP)?;
    Ok(CertificateCheck {
        samples: samples.len(),
        radius,
        ari_margin,
        killing,
        integrability,
        approximate: agent.certificate.approximate,
    })
}

pub fn resolve_beta(spec: Option<BetaSpec>, beta_star: Option<f64>) -> CliResult<f64> {
    match spec {
        None => Ok(0.0),
        Some(BetaSpec::Absolute(b)) => Ok(b),
        Some(BetaSpec::Multiplier(m)) => beta_star
            .map(|b| m * b)
            .ok_or_else(|| CliError::Scenario("`beta_multiplier` needs a [certificate] section".into())),
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    /// `None` when no usable fit window remains (for instance `V ≡ 0`).
    pub fit: Option<DecayFit>,
    pub monotone: MonotoneCheck,
    pub initial_sync_error: f64,
    pub final_sync_error: f64,
}

pub fn analyse(scenario: &Scenario, traj: &Trajectory) -> CliResult<Analysis> {
    let t_end = *traj.times.last().expect("trajectory is never empty");
    let start = scenario.analysis.fit_start.unwrap_or(0.1 * t_end);
    let fit = match fit_decay_rate(traj, Channel::Energy, (start, t_end)) {
        Ok(f) => Some(f),
        Err(edgesync_core::Error::EmptyWindow { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(Analysis {
        fit,
        monotone: check_monotone(traj, Channel::Energy, scenario.analysis.monotone_tol)?,
        initial_sync_error: traj.sync_error[0],
        final_sync_error: *traj.sync_error.last().expect("trajectory is never empty"),
    })
}

pub struct RunOutcome {
    pub graph: GraphCheck,
    pub beta: f64,
    pub beta_star: f64,
    pub certificate: CertificateCheck,
    pub trajectory: Trajectory,
    pub analysis: Analysis,
    pub warnings: Vec<String>,
    pub model_parameters: Vec<(String, f64)>,
}

struct Prepared {
    graph: GraphCheck,
    agent: Agent,
    x0: Vec<f64>,
    seed: Option<u64>,
    certificate: CertificateCheck,
    beta_star: f64,
    warnings: Vec<String>,
}

fn prepare(scenario: &Scenario) -> CliResult<Prepared> {
    let graph = check_graph(scenario)?;
    let spec = scenario
        .model
        .as_ref()
        .ok_or_else(|| CliError::Scenario("missing [model] section".into()))?;
    let cert = scenario
        .certificate
        .as_ref()
        .ok_or_else(|| CliError::Scenario("missing [certificate] section".into()))?;
    let agent = build_agent(spec, cert)?;
    let (x0, center, radius) = initial_state(scenario, spec)?;
    let certificate = check_certificate(scenario, &agent, &center, radius)?;
    let beta_star = graph.gain.as_ref().map(|g| g.1.beta_star).expect("certificate present");

    let mut warnings = Vec::new();
    if certificate.approximate {
        warnings.push("certificate is approximate (derived from a linearization)".to_string());
    }
    if certificate.ari_margin < -1e-8 {
        warnings.push(format!("sampled ARI margin is negative ({:.3e})", certificate.ari_margin));
    }
    if certificate.killing > 1e-8 {
        warnings.push(format!("Killing residual {:.3e}", certificate.killing));
    }
    if certificate.integrability > 1e-6 {
        warnings.push(format!("integrability residual {:.3e}", certificate.integrability));
    }
    let seed = match &scenario.initial {
        Some(InitialSpec::Perturbed { seed, .. }) => Some(*seed),
        _ => None,
    };
    Ok(Prepared {
        graph,
        agent,
        x0,
        seed,
        certificate,
        beta_star,
        warnings,
    })
}

fn sim_config(scenario: &Scenario) -> SimConfig {
    let i = scenario.integration;
    SimConfig {
        t_end: i.t_end,
        h: i.h,
        record_interval: i.record_interval,
    }
}

fn simulate_prepared(scenario: &Scenario, p: &Prepared, beta: f64) -> CliResult<Trajectory> {
    let monitors = Monitors::with_metric(p.agent.certificate.p.clone());
    let mut traj = simulate(&scenario.graph, p.agent.model.as_ref(), beta, &p.x0, &sim_config(scenario), &monitors)?;
    traj.meta.seed = p.seed;
    Ok(traj)
}

/// Full pipeline for `run`.
pub fn run_scenario(scenario: &Scenario) -> CliResult<RunOutcome> {
    let mut p = prepare(scenario)?;
    let beta = resolve_beta(scenario.controller, Some(p.beta_star))?;
    if beta < p.beta_star {
        p.warnings.push(format!(
            "beta {beta:.6e} is below the critical gain {:.6e}; convergence is not guaranteed",
            p.beta_star
        ));
    }
    let trajectory = simulate_prepared(scenario, &p, beta)?;
    let analysis = analyse(scenario, &trajectory)?;
    Ok(RunOutcome {
        model_parameters: p.agent.model.parameters(),
        graph: p.graph,
        beta,
        beta_star: p.beta_star,
        certificate: p.certificate,
        trajectory,
        analysis,
        warnings: p.warnings,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub multiplier: f64,
    pub beta: f64,
    pub rate: Option<f64>,
    pub r_squared: Option<f64>,
    pub largest_uptick: Option<f64>,
    pub final_sync_error: Option<f64>,
    /// `ok`, or the error that stopped this run.
    pub status: String,
}

/// One run per multiplier of `β*`, in parallel; failed runs are reported
/// in their row and do not stop the sweep.
pub fn sweep(scenario: &Scenario, multipliers: &[f64]) -> CliResult<Vec<SweepRow>> {
    if let Some(m) = multipliers.iter().find(|m| !(**m >= 0.0 && m.is_finite())) {
        return Err(CliError::Scenario(format!("multiplier {m} must be nonnegative")));
    }
    let p = prepare(scenario)?;
    let rows = std::thread::scope(|s| {
        let handles: Vec<_> = multipliers
            .iter()
            .map(|&m| {
                let p = &p;
                s.spawn(move || {
                    let beta = m * p.beta_star;
                    let mut row = SweepRow {
                        multiplier: m,
                        beta,
                        rate: None,
                        r_squared: None,
                        largest_uptick: None,
                        final_sync_error: None,
                        status: "ok".into(),
                    };
                    let result = simulate_prepared(scenario, p, beta).and_then(|t| analyse(scenario, &t));
                    match result {
                        Ok(a) => {
                            row.rate = a.fit.map(|f| f.rate);
                            row.r_squared = a.fit.map(|f| f.r_squared);
                            row.largest_uptick = Some(a.monotone.largest_uptick);
                            row.final_sync_error = Some(a.final_sync_error);
                        }
                        Err(e) => row.status = format!("failed: {e}"),
                    }
                    row
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;
    use std::path::Path;

    const INTEGRATOR: &str = "\
[graph]
nodes 3
1 2 1
2 3 1
[model]
kind linear
a 0
b 1
[certificate]
mode riccati
rho 1
mu 0.5
[controller]
beta_multiplier 1
[initial]
state 0
state 1
state 3
[integration]
h 0.01
t_end 10
";

    fn scenario(text: &str) -> Scenario {
        parse_scenario(text, Path::new("t.scn")).unwrap()
    }

    #[test]
    fn integrator_synchronizes() {
        let out = run_scenario(&scenario(INTEGRATOR)).unwrap();
        assert_eq!(out.beta, out.beta_star);
        assert!(out.analysis.monotone.passed);
        assert!(out.analysis.final_sync_error < 1e-3 * out.analysis.initial_sync_error);
        let fit = out.analysis.fit.unwrap();
        assert!(fit.rate >= 0.9, "{fit:?}");
        assert!(out.certificate.ari_margin >= -1e-8);
        assert!(out.warnings.is_empty(), "{:?}", out.warnings);
    }

    #[test]
    fn disconnected_graph_with_controller() {
        let text = INTEGRATOR.replace("nodes 3\n1 2 1\n2 3 1", "nodes 4\n1 2 1\n3 4 1");
        let text = text.replace("state 3\n", "state 3\nstate 4\n");
        let s = scenario(&text);
        assert!(matches!(run_scenario(&s), Err(CliError::Disconnected { components: 2 })));
        assert!(matches!(check_graph(&s), Err(CliError::Disconnected { .. })));
        let mut s = s;
        s.controller = None;
        assert_eq!(check_graph(&s).unwrap().components, 2);
    }

    #[test]
    fn sweep_rows_follow_multipliers() {
        let s = scenario(INTEGRATOR);
        let rows = sweep(&s, &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(rows.iter().map(|r| r.multiplier).collect::<Vec<_>>(), vec![0.0, 1.0, 2.0]);
        assert!(rows[0].rate.unwrap().abs() < 1e-12);
        assert!(rows[1].rate.unwrap() < rows[2].rate.unwrap());
        assert!(rows.iter().all(|r| r.status == "ok"));
        assert!(sweep(&s, &[]).unwrap().is_empty());
    }

    #[test]
    fn sweep_marks_failed_runs() {
        let s = scenario(&INTEGRATOR.replace("t_end 10", "t_end 10\nrecord_interval 0.01"));
        let rows = sweep(&s, &[1.0, 1e6]).unwrap();
        assert_eq!(rows[0].status, "ok");
        assert!(rows[1].status.starts_with("failed"), "{}", rows[1].status);
    }

    #[test]
    fn overrides_take_precedence() {
        let mut s = scenario(&INTEGRATOR.replace(
            "[initial]\nstate 0\nstate 1\nstate 3",
            "[initial]\nbase 0\nradius 1\nseed 3",
        ));
        Overrides {
            seed: Some(9),
            out_dir: Some("x".into()),
            h: Some(0.005),
            t_end: Some(5.0),
        }
        .apply(&mut s)
        .unwrap();
        assert_eq!(s.integration.h, 0.005);
        assert_eq!(s.integration.t_end, 5.0);
        assert_eq!(s.output_dir, Some(PathBuf::from("x")));
        assert!(matches!(s.initial, Some(InitialSpec::Perturbed { seed: 9, .. })));
        let bad = Overrides { h: Some(-1.0), ..Overrides::default() };
        assert!(bad.apply(&mut s).is_err());
    }
}
