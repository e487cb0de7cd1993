//! Fixed-step RK4 integration of the closed-loop network
//! `ẋᵢ = f(xᵢ) + g(xᵢ)uᵢ`, with the coupling re-evaluated at every stage.

use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{edge_energy_unchecked, sync_error};
use crate::controller::coupling_inputs_into;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::metric::point_in_ball;
use crate::models::AgentModel;
use crate::numerics::{sym_eig, Matrix};

/// Magnitude beyond which a state counts as diverged.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Stacked network state, agent-major (`x₁` then `x₂` …).
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub t: f64,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub t_end: f64,
    pub h: f64,
    pub record_interval: f64,
}

impl SimConfig {
    /// Number of integration steps and the recording stride in steps.
    fn grid(&self) -> Result<(usize, usize)> {
        let SimConfig {
            t_end,
            h,
            record_interval,
        } = *self;
        if !(t_end > 0.0 && h > 0.0 && record_interval > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "need positive t_end, h and record_interval, got {t_end}, {h}, {record_interval}"
            )));
        }
        if h > record_interval {
            return Err(Error::InvalidArgument(format!(
                "step {h} exceeds the record interval {record_interval}"
            )));
        }
        let whole = |x: f64, what: &str| -> Result<usize> {
            let r = x.round();
            if (x - r).abs() > 1e-6 * r.max(1.0) || r < 1.0 {
                return Err(Error::InvalidArgument(format!("{what} = {x} is not a whole number")));
            }
            Ok(r as usize)
        };
        let steps = whole(t_end / h, "t_end / h")?;
        let stride = whole(record_interval / h, "record_interval / h")?;
        if steps % stride != 0 {
            return Err(Error::InvalidArgument(format!(
                "t_end {t_end} is not a multiple of the record interval {record_interval}"
            )));
        }
        Ok((steps, stride))
    }
}

/// Channels evaluated at record times.
#[derive(Debug, Clone, Default)]
pub struct Monitors {
    /// Constant metric for the edge energy `V`; `None` skips that channel.
    pub metric: Option<Matrix>,
}

impl Monitors {
    pub fn with_metric(p: Matrix) -> Self {
        Self { metric: Some(p) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta {
    pub graph_hash: u64,
    pub model: String,
    pub beta: f64,
    pub seed: Option<u64>,
    pub h: f64,
    pub agents: usize,
    pub state_dim: usize,
}

/// Recorded run on a uniform time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub inputs: Vec<Vec<f64>>,
    pub energy: Option<Vec<f64>>,
    pub sync_error: Vec<f64>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("trajectory has the initial sample")
    }

    /// CSV with header `t, x_1_1..x_N_n, u_1..u_N, V, sync_error`; values
    /// with 17 significant digits. A missing `V` channel is written as `nan`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let TrajectoryMeta {
            agents, state_dim, ..
        } = self.meta;
        let mut header = vec!["t".to_string()];
        for i in 1..=agents {
            for j in 1..=state_dim {
                header.push(format!("x_{i}_{j}"));
            }
        }
        header.extend((1..=agents).map(|i| format!("u_{i}")));
        header.push("V".into());
        header.push("sync_error".into());
        writeln!(out, "{}", header.join(","))?;

        let fmt = |v: f64| format!("{v:.16e}");
        for k in 0..self.len() {
            let mut row = Vec::with_capacity(header.len());
            row.push(fmt(self.times[k]));
            row.extend(self.states[k].iter().map(|&v| fmt(v)));
            row.extend(self.inputs[k].iter().map(|&v| fmt(v)));
            row.push(self.energy.as_ref().map_or_else(|| "nan".into(), |e| fmt(e[k])));
            row.push(fmt(self.sync_error[k]));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Reusable stage buffers for RK4 on the coupled field.
struct Rk4<'a> {
    g: &'a WeightedGraph,
    model: &'a dyn AgentModel,
    beta: f64,
    n: usize,
    k: [Vec<f64>; 4],
    stage: Vec<f64>,
    u: Vec<f64>,
    gx: Vec<f64>,
}

impl<'a> Rk4<'a> {
    fn new(g: &'a WeightedGraph, model: &'a dyn AgentModel, beta: f64) -> Self {
        let n = model.state_dim();
        let len = g.node_count() * n;
        Self {
            g,
            model,
            beta,
            n,
            k: std::array::from_fn(|_| vec![0.0; len]),
            stage: vec![0.0; len],
            u: vec![0.0; g.node_count()],
            gx: vec![0.0; n],
        }
    }

    fn field(&mut self, x: &[f64], slot: usize) {
        let n = self.n;
        coupling_inputs_into(x, n, self.g, self.model, self.beta, &mut self.u);
        let out = &mut self.k[slot];
        for (i, (xi, oi)) in x.chunks_exact(n).zip(out.chunks_exact_mut(n)).enumerate() {
            self.model.drift(xi, oi);
            self.model.input_field(xi, &mut self.gx);
            for (o, gv) in oi.iter_mut().zip(&self.gx) {
                *o += gv * self.u[i];
            }
        }
    }

    fn step(&mut self, x: &mut [f64], h: f64) {
        self.field(x, 0);
        for (s, (xv, k)) in self.stage.iter_mut().zip(x.iter().zip(&self.k[0])) {
            *s = xv + 0.5 * h * k;
        }
        let stage = std::mem::take(&mut self.stage);
        self.field(&stage, 1);
        let mut stage = stage;
        for (s, (xv, k)) in stage.iter_mut().zip(x.iter().zip(&self.k[1])) {
            *s = xv + 0.5 * h * k;
        }
        self.field(&stage, 2);
        for (s, (xv, k)) in stage.iter_mut().zip(x.iter().zip(&self.k[2])) {
            *s = xv + h * k;
        }
        self.field(&stage, 3);
        self.stage = stage;
        let [k1, k2, k3, k4] = &self.k;
        for (i, xv) in x.iter_mut().enumerate() {
            *xv += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

fn check_finite(x: &[f64], t: f64) -> Result<()> {
    if x.iter().any(|v| !v.is_finite() || v.abs() > DIVERGENCE_LIMIT) {
        return Err(Error::Diverged { time: t });
    }
    Ok(())
}

fn check_layout(x: &[f64], g: &WeightedGraph, model: &dyn AgentModel) -> Result<()> {
    if x.len() != g.node_count() * model.state_dim() {
        return Err(Error::DimensionMismatch(format!(
            "state of length {} for {} agents of dimension {}",
            x.len(),
            g.node_count(),
            model.state_dim()
        )));
    }
    Ok(())
}

/// One classical RK4 step of the coupled network.
pub fn rk4_step(
    state: &NetworkState,
    h: f64,
    g: &WeightedGraph,
    model: &dyn AgentModel,
    beta: f64,
) -> Result<NetworkState> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step h = {h} must be positive")));
    }
    check_layout(&state.x, g, model)?;
    check_finite(&state.x, state.t)?;
    let mut x = state.x.clone();
    Rk4::new(g, model, beta).step(&mut x, h);
    let t = state.t + h;
    check_finite(&x, t)?;
    Ok(NetworkState { t, x })
}

/// Integrates from `x0` over `[0, t_end]`, recording every `record_interval`.
///
/// Deterministic: identical inputs give bitwise-identical trajectories.
pub fn simulate(
    g: &WeightedGraph,
    model: &dyn AgentModel,
    beta: f64,
    x0: &[f64],
    config: &SimConfig,
    monitors: &Monitors,
) -> Result<Trajectory> {
    check_layout(x0, g, model)?;
    check_finite(x0, 0.0)?;
    let (steps, stride) = config.grid()?;
    let n = model.state_dim();
    if let Some(p) = &monitors.metric {
        if p.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} monitor metric for state dimension {n}",
                p.rows(),
                p.cols()
            )));
        }
        let min = sym_eig(p)?.min();
        if min <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
        }
    }

    let records = steps / stride + 1;
    let mut traj = Trajectory {
        times: Vec::with_capacity(records),
        states: Vec::with_capacity(records),
        inputs: Vec::with_capacity(records),
        energy: monitors.metric.as_ref().map(|_| Vec::with_capacity(records)),
        sync_error: Vec::with_capacity(records),
        meta: TrajectoryMeta {
            graph_hash: g.fingerprint(),
            model: model.name().to_string(),
            beta,
            seed: None,
            h: config.h,
            agents: g.node_count(),
            state_dim: n,
        },
    };
    let record = |traj: &mut Trajectory, step: usize, x: &[f64]| {
        let mut u = vec![0.0; g.node_count()];
        coupling_inputs_into(x, n, g, model, beta, &mut u);
        traj.times.push(step as f64 * config.h);
        traj.states.push(x.to_vec());
        traj.inputs.push(u);
        if let (Some(p), Some(e)) = (&monitors.metric, traj.energy.as_mut()) {
            e.push(edge_energy_unchecked(x, g, p).edge_energy);
        }
        traj.sync_error.push(sync_error(x, n));
    };

    let mut rk = Rk4::new(g, model, beta);
    let mut x = x0.to_vec();
    record(&mut traj, 0, &x);
    for step in 1..=steps {
        rk.step(&mut x, config.h);
        check_finite(&x, step as f64 * config.h)?;
        if step % stride == 0 {
            record(&mut traj, step, &x);
        }
    }
    Ok(traj)
}

/// `base` repeated for every agent plus independent uniform perturbations
/// from the ball of `radius`, seeded.
pub fn perturbed_initial_conditions(base: &[f64], agents: usize, radius: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..agents)
        .flat_map(|_| point_in_ball(&mut rng, base, radius))
        .collect()
}
