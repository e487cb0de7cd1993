//! Post-hoc analysis: pairwise synchronization error, edge energy
//! `V = Σ wᵢ eᵢᵀ P eᵢ`, monotonicity and exponential-rate fits.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::numerics::{sym_eig, Matrix};
use crate::simulator::Trajectory;

/// Default relative tolerance for [`check_monotone`].
pub const MONOTONE_TOL: f64 = 1e-6;

/// `Σ_{i<j} ‖xᵢ − x_j‖₂` over unordered pairs; `states` is agent-major.
pub fn sync_error(states: &[f64], dim: usize) -> f64 {
    let agents: Vec<&[f64]> = states.chunks_exact(dim).collect();
    let mut total = 0.0;
    for (i, xi) in agents.iter().enumerate() {
        for xj in &agents[i + 1..] {
            total += xi
                .iter()
                .zip(xj.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
        }
    }
    total
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyncMetrics {
    pub sync_error: f64,
    /// `V = Σ wᵢ Vᵢ`.
    pub edge_energy: f64,
    /// `Vᵢ = eᵢᵀ P eᵢ` with `eᵢ = x_l − x_k`, unweighted.
    pub per_edge: Vec<f64>,
}

/// Edge energy and synchronization error for one stacked state.
pub fn edge_energy(states: &[f64], g: &WeightedGraph, p: &Matrix) -> Result<SyncMetrics> {
    let n = p.rows();
    if !p.is_square() || states.len() != g.node_count() * n {
        return Err(Error::DimensionMismatch(format!(
            "{} state entries for {} agents with a {}x{} metric",
            states.len(),
            g.node_count(),
            p.rows(),
            p.cols()
        )));
    }
    let min = sym_eig(p)?.min();
    if min <= 0.0 {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    Ok(edge_energy_unchecked(states, g, p))
}

pub(crate) fn edge_energy_unchecked(states: &[f64], g: &WeightedGraph, p: &Matrix) -> SyncMetrics {
    let n = p.rows();
    let mut e = vec![0.0; n];
    let mut per_edge = Vec::with_capacity(g.edge_count());
    let mut total = 0.0;
    for edge in g.edges() {
        let (xk, xl) = (&states[edge.k * n..][..n], &states[edge.l * n..][..n]);
        for (d, (a, b)) in e.iter_mut().zip(xl.iter().zip(xk)) {
            *d = a - b;
        }
        let vi = p.quadratic_form(&e);
        total += edge.weight * vi;
        per_edge.push(vi);
    }
    SyncMetrics {
        sync_error: sync_error(states, n),
        edge_energy: total,
        per_edge,
    }
}

/// Recorded channel of a [`Trajectory`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Energy,
    SyncError,
}

impl Channel {
    pub fn values<'a>(&self, traj: &'a Trajectory) -> Result<&'a [f64]> {
        match self {
            Channel::Energy => traj
                .energy
                .as_deref()
                .ok_or_else(|| Error::MissingChannel("V".into())),
            Channel::SyncError => Ok(&traj.sync_error),
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Channel::Energy => "V",
            Channel::SyncError => "sync_error",
        })
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "V" | "energy" => Ok(Channel::Energy),
            "sync_error" => Ok(Channel::SyncError),
            other => Err(Error::MissingChannel(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Minus the slope of `log(channel)` against `t`.
    pub rate: f64,
    pub r_squared: f64,
    /// Window actually used.
    pub window: (f64, f64),
    /// Set when nonpositive values forced the window down to its positive
    /// prefix.
    pub clipped: bool,
}

/// Least-squares fit of `log(channel)` on `t` over `window` (inclusive).
pub fn fit_decay_rate(traj: &Trajectory, channel: Channel, window: (f64, f64)) -> Result<DecayFit> {
    let values = channel.values(traj)?;
    fit_log_linear(&traj.times, values, window)
}

pub fn fit_log_linear(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<DecayFit> {
    let (start, end) = window;
    let empty = || Error::EmptyWindow { start, end };
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let mut clipped = false;
    for (&t, &v) in times.iter().zip(values) {
        if t < start - 1e-12 || t > end + 1e-12 {
            continue;
        }
        if !(v > 0.0) {
            clipped = true;
            break;
        }
        pts.push((t, v.ln()));
    }
    if pts.len() < 2 {
        return Err(empty());
    }
    let m = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for &(t, y) in &pts {
        stt += (t - tm) * (t - tm);
        sty += (t - tm) * (y - ym);
        syy += (y - ym) * (y - ym);
    }
    if stt == 0.0 {
        return Err(empty());
    }
    let slope = sty / stt;
    let ss_res: f64 = pts
        .iter()
        .map(|&(t, y)| {
            let r = y - (ym + slope * (t - tm));
            r * r
        })
        .sum();
    // A constant channel is fitted exactly.
    let r_squared = if syy <= f64::EPSILON * ym.abs().max(1.0) * m {
        1.0
    } else {
        1.0 - ss_res / syy
    };
    Ok(DecayFit {
        rate: -slope,
        r_squared,
        window: (pts[0].0, pts[pts.len() - 1].0),
        clipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneCheck {
    /// `max_k (v_{k+1} − v_k)`.
    pub largest_uptick: f64,
    /// `max_k (v_{k+1} − v_k) / max(1, v_k)`.
    pub largest_relative_uptick: f64,
    pub passed: bool,
}

pub fn check_monotone(traj: &Trajectory, channel: Channel, tol: f64) -> Result<MonotoneCheck> {
    Ok(monotone_series(channel.values(traj)?, tol))
}

/// Passes iff every step satisfies `v_{k+1} − v_k ≤ tol·max(1, v_k)`.
pub fn monotone_series(values: &[f64], tol: f64) -> MonotoneCheck {
    let mut largest = f64::NEG_INFINITY;
    let mut relative = f64::NEG_INFINITY;
    for w in values.windows(2) {
        let up = w[1] - w[0];
        largest = largest.max(up);
        relative = relative.max(up / w[0].abs().max(1.0));
    }
    if values.len() < 2 {
        largest = 0.0;
        relative = 0.0;
    }
    MonotoneCheck {
        largest_uptick: largest,
        largest_relative_uptick: relative,
        passed: relative <= tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_matrices, random_connected_graph};
    use crate::simulator::TrajectoryMeta;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn synthetic(times: Vec<f64>, v: Vec<f64>) -> Trajectory {
        let len = times.len();
        Trajectory {
            times,
            states: vec![vec![0.0]; len],
            inputs: vec![vec![0.0]; len],
            energy: Some(v.clone()),
            sync_error: v,
            meta: TrajectoryMeta {
                graph_hash: 0,
                model: "synthetic".into(),
                beta: 0.0,
                seed: None,
                h: 0.1,
                agents: 1,
                state_dim: 1,
            },
        }
    }

    #[test]
    fn sync_error_by_hand() {
        assert_eq!(sync_error(&[2.0, 2.0, 2.0], 1), 0.0);
        assert_eq!(sync_error(&[0.0, 3.0], 1), 3.0);
        assert_eq!(sync_error(&[0.0, 1.0, 3.0], 1), 6.0);
        assert_eq!(sync_error(&[0.0, 0.0, 3.0, 4.0], 2), 5.0);
    }

    #[test]
    fn single_edge_energy() {
        let g = WeightedGraph::from_unordered(2, [(0, 1, 2.0)]).unwrap();
        let s = edge_energy(&[0.0, 1.0], &g, &Matrix::identity(1)).unwrap();
        assert_eq!(s.edge_energy, 2.0);
        assert_eq!(s.per_edge, vec![1.0]);
        let s = edge_energy(&[4.0, 4.0], &g, &Matrix::identity(1)).unwrap();
        assert_eq!(s.edge_energy, 0.0);
        assert!(matches!(
            edge_energy(&[0.0, 1.0], &g, &Matrix::from_diag(&[-1.0])),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn energy_forms_and_bounds_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = Matrix::from_rows(&[[2.0, 0.4], [0.4, 0.5]]).unwrap();
        let p_lower = sym_eig(&p).unwrap().min();
        for seed in 0..100 {
            let g = random_connected_graph(6, 0.5, (0.1, 6.0), seed).unwrap();
            let m = build_matrices(&g).unwrap();
            let x: Vec<f64> = (0..12).map(|_| rng.random_range(-5.0..5.0)).collect();
            let s = edge_energy(&x, &g, &p).unwrap();
            let quad = m.l.kron(&p).quadratic_form(&x);
            assert!((s.edge_energy - quad).abs() <= 1e-10 * quad.max(1.0));
            let lower: f64 = g
                .edges()
                .iter()
                .map(|e| {
                    let d0 = x[2 * e.l] - x[2 * e.k];
                    let d1 = x[2 * e.l + 1] - x[2 * e.k + 1];
                    e.weight * (d0 * d0 + d1 * d1)
                })
                .sum();
            assert!(s.edge_energy >= p_lower * lower - 1e-9);
            assert!(s.sync_error > 0.0);
        }
    }

    #[test]
    fn zero_energy_means_agreement() {
        let g = random_connected_graph(5, 0.3, (0.1, 6.0), 4).unwrap();
        let x: Vec<f64> = (0..5).flat_map(|_| [0.5, -1.0]).collect();
        let s = edge_energy(&x, &g, &Matrix::identity(2)).unwrap();
        assert_eq!(s.edge_energy, 0.0);
        assert_eq!(s.sync_error, 0.0);
    }

    #[test]
    fn exact_exponential_rate() {
        let times: Vec<f64> = (0..=50).map(|k| k as f64 * 0.1).collect();
        let v = times.iter().map(|t| 5.0 * (-2.0 * t).exp()).collect();
        let fit = fit_decay_rate(&synthetic(times, v), Channel::Energy, (0.0, 5.0)).unwrap();
        assert!((fit.rate - 2.0).abs() <= 1e-9);
        assert!((fit.r_squared - 1.0).abs() <= 1e-12);
        assert!(!fit.clipped);
    }

    #[test]
    fn constant_channel() {
        let times: Vec<f64> = (0..10).map(|k| k as f64).collect();
        let traj = synthetic(times, vec![3.0; 10]);
        let fit = fit_decay_rate(&traj, Channel::SyncError, (0.0, 9.0)).unwrap();
        assert_eq!(fit.rate, 0.0);
        assert_eq!(fit.r_squared, 1.0);
        let mono = check_monotone(&traj, Channel::Energy, MONOTONE_TOL).unwrap();
        assert_eq!(mono.largest_uptick, 0.0);
        assert!(mono.passed);
    }

    #[test]
    fn nonpositive_values_clip_the_window() {
        let times: Vec<f64> = (0..6).map(|k| k as f64).collect();
        let v = vec![8.0, 4.0, 2.0, 0.0, 0.0, 0.0];
        let fit = fit_decay_rate(&synthetic(times.clone(), v), Channel::Energy, (0.0, 5.0)).unwrap();
        assert!(fit.clipped);
        assert_eq!(fit.window, (0.0, 2.0));
        assert!((fit.rate - 2f64.ln()).abs() < 1e-12);
        let v = vec![8.0, 0.0, 2.0, 0.0, 0.0, 0.0];
        assert!(matches!(
            fit_decay_rate(&synthetic(times.clone(), v), Channel::Energy, (0.0, 5.0)),
            Err(Error::EmptyWindow { .. })
        ));
        let v = vec![1.0; 6];
        assert!(fit_decay_rate(&synthetic(times, v), Channel::Energy, (10.0, 20.0)).is_err());
    }

    #[test]
    fn monotone_detection() {
        let m = monotone_series(&[4.0, 3.0, 2.0, 1.0], MONOTONE_TOL);
        assert!(m.largest_uptick < 0.0 && m.passed);
        let m = monotone_series(&[4.0, 3.0, 3.5, 1.0], MONOTONE_TOL);
        assert_eq!(m.largest_uptick, 0.5);
        assert!(!m.passed);
        let m = monotone_series(&[1e6, 1e6 + 0.5], MONOTONE_TOL);
        assert!(m.passed);
    }

    #[test]
    fn missing_energy_channel() {
        let mut traj = synthetic(vec![0.0, 1.0], vec![1.0, 0.5]);
        traj.energy = None;
        assert!(matches!(
            check_monotone(&traj, Channel::Energy, 1e-6),
            Err(Error::MissingChannel(_))
        ));
        assert_eq!("V".parse::<Channel>().unwrap(), Channel::Energy);
        assert_eq!("sync_error".parse::<Channel>().unwrap(), Channel::SyncError);
        assert!("x".parse::<Channel>().is_err());
    }
}
