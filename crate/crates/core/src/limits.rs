//! Reference solvers for the `τ → 0` and `η → 0` limit systems and
//! parameter sweeps measuring how the full system approaches them.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{CUpdateMode, CellState, Grid, ModelParams, SolverConfig};
use crate::scheme::{self, RunOutput, Trajectory};
use crate::tridiag;

/// Which singular limit a sweep approaches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitSystem {
    /// `0 = η Δc - c + ρ`.
    TauZero,
    /// `τ ∂t c = -c + ρ`.
    EtaZero,
}

impl LimitSystem {
    pub fn parameter_name(&self) -> &'static str {
        match self {
            Self::TauZero => "tau",
            Self::EtaZero => "eta",
        }
    }

    /// `params` with the swept parameter set to `value`.
    pub fn with_value(&self, params: &ModelParams, value: f64) -> ModelParams {
        match self {
            Self::TauZero => ModelParams { tau: value, ..*params },
            Self::EtaZero => ModelParams { eta: value, ..*params },
        }
    }
}

/// Solves `(I - η D2) c = ρ` with mirrored ghost cells.
///
/// One step of iterative refinement keeps the residual at round-off level
/// for large `η / dx²`.
pub fn solve_elliptic_c(rho: &[f64], eta: f64, grid: &Grid) -> Result<Vec<f64>> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Domain {
            what: "eta",
            value: eta,
        });
    }
    if rho.len() != grid.n_cells {
        return Err(Error::LengthMismatch {
            expected: grid.n_cells,
            got: rho.len(),
        });
    }
    let b = eta / (grid.dx * grid.dx);
    let mut c = tridiag::solve_shifted_neumann_laplacian(1.0, b, rho)?;
    let d2 = tridiag::neumann_second_difference(&c);
    let r: Vec<f64> = rho
        .iter()
        .zip(&c)
        .zip(&d2)
        .map(|((&r, &c), &l)| r - (c - b * l))
        .collect();
    let corr = tridiag::solve_shifted_neumann_laplacian(1.0, b, &r)?;
    for (ci, di) in c.iter_mut().zip(&corr) {
        *ci += di;
    }
    Ok(c)
}

/// Pointwise update of `τ ∂t c = -c + ρ` over one step.
pub fn step_ode_c(c: &[f64], rho: &[f64], tau: f64, dt: f64, mode: CUpdateMode) -> Vec<f64> {
    let rate = dt / tau;
    let gain = match mode {
        CUpdateMode::Explicit => rate,
        CUpdateMode::Implicit => rate / (1.0 + rate),
    };
    c.iter().zip(rho).map(|(&c, &r)| c + gain * (r - c)).collect()
}

/// Runs a limit system with the same density stepper as the full system.
pub fn run_limit_system(
    which: LimitSystem,
    initial: &CellState,
    params: &ModelParams,
    config: &SolverConfig,
    grid: &Grid,
    t_end: f64,
    sample_interval: f64,
) -> Result<RunOutput> {
    let limit_params = which.with_value(params, 0.0);
    limit_params.validate()?;
    scheme::run(initial, t_end, &limit_params, config, grid, sample_interval, &mut [])
}

/// `(Σ_k Δt_k Σ_i dx (ρa - ρb)²)^{1/2}` with `Δt_k = t_k - t_{k-1}` for samples after the first.
pub fn l2_space_time_distance(a: &Trajectory, b: &Trajectory, grid: &Grid) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::MismatchedSampling);
    }
    let mut acc = 0.0;
    for k in 0..a.len() {
        if (a.times[k] - b.times[k]).abs() > 1e-9 * (1.0 + a.times[k].abs()) {
            return Err(Error::MismatchedSampling);
        }
        if a.rho[k].len() != grid.n_cells || b.rho[k].len() != grid.n_cells {
            return Err(Error::MismatchedSampling);
        }
        if k == 0 {
            continue;
        }
        let weight = a.times[k] - a.times[k - 1];
        acc += weight * l2_space_squared(&a.rho[k], &b.rho[k], grid);
    }
    Ok(acc.sqrt())
}

fn l2_space_squared(a: &[f64], b: &[f64], grid: &Grid) -> f64 {
    grid.dx * a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>()
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub which: LimitSystem,
    pub parameter_values: Vec<f64>,
    /// Space-time L² distance of each run to the limit trajectory.
    pub distances: Vec<f64>,
    pub sample_times: Vec<f64>,
    /// `snapshot_distances[j][k]`: spatial L² distance for value `j` at sample `k`.
    pub snapshot_distances: Vec<Vec<f64>>,
    pub final_states: Vec<CellState>,
    pub limit_final: CellState,
    /// Set for `η → 0` sweeps with `m > 2`, where convergence is not established.
    pub outside_proven_regime: bool,
}

/// Runs the full system at each value (in parallel) and the limit system once.
pub fn sweep(
    which: LimitSystem,
    parameter_values: &[f64],
    initial: &CellState,
    params: &ModelParams,
    config: &SolverConfig,
    grid: &Grid,
    t_end: f64,
    sample_interval: f64,
) -> Result<SweepResult> {
    if parameter_values.is_empty() {
        return Err(Error::InvalidParams("sweep needs at least one parameter value".into()));
    }
    if parameter_values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidParams("sweep values must be positive".into()));
    }
    if parameter_values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParams("sweep values must be strictly decreasing".into()));
    }
    let reference = run_limit_system(which, initial, params, config, grid, t_end, sample_interval)?;
    let runs: Vec<Result<RunOutput>> = parameter_values
        .par_iter()
        .map(|&v| {
            let p = which.with_value(params, v);
            p.validate()?;
            scheme::run(initial, t_end, &p, config, grid, sample_interval, &mut [])
        })
        .collect();
    let runs: Vec<RunOutput> = runs.into_iter().collect::<Result<_>>()?;

    let mut distances = Vec::with_capacity(runs.len());
    let mut snapshot_distances = Vec::with_capacity(runs.len());
    for r in &runs {
        distances.push(l2_space_time_distance(&r.trajectory, &reference.trajectory, grid)?);
        snapshot_distances.push(
            r.trajectory
                .rho
                .iter()
                .zip(&reference.trajectory.rho)
                .map(|(a, b)| l2_space_squared(a, b, grid).sqrt())
                .collect(),
        );
    }
    Ok(SweepResult {
        which,
        parameter_values: parameter_values.to_vec(),
        distances,
        sample_times: reference.trajectory.times.clone(),
        snapshot_distances,
        final_states: runs.into_iter().map(|r| r.state).collect(),
        limit_final: reference.state,
        outside_proven_regime: which == LimitSystem::EtaZero && params.m > 2.0,
    })
}
