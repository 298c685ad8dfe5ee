//! Upwind finite-volume time stepper.
//!
//! One step advances the chemical first (using only level k-1 data), then
//! solves the implicit density equation
//!
//! ```text
//! (ρ_i^k - ρ_i^{k-1})/dt + (F_{i+1/2} - F_{i-1/2})/dx = 0
//! F_{i+1/2} = -(1/dx) [ ψ_{i+1/2} (ρ_{i+1} - ρ_i) - χ φ_{i+1/2} (c_{i+1} - c_i) ]
//! ```
//!
//! by Newton's method with the exact tridiagonal Jacobian of the active
//! upwind branch. Boundary fluxes are zero, so the discrete mass telescopes.

use std::sync::atomic::{AtomicBool, Ordering};

use log::warn;

use crate::diagnostics::{total_mass, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::limits;
use crate::model::{
    bound_violation, pow_m1, pow_m1_derivative, CUpdateMode, CellState, Grid, ModelParams, SolverConfig,
    DEFAULT_BOUND_TOLERANCE,
};
use crate::tridiag;

/// Interface fluxes `F_{1/2}, ..., F_{N+1/2}`; both ends are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxField {
    pub f: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepReport {
    /// Residual evaluations performed by Newton (1 when the initial guess already solves).
    pub newton_iterations: usize,
    pub final_residual_norm: f64,
    /// Largest overshoot of [0, 1] in the new state.
    pub bound_violation: f64,
    /// Number of times the step was split in half to recover from a failed solve.
    pub halvings: u32,
}

impl StepReport {
    fn merge(self, other: StepReport) -> StepReport {
        StepReport {
            newton_iterations: self.newton_iterations + other.newton_iterations,
            final_residual_norm: self.final_residual_norm.max(other.final_residual_norm),
            bound_violation: self.bound_violation.max(other.bound_violation),
            halvings: self.halvings.max(other.halvings),
        }
    }
}

fn check_unit(what: &'static str, v: f64) -> Result<()> {
    if !(-DEFAULT_BOUND_TOLERANCE..=1.0 + DEFAULT_BOUND_TOLERANCE).contains(&v) {
        return Err(Error::Domain { what, value: v });
    }
    Ok(())
}

#[inline]
fn psi(left: f64, right: f64, m: f64) -> f64 {
    if right - left >= 0.0 {
        (1.0 - left) * pow_m1(right, m)
    } else {
        (1.0 - right) * pow_m1(left, m)
    }
}

#[inline]
fn phi(left: f64, right: f64, c_left: f64, c_right: f64) -> f64 {
    if c_right - c_left >= 0.0 {
        left * (1.0 - right)
    } else {
        right * (1.0 - left)
    }
}

/// Upwinded diffusion coefficient `ψ_{i+1/2}`.
pub fn interface_diffusion(rho_left: f64, rho_right: f64, m: f64) -> Result<f64> {
    check_unit("rho_left", rho_left)?;
    check_unit("rho_right", rho_right)?;
    Ok(psi(rho_left, rho_right, m))
}

/// Upwinded mobility `φ_{i+1/2}`, oriented by the chemical gradient.
pub fn interface_mobility(rho_left: f64, rho_right: f64, c_left: f64, c_right: f64) -> Result<f64> {
    check_unit("rho_left", rho_left)?;
    check_unit("rho_right", rho_right)?;
    Ok(phi(rho_left, rho_right, c_left, c_right))
}

pub fn assemble_fluxes(rho: &[f64], c: &[f64], params: &ModelParams, grid: &Grid) -> Result<FluxField> {
    let n = grid.n_cells;
    for v in [rho, c] {
        if v.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: v.len(),
            });
        }
    }
    let mut f = vec![0.0; n + 1];
    for k in 1..n {
        let (l, r) = (rho[k - 1], rho[k]);
        let (cl, cr) = (c[k - 1], c[k]);
        f[k] = -(psi(l, r, params.m) * (r - l) - params.chi * phi(l, r, cl, cr) * (cr - cl)) / grid.dx;
    }
    Ok(FluxField { f })
}

/// Largest dt for which the explicit chemical update is monotone.
pub fn explicit_c_dt_limit(params: &ModelParams, grid: &Grid) -> f64 {
    let dx2 = grid.dx * grid.dx;
    params.tau * dx2 / (2.0 * params.eta + dx2)
}

static STABILITY_WARNED: AtomicBool = AtomicBool::new(false);

/// Advances the chemical from level k-1 to k.
pub fn update_c(state: &CellState, params: &ModelParams, config: &SolverConfig, grid: &Grid) -> Result<Vec<f64>> {
    if !(params.tau > 0.0) {
        return Err(Error::InvalidParams(
            "update_c needs tau > 0; use limits::solve_elliptic_c for tau = 0".into(),
        ));
    }
    state.check_grid(grid)?;
    if params.eta == 0.0 {
        return Ok(limits::step_ode_c(
            &state.c,
            &state.rho,
            params.tau,
            config.dt,
            config.c_update_mode,
        ));
    }
    let dx2 = grid.dx * grid.dx;
    let d2 = tridiag::neumann_second_difference(&state.c);
    match config.c_update_mode {
        CUpdateMode::Explicit => {
            if config.dt > explicit_c_dt_limit(params, grid) && !STABILITY_WARNED.swap(true, Ordering::Relaxed) {
                warn!(
                    "explicit c update with dt = {:e} exceeds the stability limit {:e}",
                    config.dt,
                    explicit_c_dt_limit(params, grid)
                );
            }
            let rate = config.dt / params.tau;
            Ok(state
                .c
                .iter()
                .zip(&state.rho)
                .zip(&d2)
                .map(|((&c, &r), &lap)| c + rate * (params.eta * lap / dx2 - c + r))
                .collect())
        }
        CUpdateMode::Implicit => {
            // Solve for the increment so that equilibria are reproduced exactly.
            let rhs: Vec<f64> = state
                .c
                .iter()
                .zip(&state.rho)
                .zip(&d2)
                .map(|((&c, &r), &lap)| params.eta * lap / dx2 - c + r)
                .collect();
            if rhs.iter().all(|&v| v == 0.0) {
                return Ok(state.c.clone());
            }
            let delta = tridiag::solve_shifted_neumann_laplacian(params.tau / config.dt + 1.0, params.eta / dx2, &rhs)?;
            Ok(state.c.iter().zip(&delta).map(|(c, d)| c + d).collect())
        }
    }
}

/// Residual, its tridiagonal Jacobian and a per-row magnitude scale.
struct Linearization {
    residual: Vec<f64>,
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    scale: f64,
}

fn linearize(rho: &[f64], rho_old: &[f64], c: &[f64], params: &ModelParams, dt: f64, dx: f64) -> Linearization {
    let n = rho.len();
    let m = params.m;
    let chi = params.chi;
    // Flux and its partial derivatives at interior interfaces k = 1..n-1.
    let mut f = vec![0.0; n + 1];
    let mut f_abs = vec![0.0; n + 1];
    let mut df_dl = vec![0.0; n + 1];
    let mut df_dr = vec![0.0; n + 1];
    for k in 1..n {
        let (l, r) = (rho[k - 1], rho[k]);
        let dr = r - l;
        let dc = c[k] - c[k - 1];
        let (ps, dps_l, dps_r) = if dr >= 0.0 {
            (
                (1.0 - l) * pow_m1(r, m),
                -pow_m1(r, m),
                (1.0 - l) * pow_m1_derivative(r, m),
            )
        } else {
            (
                (1.0 - r) * pow_m1(l, m),
                (1.0 - r) * pow_m1_derivative(l, m),
                -pow_m1(l, m),
            )
        };
        let (ph, dph_l, dph_r) = if dc >= 0.0 {
            (l * (1.0 - r), 1.0 - r, -l)
        } else {
            (r * (1.0 - l), -r, 1.0 - l)
        };
        f[k] = -(ps * dr - chi * ph * dc) / dx;
        f_abs[k] = ((ps * dr).abs() + (chi * ph * dc).abs()) / dx;
        df_dl[k] = -(dps_l * dr - ps - chi * dph_l * dc) / dx;
        df_dr[k] = -(dps_r * dr + ps - chi * dph_r * dc) / dx;
    }
    let mut residual = vec![0.0; n];
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut scale: f64 = 0.0;
    for i in 0..n {
        residual[i] = (rho[i] - rho_old[i]) / dt + (f[i + 1] - f[i]) / dx;
        diag[i] = 1.0 / dt + (df_dl[i + 1] - df_dr[i]) / dx;
        if i + 1 < n {
            upper[i] = df_dr[i + 1] / dx;
        }
        if i > 0 {
            lower[i] = -df_dl[i] / dx;
        }
        scale = scale.max((rho[i].abs() + rho_old[i].abs()) / dt + (f_abs[i + 1] + f_abs[i]) / dx);
    }
    Linearization {
        residual,
        lower,
        diag,
        upper,
        scale,
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter()
        .fold(0.0, |a, &x| if x.is_nan() { f64::INFINITY } else { a.max(x.abs()) })
}

/// Implicit density update with the chemical frozen at `c_new`.
///
/// Converges when the max-norm residual drops below `newton_tol`, or below
/// `8 ε` times the magnitude of the residual's terms when that floor is
/// larger (tiny dt makes `1e-12` unreachable in floating point).
pub fn update_rho(
    state: &CellState,
    c_new: &[f64],
    params: &ModelParams,
    config: &SolverConfig,
    grid: &Grid,
) -> Result<(Vec<f64>, StepReport)> {
    state.check_grid(grid)?;
    if c_new.len() != grid.n_cells {
        return Err(Error::LengthMismatch {
            expected: grid.n_cells,
            got: c_new.len(),
        });
    }
    let dt = config.dt;
    let mut rho = state.rho.clone();
    let mut last_norm = f64::INFINITY;
    for k in 0..=config.newton_max_iter {
        let lin = linearize(&rho, &state.rho, c_new, params, dt, grid.dx);
        let norm = max_norm(&lin.residual);
        last_norm = norm;
        let tol = config.newton_tol.max(8.0 * f64::EPSILON * lin.scale);
        if norm <= tol {
            return Ok((
                rho.clone(),
                StepReport {
                    newton_iterations: k + 1,
                    final_residual_norm: norm,
                    bound_violation: bound_violation(&rho),
                    halvings: 0,
                },
            ));
        }
        if k == config.newton_max_iter || !norm.is_finite() {
            break;
        }
        let rhs: Vec<f64> = lin.residual.iter().map(|r| -r).collect();
        let delta = match tridiag::solve(&lin.lower, &lin.diag, &lin.upper, &rhs) {
            Ok(d) => d,
            Err(_) => break,
        };
        for (r, d) in rho.iter_mut().zip(&delta) {
            *r += d;
        }
    }
    Err(Error::NonConvergence {
        iterations: config.newton_max_iter,
        residual: last_norm,
    })
}

/// One step of size `config.dt`: chemical first, then density.
///
/// With `tau = 0` the chemical is slaved to the density through the elliptic
/// equation before and after the density solve.
pub fn step(
    state: &CellState,
    params: &ModelParams,
    config: &SolverConfig,
    grid: &Grid,
) -> Result<(CellState, StepReport)> {
    let (rho, c, mut report) = if params.tau == 0.0 {
        let c_old = limits::solve_elliptic_c(&state.rho, params.eta, grid)?;
        let (rho, report) = update_rho(state, &c_old, params, config, grid)?;
        let c = limits::solve_elliptic_c(&rho, params.eta, grid)?;
        (rho, c, report)
    } else {
        let c = update_c(state, params, config, grid)?;
        let (rho, report) = update_rho(state, &c, params, config, grid)?;
        (rho, c, report)
    };
    report.bound_violation = report.bound_violation.max(bound_violation(&c));
    Ok((
        CellState {
            rho,
            c,
            t: state.t + config.dt,
        },
        report,
    ))
}

/// [`step`] with recovery: on a failed solve the interval is split into two
/// half steps, recursively, at most `config.max_halvings` levels deep.
pub fn advance(
    state: &CellState,
    params: &ModelParams,
    config: &SolverConfig,
    grid: &Grid,
) -> Result<(CellState, StepReport)> {
    advance_level(state, params, config, grid, 0)
}

fn advance_level(
    state: &CellState,
    params: &ModelParams,
    config: &SolverConfig,
    grid: &Grid,
    level: u32,
) -> Result<(CellState, StepReport)> {
    match step(state, params, config, grid) {
        Ok((s, mut r)) => {
            r.halvings = level;
            Ok((s, r))
        }
        Err(e @ (Error::NonConvergence { .. } | Error::SingularSystem { .. })) => {
            if level >= config.max_halvings {
                return Err(e);
            }
            let half = SolverConfig {
                dt: 0.5 * config.dt,
                ..*config
            };
            let (mid, r1) = advance_level(state, params, &half, grid, level + 1)?;
            let (end, r2) = advance_level(&mid, params, &half, grid, level + 1)?;
            Ok((end, r1.merge(r2)))
        }
        Err(e) => Err(e),
    }
}

/// Receives every sampled state during [`run`].
pub trait Observer {
    fn observe(&mut self, state: &CellState, record: &DiagnosticsRecord);
}

impl<F: FnMut(&CellState, &DiagnosticsRecord)> Observer for F {
    fn observe(&mut self, state: &CellState, record: &DiagnosticsRecord) {
        self(state, record)
    }
}

/// Sampled states of a run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub rho: Vec<Vec<f64>>,
    pub c: Vec<Vec<f64>>,
}

impl Trajectory {
    fn push(&mut self, s: &CellState) {
        self.times.push(s.t);
        self.rho.push(s.rho.clone());
        self.c.push(s.c.clone());
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: CellState,
    pub records: Vec<DiagnosticsRecord>,
    pub trajectory: Trajectory,
    pub steps: usize,
    pub newton_iterations: usize,
    /// Steps whose new state left [0, 1] by more than `bound_tolerance`.
    pub bound_events: usize,
    pub max_bound_violation: f64,
    pub max_halvings: u32,
}

/// Steps from `initial.t` to `t_end`, sampling every `sample_interval`
/// (rounded to a whole number of steps) plus the final state.
///
/// Times are computed as `t0 + k dt`, so the final time is within one `dt`
/// of `t_end`.
pub fn run(
    initial: &CellState,
    t_end: f64,
    params: &ModelParams,
    config: &SolverConfig,
    grid: &Grid,
    sample_interval: f64,
    observers: &mut [&mut dyn Observer],
) -> Result<RunOutput> {
    params.validate()?;
    config.validate()?;
    initial.check_grid(grid)?;
    if !(t_end >= initial.t) {
        return Err(Error::InvalidParams(format!(
            "t_end = {t_end} precedes the initial time {}",
            initial.t
        )));
    }
    let t0 = initial.t;
    let n_steps = (((t_end - t0) / config.dt) - 1e-9).ceil().max(0.0) as usize;
    let sample_every = if sample_interval > 0.0 {
        ((sample_interval / config.dt).round() as usize).max(1)
    } else {
        usize::MAX
    };
    let mass = total_mass(&initial.rho, grid);

    let mut state = initial.clone();
    if params.tau == 0.0 {
        state.c = limits::solve_elliptic_c(&state.rho, params.eta, grid)?;
    }
    let mut out = RunOutput {
        state: state.clone(),
        records: Vec::new(),
        trajectory: Trajectory::default(),
        steps: 0,
        newton_iterations: 0,
        bound_events: 0,
        max_bound_violation: state.bound_violation(),
        max_halvings: 0,
    };
    let sample = |s: &CellState, out: &mut RunOutput, observers: &mut [&mut dyn Observer]| {
        let rec = DiagnosticsRecord::compute(s, params, grid, mass);
        for o in observers.iter_mut() {
            o.observe(s, &rec);
        }
        out.records.push(rec);
        out.trajectory.push(s);
    };
    sample(&state, &mut out, observers);

    for k in 1..=n_steps {
        let (mut next, report) = advance(&state, params, config, grid)?;
        next.t = t0 + k as f64 * config.dt;
        out.newton_iterations += report.newton_iterations;
        out.max_halvings = out.max_halvings.max(report.halvings);
        out.max_bound_violation = out.max_bound_violation.max(report.bound_violation);
        if report.bound_violation > config.bound_tolerance {
            if out.bound_events == 0 {
                warn!("bound violation {:e} at t = {}", report.bound_violation, next.t);
            }
            out.bound_events += 1;
        }
        state = next;
        if k % sample_every == 0 || k == n_steps {
            sample(&state, &mut out, observers);
        }
    }
    out.steps = n_steps;
    out.state = state;
    Ok(out)
}
