//! Discrete versions of the energy, relative entropies and decay fits.
//!
//! All integrals are midpoint sums `dx * Σ_i (...)`. Gradients of `c` use
//! forward differences with a zero last entry, matching the no-flux boundary.

use crate::error::{Error, Result};
use crate::model::{CellState, Grid, ModelParams};

/// Values below this are treated as floating-point floor noise by [`fit_decay`].
pub const DECAY_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass_rho: f64,
    pub mass_c: f64,
    pub energy: f64,
    /// Relative entropy against the constant state `(M, M)`; NaN when `M ∉ (0, 1)`.
    pub rel_entropy_h1: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub c_min: f64,
    pub c_max: f64,
    pub l2_dist_const: f64,
}

impl DiagnosticsRecord {
    /// Snapshot diagnostics, measured against the constant state of mass `mass`.
    pub fn compute(state: &CellState, params: &ModelParams, grid: &Grid, mass: f64) -> Self {
        let (rho_min, rho_max) = min_max(&state.rho);
        let (c_min, c_max) = min_max(&state.c);
        Self {
            t: state.t,
            mass_rho: total_mass(&state.rho, grid),
            mass_c: total_mass(&state.c, grid),
            energy: energy(state, params, grid),
            rel_entropy_h1: relative_entropy_h1(state, mass, params, grid).unwrap_or(f64::NAN),
            rho_min,
            rho_max,
            c_min,
            c_max,
            l2_dist_const: l2_distance_to_constant(&state.rho, mass, grid),
        }
    }
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    })
}

/// `dx Σ ρ_i`.
pub fn total_mass(rho: &[f64], grid: &Grid) -> f64 {
    grid.dx * rho.iter().sum::<f64>()
}

/// Discrete `‖ρ - M‖_{L²}`.
pub fn l2_distance_to_constant(rho: &[f64], mass: f64, grid: &Grid) -> f64 {
    (grid.dx * rho.iter().map(|&r| (r - mass) * (r - mass)).sum::<f64>()).sqrt()
}

/// Forward-difference `|∂x c|²` per cell, last entry zero.
fn gradient_squared<'a>(c: &'a [f64], grid: &Grid) -> impl Iterator<Item = f64> + 'a {
    let n = c.len();
    let dx = grid.dx;
    (0..n).map(move |i| {
        if i + 1 < n {
            let g = (c[i + 1] - c[i]) / dx;
            g * g
        } else {
            0.0
        }
    })
}

/// `s log s` with `0 log 0 = 0`.
#[inline]
fn xlogx(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        s * s.ln()
    }
}

/// Gradient-flow energy
/// `dx Σ [ρ^m/(m(m-1)) + (χ/2)(η |∇c|² + c²) - χ ρ c]`,
/// with `ρ(log ρ - 1)` in place of the power term when `m = 1`.
pub fn energy(state: &CellState, params: &ModelParams, grid: &Grid) -> f64 {
    let m = params.m;
    let chi = params.chi;
    let sum: f64 = state
        .rho
        .iter()
        .zip(&state.c)
        .zip(gradient_squared(&state.c, grid))
        .map(|((&r, &c), g)| {
            let internal = if m == 1.0 {
                xlogx(r) - r
            } else {
                r.max(0.0).powf(m) / (m * (m - 1.0))
            };
            internal + 0.5 * chi * (params.eta * g + c * c) - chi * r * c
        })
        .sum();
    grid.dx * sum
}

/// Binary-entropy Bregman divergence
/// `ρ log(ρ/ρ̄) + (1-ρ) log((1-ρ)/(1-ρ̄))` for `ρ̄ ∈ (0, 1)`.
#[inline]
pub fn bregman(rho: f64, reference: f64) -> f64 {
    let d = rho - reference;
    let first = if rho <= 0.0 { 0.0 } else { rho * (d / reference).ln_1p() };
    let second = if rho >= 1.0 {
        0.0
    } else {
        (1.0 - rho) * (-d / (1.0 - reference)).ln_1p()
    };
    first + second
}

/// Relative entropy against `(M, M)` including `(τ/2)|∇c|²`.
pub fn relative_entropy_h1(state: &CellState, mass: f64, params: &ModelParams, grid: &Grid) -> Result<f64> {
    if !(mass > 0.0 && mass < 1.0) {
        return Err(Error::Domain { what: "M", value: mass });
    }
    let sum: f64 = state
        .rho
        .iter()
        .zip(gradient_squared(&state.c, grid))
        .map(|(&r, g)| bregman(r, mass) + 0.5 * params.tau * g)
        .sum();
    Ok(grid.dx * sum)
}

/// Relative entropy between two states with weight `lambda / 2` on `(c - c̄)²`.
pub fn relative_entropy_pair(state: &CellState, reference: &CellState, lambda: f64, grid: &Grid) -> Result<f64> {
    if state.len() != reference.len() {
        return Err(Error::LengthMismatch {
            expected: reference.len(),
            got: state.len(),
        });
    }
    if let Some(&bad) = reference.rho.iter().find(|&&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::Domain {
            what: "reference rho",
            value: bad,
        });
    }
    let sum: f64 = state
        .rho
        .iter()
        .zip(&reference.rho)
        .zip(state.c.iter().zip(&reference.c))
        .map(|((&r, &rb), (&c, &cb))| bregman(r, rb) + 0.5 * lambda * (c - cb) * (c - cb))
        .sum();
    Ok(grid.dx * sum)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    /// Fitted rate in `value ≈ C e^{-mu t}`.
    pub mu: f64,
    pub r_squared: f64,
    /// Time range of the points actually used.
    pub window: (f64, f64),
    pub points: usize,
}

/// Least-squares line through `(t, log value)` for points inside `window`
/// whose value exceeds [`DECAY_FLOOR`].
/// Drops the trailing samples that repeat the final value to a relative
/// `1e-9`, the plateau left once a decaying run stalls at round-off.
pub fn trim_stagnation(series: &[(f64, f64)]) -> &[(f64, f64)] {
    let Some(&(_, last)) = series.last() else {
        return series;
    };
    let flat = |v: f64| (v - last).abs() <= 1e-9 * last.abs();
    let keep = series.iter().rposition(|&(_, v)| !flat(v)).map_or(1, |k| k + 2);
    &series[..keep.min(series.len())]
}

pub fn fit_decay(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, v)| *t >= window.0 && *t <= window.1 && *v > DECAY_FLOOR && v.is_finite())
        .map(|&(t, v)| (t, v.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData { points: pts.len() });
    }
    let n = pts.len() as f64;
    let t_mean = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let y_mean = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for &(t, y) in &pts {
        stt += (t - t_mean) * (t - t_mean);
        sty += (t - t_mean) * (y - y_mean);
        syy += (y - y_mean) * (y - y_mean);
    }
    let slope = if stt > 0.0 { sty / stt } else { 0.0 };
    let intercept = y_mean - slope * t_mean;
    let ss_res: f64 = pts.iter().map(|&(t, y)| (y - intercept - slope * t).powi(2)).sum();
    // Zero spread in log space leaves r² undefined; report 0.
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(DecayFit {
        mu: -slope,
        r_squared,
        window: (pts[0].0, pts[pts.len() - 1].0),
        points: pts.len(),
    })
}
