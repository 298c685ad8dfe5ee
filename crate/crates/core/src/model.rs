//! Parameters, grid and state shared by the solver, diagnostics and steady-state analysis.
//!
//! The simulated system on the unit interval is
//!
//! ```text
//! ∂t ρ   = ∂x( (1-ρ) ρ^(m-1) ∂x ρ  -  χ ρ (1-ρ) ∂x c )
//! τ ∂t c = η ∂xx c - c + ρ
//! ```
//!
//! with no-flux boundaries for both unknowns.

use crate::error::{Error, Result};

/// Allowed overshoot of [0, 1] before a value counts as out of bounds.
pub const DEFAULT_BOUND_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Degeneracy exponent.
    pub m: f64,
    /// Chemotactic sensitivity.
    pub chi: f64,
    /// Relaxation time of the chemical. `0` selects the parabolic-elliptic system.
    pub tau: f64,
    /// Chemical diffusion rate. `0` selects the pointwise chemical ODE.
    pub eta: f64,
}

impl ModelParams {
    pub fn new(m: f64, chi: f64, tau: f64, eta: f64) -> Result<Self> {
        let p = Self { m, chi, tau, eta };
        p.validate()?;
        Ok(p)
    }

    /// Degenerate exponent 2, unit relaxation time and chemical diffusion.
    pub fn preset(chi: f64) -> Self {
        Self {
            m: 2.0,
            chi,
            tau: 1.0,
            eta: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m.is_finite() && self.m >= 1.0) {
            return Err(Error::Domain {
                what: "m",
                value: self.m,
            });
        }
        if !(self.chi.is_finite() && self.chi > 0.0) {
            return Err(Error::Domain {
                what: "chi",
                value: self.chi,
            });
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(Error::Domain {
                what: "tau",
                value: self.tau,
            });
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(Error::Domain {
                what: "eta",
                value: self.eta,
            });
        }
        if self.tau == 0.0 && self.eta == 0.0 {
            return Err(Error::InvalidParams(
                "tau = 0 and eta = 0 together are not a supported limit".into(),
            ));
        }
        Ok(())
    }
}

/// Uniform partition of (0, 1) into `n_cells` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub n_cells: usize,
    pub dx: f64,
}

impl Grid {
    pub fn new(n_cells: usize) -> Result<Self> {
        if n_cells == 0 {
            return Err(Error::InvalidParams("grid needs at least one cell".into()));
        }
        Ok(Self {
            n_cells,
            dx: 1.0 / n_cells as f64,
        })
    }

    /// x_i = (i - 1/2) dx for i = 1..N.
    pub fn cell_centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.center(i)).collect()
    }

    #[inline]
    pub fn center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.dx
    }
}

/// Cell averages of density and chemical at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellState {
    pub rho: Vec<f64>,
    pub c: Vec<f64>,
    pub t: f64,
}

impl CellState {
    pub fn new(rho: Vec<f64>, c: Vec<f64>, t: f64) -> Result<Self> {
        if rho.len() != c.len() {
            return Err(Error::LengthMismatch {
                expected: rho.len(),
                got: c.len(),
            });
        }
        Ok(Self { rho, c, t })
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Self {
            rho: vec![value; grid.n_cells],
            c: vec![value; grid.n_cells],
            t: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        for v in [&self.rho, &self.c] {
            if v.len() != grid.n_cells {
                return Err(Error::LengthMismatch {
                    expected: grid.n_cells,
                    got: v.len(),
                });
            }
        }
        Ok(())
    }

    /// Largest overshoot of [0, 1] over both fields, `0` when inside.
    pub fn bound_violation(&self) -> f64 {
        bound_violation(&self.rho).max(bound_violation(&self.c))
    }
}

pub fn bound_violation(v: &[f64]) -> f64 {
    v.iter()
        .map(|&x| {
            if x.is_nan() {
                f64::INFINITY
            } else {
                (-x).max(x - 1.0).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CUpdateMode {
    /// Forward Euler in the chemical equation (the reference discretization).
    Explicit,
    /// Backward Euler with a tridiagonal solve.
    Implicit,
}

impl std::str::FromStr for CUpdateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "explicit" => Ok(Self::Explicit),
            "implicit" => Ok(Self::Implicit),
            other => Err(Error::Config(format!("unknown c_update_mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for CUpdateMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Explicit => "explicit",
            Self::Implicit => "implicit",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub dt: f64,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub c_update_mode: CUpdateMode,
    pub bound_tolerance: f64,
    /// How many times a step may be split in half after a failed Newton solve.
    pub max_halvings: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            newton_tol: 1e-12,
            newton_max_iter: 50,
            c_update_mode: CUpdateMode::Implicit,
            bound_tolerance: DEFAULT_BOUND_TOLERANCE,
            max_halvings: 10,
        }
    }
}

impl SolverConfig {
    /// Explicit chemical update with dt = 1e-6, to be paired with N = 100 cells.
    pub fn reference_discretization() -> Self {
        Self {
            dt: 1e-6,
            c_update_mode: CUpdateMode::Explicit,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Domain {
                what: "dt",
                value: self.dt,
            });
        }
        if !(self.newton_tol.is_finite() && self.newton_tol > 0.0) {
            return Err(Error::Domain {
                what: "newton_tol",
                value: self.newton_tol,
            });
        }
        if self.newton_max_iter == 0 {
            return Err(Error::InvalidParams("newton_max_iter must be at least 1".into()));
        }
        if !(self.bound_tolerance >= 0.0) {
            return Err(Error::Domain {
                what: "bound_tolerance",
                value: self.bound_tolerance,
            });
        }
        Ok(())
    }
}

/// `rho^(m-1)` with the convention `0^0 = 1` for `m = 1`; negative inputs
/// (transient Newton iterates) are evaluated at zero.
#[inline]
pub(crate) fn pow_m1(rho: f64, m: f64) -> f64 {
    if m == 1.0 {
        1.0
    } else if m == 2.0 {
        rho.max(0.0)
    } else {
        rho.max(0.0).powf(m - 1.0)
    }
}

/// Derivative of `rho^(m-1)`. For 1 < m < 2 it blows up at zero, so the
/// argument is floored at 1e-14.
#[inline]
pub(crate) fn pow_m1_derivative(rho: f64, m: f64) -> f64 {
    if m == 1.0 {
        0.0
    } else if m == 2.0 {
        1.0
    } else {
        (m - 1.0) * rho.max(1e-14).powf(m - 2.0)
    }
}

fn check_unit(what: &'static str, rho: f64) -> Result<()> {
    if !(-DEFAULT_BOUND_TOLERANCE..=1.0 + DEFAULT_BOUND_TOLERANCE).contains(&rho) {
        return Err(Error::Domain { what, value: rho });
    }
    Ok(())
}

/// Nonlinear diffusion coefficient `(1 - ρ) ρ^(m-1)`.
pub fn diffusion_coefficient(rho: f64, m: f64) -> Result<f64> {
    check_unit("rho", rho)?;
    if !(m >= 1.0) {
        return Err(Error::Domain { what: "m", value: m });
    }
    Ok(((1.0 - rho) * pow_m1(rho, m)).max(0.0))
}

/// Gradient-flow mobility `ρ (1 - ρ)`.
pub fn mobility(rho: f64) -> Result<f64> {
    check_unit("rho", rho)?;
    Ok((rho * (1.0 - rho)).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn coefficient_values() {
        assert_eq!(diffusion_coefficient(0.0, 2.0).unwrap(), 0.0);
        assert_eq!(diffusion_coefficient(1.0, 2.0).unwrap(), 0.0);
        assert!((diffusion_coefficient(0.5, 3.0).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(mobility(0.0).unwrap(), 0.0);
        assert_eq!(mobility(1.0).unwrap(), 0.0);
        assert_eq!(mobility(0.5).unwrap(), 0.25);
    }

    #[test]
    fn m_equal_one_at_zero_density() {
        // (1 - 0) * 0^0 with 0^0 := 1
        assert_eq!(diffusion_coefficient(0.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn out_of_range_density_is_rejected() {
        assert!(matches!(diffusion_coefficient(1.1, 2.0), Err(Error::Domain { .. })));
        assert!(matches!(mobility(-0.01), Err(Error::Domain { .. })));
        // within the bound tolerance is accepted
        assert!(mobility(1.0 + 1e-12).is_ok());
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(2.0, 1.0, 1.0, 1.0).is_ok());
        assert!(ModelParams::new(2.0, 1.0, 0.0, 1.0).is_ok());
        assert!(ModelParams::new(2.0, 1.0, 1.0, 0.0).is_ok());
        assert!(ModelParams::new(2.0, 1.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(0.5, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(2.0, 0.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(2.0, 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn grid_geometry() {
        let g = Grid::new(100).unwrap();
        assert!((g.dx * g.n_cells as f64 - 1.0).abs() < 1e-15);
        let x = g.cell_centers();
        assert!((x[0] - 0.005).abs() < 1e-15);
        assert!((x[99] - 0.995).abs() < 1e-15);
        assert!(Grid::new(0).is_err());
    }

    #[test]
    fn bound_violation_reports_overshoot() {
        let s = CellState::new(vec![0.5, 1.25, -0.5], vec![0.0, 0.5, 1.0], 0.0).unwrap();
        assert_eq!(s.bound_violation(), 0.5);
        assert!(CellState::new(vec![0.5], vec![], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn diffusion_is_mobility_times_power(rho in 1e-6f64..=1.0, m in 2.0f64..6.0) {
            let lhs = diffusion_coefficient(rho, m).unwrap();
            let rhs = mobility(rho).unwrap() * rho.powf(m - 2.0);
            prop_assert!((lhs - rhs).abs() <= 1e-15 * lhs.abs().max(1e-300) + 1e-300);
        }

        #[test]
        fn coefficients_nonnegative(rho in 0.0f64..=1.0, m in 1.0f64..6.0) {
            prop_assert!(diffusion_coefficient(rho, m).unwrap() >= 0.0);
            prop_assert!(mobility(rho).unwrap() >= 0.0);
        }
    }
}
