//! Stationary states: the constant state, its uniqueness regime, and
//! increasing patterns for `m > 2` built from the first integral
//!
//! ```text
//! (c')² = G_λ(c) - μ,   G_λ(c) = c² - 2 ∫_{-λ}^{c} φ⁻¹(χ(z + λ)) dz,   φ(ρ) = ρ^(m-1)/(m-1)
//! ```
//!
//! An increasing profile runs from `c₋` to `c₊` (consecutive roots of
//! `G_λ = μ` around the local maximum `c̃`) over the length
//! `X(λ, μ) = ∫ dc / sqrt(G_λ(c) - μ)`; a steady state on (0, 1) needs `X = 1`.
//!
//! Both the length and the mass integrals are evaluated after the
//! substitution `c = c₋ + (c₊ - c₋) sin²(θ/2)`, which turns the inverse
//! square-root endpoint singularities into the Chebyshev weight. With
//! `A(c) = (G_λ(c) - μ) / ((c₊ - c)(c - c₋))` the integrand is `A^{-1/2}`,
//! smooth in θ.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::Grid;
use crate::quadrature::{adaptive_gauss_kronrod, chebyshev_adaptive};

/// Convergence threshold between successive node doublings.
const QUADRATURE_TOL: f64 = 1e-8;
const QUADRATURE_N0: usize = 32;
const QUADRATURE_NMAX: usize = 1 << 21;

/// `ρ^(m-1) / (m-1)`.
pub fn phi(rho: f64, m: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Domain {
            what: "rho",
            value: rho,
        });
    }
    if !(m > 1.0) {
        return Err(Error::Domain { what: "m", value: m });
    }
    Ok(rho.powf(m - 1.0) / (m - 1.0))
}

/// `((m-1) y)^(1/(m-1))`; nonpositive arguments map to zero density.
pub fn phi_inv(y: f64, m: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else {
        ((m - 1.0) * y).powf(1.0 / (m - 1.0))
    }
}

/// The unknowns of the reduced steady problem. `τ = η = 1` throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyProblem {
    pub m: f64,
    pub chi: f64,
    /// Integration constant in `φ(ρ) = χ(c + λ)`.
    pub lambda: f64,
    /// Level of the first integral.
    pub mu: f64,
}

impl SteadyProblem {
    pub fn new(m: f64, chi: f64, lambda: f64, mu: f64) -> Result<Self> {
        if !(m > 1.0 && m.is_finite()) {
            return Err(Error::Domain { what: "m", value: m });
        }
        if !(chi > 0.0 && chi.is_finite()) {
            return Err(Error::Domain {
                what: "chi",
                value: chi,
            });
        }
        if !lambda.is_finite() {
            return Err(Error::Domain {
                what: "lambda",
                value: lambda,
            });
        }
        Ok(Self { m, chi, lambda, mu })
    }

    pub fn with_mu(&self, mu: f64) -> Self {
        Self { mu, ..*self }
    }

    fn potential(&self) -> Potential {
        Potential::new(self.m, self.chi, self.lambda)
    }
}

/// Closed form `G_λ(c) = c² - K (c + λ)^p`, `p = m/(m-1)`,
/// `K = (2(m-1)/m) ((m-1)χ)^(1/(m-1))`.
#[derive(Debug, Clone, Copy)]
struct Potential {
    m: f64,
    chi: f64,
    lambda: f64,
    k: f64,
    p: f64,
}

impl Potential {
    fn new(m: f64, chi: f64, lambda: f64) -> Self {
        let k = 2.0 * (m - 1.0) / m * ((m - 1.0) * chi).powf(1.0 / (m - 1.0));
        Self {
            m,
            chi,
            lambda,
            k,
            p: m / (m - 1.0),
        }
    }

    #[inline]
    fn value(&self, c: f64) -> f64 {
        c * c - self.k * (c + self.lambda).max(0.0).powf(self.p)
    }

    #[inline]
    fn density(&self, c: f64) -> f64 {
        phi_inv(self.chi * (c + self.lambda), self.m)
    }

    #[inline]
    fn derivative(&self, c: f64) -> f64 {
        2.0 * (c - self.density(c))
    }

    /// `2 (1 - χ ρ^(2-m))` with `ρ = φ⁻¹(χ(c + λ))`.
    #[inline]
    fn second_derivative(&self, c: f64) -> f64 {
        let rho = self.density(c);
        2.0 * (1.0 - self.chi * rho.powf(2.0 - self.m))
    }

    /// `G(e + s) - G(e)` without cancelling the two large values.
    #[inline]
    fn increment(&self, e: f64, s: f64) -> f64 {
        let u = (e + self.lambda).max(0.0);
        let power_diff = if u > 0.0 {
            u.powf(self.p) * (self.p * (s / u).ln_1p()).exp_m1()
        } else {
            s.max(0.0).powf(self.p)
        };
        s * (2.0 * e + s) - self.k * power_diff
    }
}

pub fn g_lambda(c: f64, problem: &SteadyProblem) -> Result<f64> {
    if c < -problem.lambda || c.is_nan() {
        return Err(Error::Domain { what: "c", value: c });
    }
    Ok(problem.potential().value(c))
}

pub fn g_lambda_prime(c: f64, problem: &SteadyProblem) -> Result<f64> {
    if c < -problem.lambda || c.is_nan() {
        return Err(Error::Domain { what: "c", value: c });
    }
    Ok(problem.potential().derivative(c))
}

pub fn g_lambda_second(c: f64, problem: &SteadyProblem) -> Result<f64> {
    if c < -problem.lambda || c.is_nan() {
        return Err(Error::Domain { what: "c", value: c });
    }
    Ok(problem.potential().second_derivative(c))
}

/// Evaluates `G_λ(c)` from its defining integral by adaptive quadrature.
/// Used to cross-check the closed form.
pub fn g_lambda_quadrature(c: f64, problem: &SteadyProblem) -> Result<f64> {
    if c < -problem.lambda || c.is_nan() {
        return Err(Error::Domain { what: "c", value: c });
    }
    let (m, chi, lambda) = (problem.m, problem.chi, problem.lambda);
    let integral = adaptive_gauss_kronrod(|z| phi_inv(chi * (z + lambda), m), -lambda, c, 1e-14);
    Ok(c * c - 2.0 * integral)
}

/// Critical points of `G_λ` and the values there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialLandmarks {
    /// Local maximum.
    pub c_tilde: f64,
    /// Local minimum.
    pub c_tilde_plus: f64,
    pub g_at_tilde: f64,
    pub g_at_tilde_plus: f64,
    pub g_second_at_tilde: f64,
    pub g_second_at_tilde_plus: f64,
    /// `G_λ(-λ) = λ²`.
    pub g_at_minus_lambda: f64,
}

impl PotentialLandmarks {
    /// Admissible `μ` range `(max(G(-λ), G(c̃₊)), G(c̃))`.
    pub fn mu_window(&self) -> (f64, f64) {
        (self.g_at_minus_lambda.max(self.g_at_tilde_plus), self.g_at_tilde)
    }

    /// Limit of `X(λ, μ)` as `μ → G(c̃)`: `sqrt(2) π / sqrt(-G''(c̃))`.
    pub fn time_map_limit(&self) -> f64 {
        2.0f64.sqrt() * PI / (-self.g_second_at_tilde).sqrt()
    }

    /// True when the lower end of the window is the local minimum, where `X` diverges.
    pub fn diverges_at_window_bottom(&self) -> bool {
        self.g_at_tilde_plus >= self.g_at_minus_lambda
    }
}

/// Bisection to full double precision on a bracket with `f(lo) < 0 < f(hi)`
/// or the reverse.
fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (f_lo < 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `(λ_b, 0)` with `λ_b = -((m-2)/(m-1)) χ^(1/(m-2))`, where `G_λ` has two
/// critical points in (0, 1).
pub fn admissible_lambda_window(m: f64, chi: f64) -> (f64, f64) {
    (-(m - 2.0) / (m - 1.0) * chi.powf(1.0 / (m - 2.0)), 0.0)
}

/// The narrower λ range used in the existence proof:
/// `(λ_b, (1/((π²+1)(m-1)) - 1) (χ/(π²+1))^(1/(m-2)))`.
pub fn existence_lambda_window(m: f64, chi: f64) -> (f64, f64) {
    let q = PI * PI + 1.0;
    let upper = (1.0 / (q * (m - 1.0)) - 1.0) * (chi / q).powf(1.0 / (m - 2.0));
    (admissible_lambda_window(m, chi).0, upper)
}

/// Whether `(m-2)/(m-1) > (1 - 1/((π²+1)(m-1))) (π²+1)^(-1/(m-2))`, i.e. the
/// λ range of [`existence_lambda_window`] is nonempty.
pub fn existence_window_well_posed(m: f64) -> bool {
    let q = PI * PI + 1.0;
    let lhs = (m - 2.0) / (m - 1.0);
    let rhs = (1.0 - 1.0 / (q * (m - 1.0))) * q.powf(-1.0 / (m - 2.0));
    lhs > rhs
}

/// Roots `c̃ < χ^(1/(m-2)) < c̃₊` of `φ(c) = χ(c + λ)`.
pub fn critical_points(m: f64, chi: f64, lambda: f64) -> Result<PotentialLandmarks> {
    if !(m > 2.0) {
        return Err(Error::InvalidParams(format!("pattern analysis needs m > 2, got {m}")));
    }
    if !(chi > 0.0) {
        return Err(Error::Domain {
            what: "chi",
            value: chi,
        });
    }
    let h = |c: f64| c.powf(m - 1.0) / (m - 1.0) - chi * (c + lambda);
    let tangent = chi.powf(1.0 / (m - 2.0));
    if !(lambda < 0.0) {
        return Err(Error::NoBracket(format!(
            "lambda = {lambda} >= 0: smaller root is not interior"
        )));
    }
    if !(h(tangent) < 0.0) {
        return Err(Error::NoBracket(format!(
            "lambda = {lambda} at or below the tangency value"
        )));
    }
    if tangent >= 1.0 || !(h(1.0) > 0.0) {
        return Err(Error::NoBracket(format!(
            "lambda = {lambda}: larger root is not below 1"
        )));
    }
    let c_tilde = bisect(h, 0.0, tangent);
    let c_tilde_plus = bisect(h, tangent, 1.0);
    let pot = Potential::new(m, chi, lambda);
    Ok(PotentialLandmarks {
        c_tilde,
        c_tilde_plus,
        g_at_tilde: pot.value(c_tilde),
        g_at_tilde_plus: pot.value(c_tilde_plus),
        // at a root ρ = c, so G'' = 2(1 - χ / φ'(c))
        g_second_at_tilde: 2.0 * (1.0 - chi / c_tilde.powf(m - 2.0)),
        g_second_at_tilde_plus: 2.0 * (1.0 - chi / c_tilde_plus.powf(m - 2.0)),
        g_at_minus_lambda: lambda * lambda,
    })
}

/// Roots `c₋ ∈ (-λ, c̃)` and `c₊ ∈ (c̃, c̃₊)` of `G_λ = μ`.
pub fn boundary_values(problem: &SteadyProblem, landmarks: &PotentialLandmarks) -> Result<(f64, f64)> {
    let (lo, hi) = landmarks.mu_window();
    let mu = problem.mu;
    if !(mu > lo && mu < hi) {
        return Err(Error::EmptyWindow { mu, lo, hi });
    }
    Ok(roots_at_level(&problem.potential(), landmarks, mu))
}

fn roots_at_level(pot: &Potential, landmarks: &PotentialLandmarks, mu: f64) -> (f64, f64) {
    let f = |c: f64| pot.value(c) - mu;
    let c_minus = if mu <= landmarks.g_at_minus_lambda {
        -pot.lambda
    } else {
        bisect(f, -pot.lambda, landmarks.c_tilde)
    };
    let c_plus = bisect(f, landmarks.c_tilde, landmarks.c_tilde_plus);
    (c_minus, c_plus)
}

/// The orbit between two turning points, parametrized by θ ∈ [0, π].
struct Chord {
    pot: Potential,
    c_minus: f64,
    c_plus: f64,
    width: f64,
}

impl Chord {
    fn new(pot: Potential, c_minus: f64, c_plus: f64) -> Self {
        Self {
            pot,
            c_minus,
            c_plus,
            width: c_plus - c_minus,
        }
    }

    #[inline]
    fn c_at(&self, theta: f64) -> f64 {
        let s = (0.5 * theta).sin();
        self.c_minus + self.width * s * s
    }

    /// `A(c(θ))^{-1/2}`, the smooth integrand of the length integral in θ.
    ///
    /// `G(c) - μ` is formed as an increment from the nearer endpoint, and
    /// `(c₊ - c)(c - c₋) = w² sin²θ / 4` is exact in θ, so nodes next to the
    /// endpoints keep full relative precision.
    #[inline]
    fn weight(&self, theta: f64) -> f64 {
        let (sh, ch) = (0.5 * theta).sin_cos();
        let rise = if theta <= 0.5 * PI {
            self.pot.increment(self.c_minus, self.width * sh * sh)
        } else {
            self.pot.increment(self.c_plus, -self.width * ch * ch)
        };
        let prod = self.width * self.width * sh * sh * ch * ch;
        let a = rise / prod;
        if a > 0.0 {
            1.0 / a.sqrt()
        } else {
            f64::INFINITY
        }
    }

    fn length(&self) -> (f64, usize) {
        chebyshev_adaptive(|t| self.weight(t), QUADRATURE_N0, QUADRATURE_TOL, QUADRATURE_NMAX)
    }

    fn mass(&self) -> f64 {
        chebyshev_adaptive(
            |t| self.weight(t) * self.pot.density(self.c_at(t)),
            QUADRATURE_N0,
            QUADRATURE_TOL,
            QUADRATURE_NMAX,
        )
        .0
    }
}

fn chord(problem: &SteadyProblem, landmarks: &PotentialLandmarks) -> Result<Chord> {
    let (c_minus, c_plus) = boundary_values(problem, landmarks)?;
    Ok(Chord::new(problem.potential(), c_minus, c_plus))
}

/// Length `X(λ, μ)` of the increasing orbit from `c₋` to `c₊`.
pub fn time_map(problem: &SteadyProblem, landmarks: &PotentialLandmarks) -> Result<f64> {
    Ok(chord(problem, landmarks)?.length().0)
}

/// Mass `∫ φ⁻¹(χ(c + λ)) / sqrt(G_λ(c) - μ) dc` carried by the orbit.
pub fn mass_map(problem: &SteadyProblem, landmarks: &PotentialLandmarks) -> Result<f64> {
    Ok(chord(problem, landmarks)?.mass())
}

/// Position along the orbit as a cosine series in θ:
/// `x(θ) = a₀ θ + Σ_k a_k sin(kθ)/k`, exact for the midpoint samples.
struct InverseMap {
    coeffs: Vec<f64>,
    length: f64,
}

impl InverseMap {
    fn new(ch: &Chord) -> Self {
        let (length, n) = ch.length();
        // enough nodes that the last doubling changed the result by < tol
        let n = n.clamp(64, 1 << 13);
        let h = PI / n as f64;
        let samples: Vec<f64> = (0..n).map(|j| ch.weight((j as f64 + 0.5) * h)).collect();
        let mut coeffs = Vec::with_capacity(n);
        for k in 0..n {
            let s: f64 = samples
                .iter()
                .enumerate()
                .map(|(j, g)| g * (k as f64 * (j as f64 + 0.5) * h).cos())
                .sum();
            coeffs.push(if k == 0 { s / n as f64 } else { 2.0 * s / n as f64 });
        }
        let tail = coeffs
            .iter()
            .rposition(|a| a.abs() > 1e-17 * coeffs[0].abs())
            .unwrap_or(0);
        coeffs.truncate(tail + 1);
        Self { coeffs, length }
    }

    fn x(&self, theta: f64) -> f64 {
        let (s1, c1) = theta.sin_cos();
        let (mut s_prev, mut s_cur) = (0.0, s1);
        let mut acc = self.coeffs[0] * theta;
        for (k, a) in self.coeffs.iter().enumerate().skip(1) {
            acc += a * s_cur / k as f64;
            let s_next = 2.0 * c1 * s_cur - s_prev;
            s_prev = s_cur;
            s_cur = s_next;
        }
        acc
    }

    /// θ with `x(θ) = target`, by safeguarded Newton.
    fn theta_at(&self, ch: &Chord, target: f64) -> f64 {
        if target <= 0.0 {
            return 0.0;
        }
        if target >= self.length {
            return PI;
        }
        let (mut lo, mut hi) = (0.0, PI);
        let mut theta = PI * target / self.length;
        for _ in 0..100 {
            let f = self.x(theta) - target;
            if f < 0.0 {
                lo = theta;
            } else {
                hi = theta;
            }
            let slope = ch.weight(theta);
            let mut next = theta - f / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - theta).abs() <= 1e-16 * PI {
                return next;
            }
            theta = next;
        }
        theta
    }
}

/// A reconstructed increasing steady state.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyProfile {
    pub x: Vec<f64>,
    pub c_values: Vec<f64>,
    pub rho_values: Vec<f64>,
    pub lambda_star: f64,
    pub mu_star: f64,
    /// `∫ ρ dx`.
    pub mass: f64,
    pub c_minus: f64,
    pub c_plus: f64,
    /// `X(λ*, μ*)`, equal to one for a steady state on (0, 1).
    pub time_map: f64,
}

/// Samples `c` at the given positions in `[0, 1]`, rescaling the orbit to
/// unit length.
fn sample_orbit(ch: &Chord, map: &InverseMap, xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| ch.c_at(map.theta_at(ch, x * map.length))).collect()
}

/// Inverts `x(c) = ∫_{c₋}^{c} dz / sqrt(G_λ(z) - μ)` at the cell centers.
pub fn reconstruct_profile(
    problem: &SteadyProblem,
    landmarks: &PotentialLandmarks,
    grid: &Grid,
) -> Result<SteadyProfile> {
    let ch = chord(problem, landmarks)?;
    let map = InverseMap::new(&ch);
    let x = grid.cell_centers();
    let c_values = sample_orbit(&ch, &map, &x);
    let rho_values = c_values.iter().map(|&c| ch.pot.density(c)).collect();
    Ok(SteadyProfile {
        x,
        c_values,
        rho_values,
        lambda_star: problem.lambda,
        mu_star: problem.mu,
        mass: ch.mass(),
        c_minus: ch.c_minus,
        c_plus: ch.c_plus,
        time_map: map.length,
    })
}

/// Max-norm of `-c'' + c - φ⁻¹(χ(c + λ))` from centered second differences
/// of the orbit sampled at `n_fine + 1` equispaced points of [0, 1].
pub fn ode_residual(problem: &SteadyProblem, landmarks: &PotentialLandmarks, n_fine: usize) -> Result<f64> {
    let ch = chord(problem, landmarks)?;
    let map = InverseMap::new(&ch);
    let h = 1.0 / n_fine as f64;
    let xs: Vec<f64> = (0..=n_fine).map(|j| j as f64 * h).collect();
    let c = sample_orbit(&ch, &map, &xs);
    // the orbit was rescaled to unit length; undo that in the derivative
    let scale = map.length * map.length;
    Ok((1..n_fine)
        .map(|j| {
            let c2 = (c[j + 1] - 2.0 * c[j] + c[j - 1]) / (h * h) / scale;
            (-c2 + c[j] - ch.pot.density(c[j])).abs()
        })
        .fold(0.0, f64::max))
}

/// Knobs of the (λ, μ) search.
#[derive(Debug, Clone, Copy)]
pub struct PatternSearch {
    pub lambda_samples: usize,
    /// Levels of local λ refinement around sign changes of `X - 1` at the window ends.
    pub refine_depth: u32,
}

impl Default for PatternSearch {
    fn default() -> Self {
        Self {
            lambda_samples: 200,
            refine_depth: 3,
        }
    }
}

struct LambdaProbe {
    lambda: f64,
    landmarks: PotentialLandmarks,
    x_top: f64,
    x_bottom: f64,
}

fn probe_lambda(m: f64, chi: f64, lambda: f64) -> Option<LambdaProbe> {
    let landmarks = critical_points(m, chi, lambda).ok()?;
    let (lo, hi) = landmarks.mu_window();
    if !(lo < hi) {
        return None;
    }
    let x_bottom = if landmarks.diverges_at_window_bottom() {
        f64::INFINITY
    } else {
        // bottom at G(-λ): the orbit starts at c₋ = -λ, where ρ = 0
        let pot = Potential::new(m, chi, lambda);
        let (cm, cp) = roots_at_level(&pot, &landmarks, lo);
        Chord::new(pot, cm, cp).length().0
    };
    Some(LambdaProbe {
        lambda,
        landmarks,
        x_top: landmarks.time_map_limit(),
        x_bottom,
    })
}

/// Solves `X(λ, μ) = 1` in μ, given opposite signs of `X - 1` at the window ends.
fn solve_mu(m: f64, chi: f64, probe: &LambdaProbe) -> Option<f64> {
    if !((probe.x_top - 1.0) * (probe.x_bottom - 1.0) < 0.0) {
        return None;
    }
    let pot = Potential::new(m, chi, probe.lambda);
    let (lo, hi) = probe.landmarks.mu_window();
    let x_of = |mu: f64| {
        let (cm, cp) = roots_at_level(&pot, &probe.landmarks, mu);
        Chord::new(pot, cm, cp).length().0
    };
    let top_above = probe.x_top > 1.0;
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let x = x_of(mid);
        if (x - 1.0).abs() < 1e-12 {
            return Some(mid);
        }
        if (x > 1.0) == top_above {
            b = mid;
        } else {
            a = mid;
        }
    }
    Some(0.5 * (a + b))
}

fn scan(m: f64, chi: f64, from: f64, to: f64, samples: usize, depth: u32) -> Option<(f64, f64)> {
    let probes: Vec<Option<LambdaProbe>> = (1..=samples)
        .map(|j| from + (to - from) * j as f64 / (samples + 1) as f64)
        .map(|lam| probe_lambda(m, chi, lam))
        .collect();
    for p in probes.iter().flatten() {
        if let Some(mu) = solve_mu(m, chi, p) {
            return Some((p.lambda, mu));
        }
    }
    if depth == 0 {
        return None;
    }
    for w in probes.windows(2) {
        if let [Some(a), Some(b)] = w {
            let crosses = |x: f64, y: f64| (x - 1.0) * (y - 1.0) <= 0.0;
            if crosses(a.x_top, b.x_top) || crosses(a.x_bottom, b.x_bottom) {
                if let Some(found) = scan(m, chi, a.lambda, b.lambda, samples, depth - 1) {
                    return Some(found);
                }
            }
        }
    }
    None
}

/// Searches `(λ*, μ*)` with `X(λ*, μ*) = 1` for `m > 2`, `0 < χ < 1/(m-1)` and
/// returns the increasing profile on `grid`.
pub fn find_pattern(m: f64, chi: f64, grid: &Grid) -> Result<SteadyProfile> {
    find_pattern_with(m, chi, grid, &PatternSearch::default())
}

pub fn find_pattern_with(m: f64, chi: f64, grid: &Grid, search: &PatternSearch) -> Result<SteadyProfile> {
    if !(m > 2.0 && m.is_finite()) {
        return Err(Error::InvalidParams(format!("patterns need m > 2, got m = {m}")));
    }
    if !(chi > 0.0 && chi < 1.0 / (m - 1.0)) {
        return Err(Error::InvalidParams(format!(
            "patterns need 0 < chi < 1/(m-1), got chi = {chi}"
        )));
    }
    let (from, to) = admissible_lambda_window(m, chi);
    let (lambda, mu) = scan(m, chi, from, to, search.lambda_samples.max(1), search.refine_depth)
        .ok_or(Error::NoSolution { m, chi })?;
    let landmarks = critical_points(m, chi, lambda)?;
    let problem = SteadyProblem::new(m, chi, lambda, mu)?;
    reconstruct_profile(&problem, &landmarks, grid)
}

/// `λ_M = M^(m-1)/((m-1)χ) - M`, making `(M, M)` a steady state.
pub fn constant_state_lambda(mass: f64, m: f64, chi: f64) -> Result<f64> {
    if !(mass > 0.0 && mass < 1.0) {
        return Err(Error::Domain { what: "M", value: mass });
    }
    if !(m > 1.0) {
        return Err(Error::Domain { what: "m", value: m });
    }
    Ok(mass.powf(m - 1.0) / ((m - 1.0) * chi) - mass)
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessVerdict {
    /// The constant state is provably the only steady state.
    pub unique: bool,
    pub explanation: String,
}

/// Whether `(m, χ, M)` lies in the regime where `(M, M)` is the unique steady state.
pub fn uniqueness_regime(m: f64, chi: f64, mass: f64) -> Result<UniquenessVerdict> {
    if !(mass > 0.0 && mass < 1.0) {
        return Err(Error::Domain { what: "M", value: mass });
    }
    let verdict = |unique: bool, explanation: String| Ok(UniquenessVerdict { unique, explanation });
    if m > 1.0 && m <= 2.0 {
        if chi <= 1.0 {
            verdict(true, format!("1 < m = {m} <= 2 and chi = {chi} <= 1"))
        } else {
            verdict(false, format!("1 < m <= 2 but chi = {chi} > 1"))
        }
    } else if m > 2.0 {
        let first = mass.powf(m - 2.0) / (m - 1.0);
        if !(chi < first) {
            return verdict(false, format!("chi = {chi} >= M^(m-2)/(m-1) = {first}"));
        }
        let base = mass.powf(m - 1.0) - (m - 1.0) * chi * mass;
        let second = chi / base.powf((m - 2.0) / (m - 1.0));
        if second < 1.0 {
            verdict(
                true,
                format!("chi < M^(m-2)/(m-1) and chi/(M^(m-1)-(m-1)chi M)^((m-2)/(m-1)) = {second} < 1"),
            )
        } else {
            verdict(false, format!("chi/(M^(m-1)-(m-1)chi M)^((m-2)/(m-1)) = {second} >= 1"))
        }
    } else {
        verdict(false, format!("m = {m} is outside the range m > 1"))
    }
}
