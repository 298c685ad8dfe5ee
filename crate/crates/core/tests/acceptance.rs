//! Acceptance checks, one line per criterion. Exits nonzero if any fails.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use common::*;
use kslab::cli::{make_initial_condition, RunConfig};
use kslab::diagnostics::{fit_decay, total_mass, trim_stagnation};
use kslab::limits::{sweep, LimitSystem};
use kslab::scheme::{self, update_rho, RunOutput};
use kslab::steady::*;
use kslab::{CellState, Grid, ModelParams, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "FAIL"
    }
}

/// The two long-time presets: m = 2, τ = η = 1, M = 1/2, perturbed cosine, implicit c, dt = 1e-3, N = 100.
fn preset_run(chi: f64) -> (RunOutput, f64) {
    let mut cfg = RunConfig::default();
    cfg.params.chi = chi;
    let grid = cfg.grid().unwrap();
    let initial = make_initial_condition(&cfg, &grid).unwrap();
    let start = Instant::now();
    let out = scheme::run(&initial, 100.0, &cfg.params, &cfg.solver, &grid, 1.0, &mut []).unwrap();
    (out, start.elapsed().as_secs_f64())
}

fn criterion_1(runs: &[(f64, RunOutput, f64)]) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (chi, out, secs) in runs {
        let m0 = out.records[0].mass_rho;
        let worst = out
            .records
            .iter()
            .map(|r| ((r.mass_rho - m0) / m0).abs())
            .fold(0.0, f64::max);
        let ok = worst <= 1e-10 && *secs < 30.0;
        pass &= ok;
        parts.push(format!("chi={chi}: drift {worst:.1e}, {secs:.1}s {}", mark(ok)));
    }
    verdict(pass, parts.join("; "))
}

fn criterion_2() -> Verdict {
    let grid = Grid::new(100).unwrap();
    let config = SolverConfig::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for &(m, chi, tau, eta) in &[(2.0, 1.0, 1.0, 1.0), (3.0, 0.4, 1.0, 1.0), (1.5, 1.0, 0.5, 2.0)] {
        let params = ModelParams::new(m, chi, tau, eta).unwrap();
        let mut state = CellState::constant(&grid, 0.5);
        for _ in 0..10_000 {
            state = scheme::advance(&state, &params, &config, &grid).unwrap().0;
        }
        let dev = state
            .rho
            .iter()
            .chain(&state.c)
            .map(|v| (v - 0.5).abs())
            .fold(0.0, f64::max);
        let ok = dev <= 1e-13;
        pass &= ok;
        parts.push(format!("({m},{chi},{tau},{eta}): {dev:.1e} {}", mark(ok)));
    }
    verdict(pass, parts.join("; "))
}

fn criterion_3() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for chi in [1.0, 10.0] {
        let mut cfg = RunConfig::default();
        cfg.apply_reference_discretization();
        cfg.params.chi = chi;
        let grid = cfg.grid().unwrap();
        let initial = make_initial_condition(&cfg, &grid).unwrap();
        let t_end = 1e5 * cfg.solver.dt;
        let out = scheme::run(&initial, t_end, &cfg.params, &cfg.solver, &grid, t_end, &mut []).unwrap();
        let ok = out.steps == 100_000 && out.bound_events == 0 && out.max_bound_violation <= 1e-10;
        pass &= ok;
        parts.push(format!(
            "chi={chi}: {} steps, max violation {:.1e} {}",
            out.steps,
            out.max_bound_violation,
            mark(ok)
        ));
    }
    verdict(pass, parts.join("; "))
}

fn criterion_4(runs: &[(f64, RunOutput, f64)]) -> Verdict {
    let (_, low, _) = &runs[0];
    let (_, high, _) = &runs[1];
    let dist = low.state.rho.iter().map(|r| (r - 0.5).abs()).fold(0.0, f64::max);
    let a = dist < 1e-3;
    let rho = &high.state.rho;
    let spread = rho.iter().cloned().fold(f64::MIN, f64::max) - rho.iter().cloned().fold(f64::MAX, f64::min);
    let k = high.trajectory.len();
    let (t99, t100) = (high.trajectory.times[k - 2], high.trajectory.times[k - 1]);
    assert!((t99 - 99.0).abs() < 1e-6 && (t100 - 100.0).abs() < 1e-6);
    let settle = max_diff(&high.trajectory.rho[k - 1], &high.trajectory.rho[k - 2]);
    let b_spread = spread > 0.1;
    let b_settle = settle < 1e-6;
    verdict(
        a && b_spread && b_settle,
        format!(
            "chi=1: |rho(100)-0.5| {dist:.1e} {}; chi=10: max-min {spread:.1e} (need > 0.1) {}, |rho(100)-rho(99)| {settle:.1e} {}",
            mark(a),
            mark(b_spread),
            mark(b_settle)
        ),
    )
}

fn criterion_5() -> Verdict {
    let cfg = RunConfig::default();
    let grid = cfg.grid().unwrap();
    let initial = make_initial_condition(&cfg, &grid).unwrap();
    let out = scheme::run(&initial, 50.0, &cfg.params, &cfg.solver, &grid, 0.1, &mut []).unwrap();
    let series: Vec<(f64, f64)> = out.records.iter().map(|r| (r.t, r.rel_entropy_h1)).collect();
    match fit_decay(trim_stagnation(&series), (1.0, 50.0)) {
        Ok(fit) => verdict(
            fit.mu > 0.0 && fit.r_squared >= 0.99,
            format!("mu {:.4}, r^2 {:.6} over {} points", fit.mu, fit.r_squared, fit.points),
        ),
        Err(e) => verdict(false, format!("fit failed: {e}")),
    }
}

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let (m, chi, lambda) = (3.0, 0.5, -0.1);
    let l = critical_points(m, chi, lambda).unwrap();
    let p = SteadyProblem::new(m, chi, lambda, 0.0).unwrap();
    let root_err = (l.c_tilde - (1.0 - 0.6f64.sqrt()) / 2.0)
        .abs()
        .max((l.c_tilde_plus - (1.0 + 0.6f64.sqrt()) / 2.0).abs());
    let a = root_err <= 1e-10;

    let limit = 2.0f64.sqrt() * PI / (-l.g_second_at_tilde).sqrt();
    let x_top = time_map(&p.with_mu(l.g_at_tilde - 1e-8), &l);
    let b = matches!(x_top, Ok(x) if (x - limit).abs() <= 1e-3) && (limit - 1.6953).abs() <= 1e-3;

    let x_bottom = time_map(&p.with_mu(l.g_at_tilde_plus + 1e-10), &l);
    let c = matches!(x_bottom, Ok(x) if x > 1e3);
    let secs = start.elapsed().as_secs_f64();
    let fast = secs < 1.0;
    let shown = |r: &kslab::Result<f64>| match r {
        Ok(x) => format!("{x:.6}"),
        Err(e) => format!("error ({e})"),
    };
    verdict(
        a && b && c && fast,
        format!(
            "roots err {root_err:.1e} {}; X top {} vs {limit:.6} {}; X(G(c+)+1e-10) = {} (need > 1e3) {}; {secs:.2}s {}",
            mark(a),
            shown(&x_top),
            mark(b),
            shown(&x_bottom),
            mark(c),
            mark(fast)
        ),
    )
}

fn criterion_7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let m = rng.gen_range(2.1..5.0);
        let chi = rng.gen_range(0.02..0.98) / (m - 1.0);
        let (lo, hi) = admissible_lambda_window(m, chi);
        let lambda = rng.gen_range(lo..hi);
        let c = rng.gen_range(-lambda..1.0);
        let p = SteadyProblem::new(m, chi, lambda, 0.0).unwrap();
        let diff = (g_lambda(c, &p).unwrap() - g_lambda_quadrature(c, &p).unwrap()).abs();
        worst = worst.max(diff);
    }
    verdict(
        worst <= 1e-10,
        format!("max |closed - quadrature| {worst:.1e} over 1000 points"),
    )
}

fn criterion_8() -> Verdict {
    let grid = Grid::new(100).unwrap();
    for &(m, chi) in &[(3.0, 0.4), (4.0, 0.3), (5.0, 0.2)] {
        let Ok(profile) = find_pattern(m, chi, &grid) else {
            continue;
        };
        let l = critical_points(m, chi, profile.lambda_star).unwrap();
        let p = SteadyProblem::new(m, chi, profile.lambda_star, profile.mu_star).unwrap();
        let residual = ode_residual(&p, &l, 2000).unwrap();
        let a = residual < 1e-4;

        let params = ModelParams::new(m, chi, 1.0, 1.0).unwrap();
        let initial = CellState::new(profile.rho_values.clone(), profile.c_values.clone(), 0.0).unwrap();
        let out = scheme::run(&initial, 5.0, &params, &SolverConfig::default(), &grid, 5.0, &mut []).unwrap();
        let drift = max_diff(&out.state.rho, &profile.rho_values);
        let b = drift < 1e-2;

        let increasing =
            profile.c_values.windows(2).all(|w| w[1] > w[0]) && profile.rho_values.windows(2).all(|w| w[1] > w[0]);
        let c = increasing && profile.mass > 0.0 && profile.mass < 1.0;
        return verdict(
            a && b && c,
            format!(
                "m={m}, chi={chi}: residual {residual:.1e} {}; FV drift {drift:.1e} {}; increasing with M={:.4} {}",
                mark(a),
                mark(b),
                profile.mass,
                mark(c)
            ),
        );
    }
    verdict(false, "no pattern found for any candidate".into())
}

fn criterion_9() -> Verdict {
    let start = Instant::now();
    let cfg = RunConfig::default();
    let grid = cfg.grid().unwrap();
    let initial = make_initial_condition(&cfg, &grid).unwrap();
    let run = |which, values: &[f64]| {
        sweep(which, values, &initial, &cfg.params, &cfg.solver, &grid, 10.0, 0.1)
            .unwrap()
            .distances
    };
    let tau = run(LimitSystem::TauZero, &[1.0, 0.1, 0.01]);
    let eta = run(LimitSystem::EtaZero, &[5.0, 0.5, 0.05]);
    let dec = |d: &[f64]| d.windows(2).all(|w| w[1] < w[0]);
    let secs = start.elapsed().as_secs_f64();
    let show = |d: &[f64]| d.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>().join(", ");
    verdict(
        dec(&tau) && dec(&eta) && secs < 300.0,
        format!(
            "tau [{}] {}; eta [{}] {}; {secs:.1}s",
            show(&tau),
            mark(dec(&tau)),
            show(&eta),
            mark(dec(&eta))
        ),
    )
}

fn criterion_10() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(2..=8);
        let grid = Grid::new(n).unwrap();
        let m = rng.gen_range(1.0..3.0);
        let chi = rng.gen_range(0.0..10.0);
        let tau = rng.gen_range(0.1..2.0);
        let eta = rng.gen_range(0.1..2.0);
        let dt = rng.gen_range(1e-5..2e-4);
        let params = ModelParams::new(m, chi, tau, eta).unwrap();
        let config = SolverConfig {
            dt,
            ..SolverConfig::default()
        };
        let rho = random_vec(&mut rng, n, 0.02, 0.98);
        let c = random_vec(&mut rng, n, 0.0, 1.0);
        let state = CellState::new(rho.clone(), c.clone(), 0.0).unwrap();
        let c_new = scheme::update_c(&state, &params, &config, &grid).unwrap();
        let (newton, _) = update_rho(&state, &c_new, &params, &config, &grid).unwrap();
        let oracle = fixed_point_rho(&rho, &c_new, m, chi, dt, grid.dx);
        worst = worst.max(max_diff(&newton, &oracle));
        assert!((total_mass(&newton, &grid) - total_mass(&rho, &grid)).abs() < 1e-14);
    }
    verdict(
        worst <= 1e-10,
        format!("max |newton - fixed point| {worst:.1e} over 100 draws"),
    )
}

fn main() {
    let runs: Vec<(f64, RunOutput, f64)> = [1.0, 10.0]
        .into_iter()
        .map(|chi| {
            let (out, secs) = preset_run(chi);
            (chi, out, secs)
        })
        .collect();
    let results = [
        ("mass conservation", criterion_1(&runs)),
        ("constant fixed point", criterion_2()),
        ("bound preservation", criterion_3()),
        ("long-time regimes", criterion_4(&runs)),
        ("entropy decay", criterion_5()),
        ("time-map analytics", criterion_6()),
        ("potential oracle", criterion_7()),
        ("pattern cross-validation", criterion_8()),
        ("limit sweeps", criterion_9()),
        ("small-instance Newton oracle", criterion_10()),
    ];
    let mut failed = 0;
    for (k, (name, v)) in results.iter().enumerate() {
        println!(
            "criterion {:>2} {name}: {} | {}",
            k + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
