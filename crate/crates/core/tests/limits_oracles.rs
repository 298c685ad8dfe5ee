mod common;

use common::*;
use kslab::diagnostics::total_mass;
use kslab::limits::*;
use kslab::{CUpdateMode, CellState, Error, Grid, ModelParams, SolverConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn setup(n: usize) -> (Grid, CellState) {
    let grid = Grid::new(n).unwrap();
    let state = CellState::new(cosine_profile(n, 0.5, 0.05, 1.0), vec![0.5; n], 0.0).unwrap();
    (grid, state)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn elliptic_solve_preserves_mass(seed in any::<u64>(), n in 2usize..80, eta in 1e-3f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let grid = Grid::new(n).unwrap();
        let rho = random_vec(&mut rng, n, 0.0, 1.0);
        let c = solve_elliptic_c(&rho, eta, &grid).unwrap();
        prop_assert!((total_mass(&c, &grid) - total_mass(&rho, &grid)).abs() < 1e-13);
    }
}

#[test]
fn tau_limit_ignores_c_update_mode() {
    let (grid, state) = setup(40);
    let params = ModelParams::preset(1.0);
    let run = |mode| {
        let config = SolverConfig {
            dt: 1e-2,
            c_update_mode: mode,
            ..SolverConfig::default()
        };
        run_limit_system(LimitSystem::TauZero, &state, &params, &config, &grid, 1.0, 0.1).unwrap()
    };
    assert_eq!(
        run(CUpdateMode::Explicit).trajectory,
        run(CUpdateMode::Implicit).trajectory
    );
}

#[test]
fn tau_limit_keeps_c_on_the_elliptic_manifold() {
    let (grid, state) = setup(40);
    let config = SolverConfig {
        dt: 1e-2,
        ..SolverConfig::default()
    };
    let out = run_limit_system(
        LimitSystem::TauZero,
        &state,
        &ModelParams::preset(1.0),
        &config,
        &grid,
        0.5,
        0.1,
    )
    .unwrap();
    for (rho, c) in out.trajectory.rho.iter().zip(&out.trajectory.c) {
        assert!(max_diff(c, &solve_elliptic_c(rho, 1.0, &grid).unwrap()) < 1e-14);
    }
}

#[test]
fn eta_limit_relaxes_c_pointwise() {
    let (grid, state) = setup(20);
    let config = SolverConfig {
        dt: 1e-3,
        ..SolverConfig::default()
    };
    let out = run_limit_system(
        LimitSystem::EtaZero,
        &state,
        &ModelParams::preset(1.0),
        &config,
        &grid,
        1e-3,
        1e-3,
    )
    .unwrap();
    assert_eq!(out.steps, 1);
    let gain = 1e-3 / (1.0 + 1e-3);
    for i in 0..20 {
        let expected = state.c[i] + gain * (state.rho[i] - state.c[i]);
        assert!((out.state.c[i] - expected).abs() < 1e-15);
    }
}

#[test]
fn distance_oracle_for_constant_offset() {
    let grid = Grid::new(10).unwrap();
    let (_, state) = setup(10);
    let config = SolverConfig {
        dt: 0.1,
        ..SolverConfig::default()
    };
    let params = ModelParams::preset(1.0);
    let a = kslab::scheme::run(&state, 1.0, &params, &config, &grid, 0.1, &mut [])
        .unwrap()
        .trajectory;
    let mut b = a.clone();
    for r in b.rho.iter_mut() {
        for v in r.iter_mut() {
            *v += 0.01;
        }
    }
    // ∫_0^1 ∫ 0.01² = 1e-4
    assert!((l2_space_time_distance(&a, &b, &grid).unwrap() - 0.01).abs() < 1e-12);
    b.times.pop();
    b.rho.pop();
    b.c.pop();
    assert!(matches!(
        l2_space_time_distance(&a, &b, &grid),
        Err(Error::MismatchedSampling)
    ));
}

#[test]
fn sweeps_shrink_towards_their_limits() {
    let (grid, state) = setup(50);
    let params = ModelParams::preset(1.0);
    let config = SolverConfig {
        dt: 1e-2,
        ..SolverConfig::default()
    };
    let tau = sweep(
        LimitSystem::TauZero,
        &[1.0, 0.1, 0.01],
        &state,
        &params,
        &config,
        &grid,
        5.0,
        0.1,
    )
    .unwrap();
    assert!(tau.distances.windows(2).all(|w| w[1] < w[0]), "{:?}", tau.distances);
    let eta = sweep(
        LimitSystem::EtaZero,
        &[5.0, 0.5, 0.05],
        &state,
        &params,
        &config,
        &grid,
        5.0,
        0.1,
    )
    .unwrap();
    assert!(eta.distances.windows(2).all(|w| w[1] < w[0]), "{:?}", eta.distances);
    assert!(!eta.outside_proven_regime);
    assert_eq!(tau.snapshot_distances[0].len(), tau.sample_times.len());
}

#[test]
fn tiny_parameter_is_close_to_limit() {
    let (grid, state) = setup(50);
    let params = ModelParams::preset(1.0);
    let config = SolverConfig {
        dt: 1e-2,
        ..SolverConfig::default()
    };
    let base = sweep(LimitSystem::TauZero, &[1.0], &state, &params, &config, &grid, 5.0, 0.1).unwrap();
    let tiny = sweep(LimitSystem::TauZero, &[1e-6], &state, &params, &config, &grid, 5.0, 0.1).unwrap();
    assert!(tiny.distances[0] < 1e-2 * base.distances[0]);
}

#[test]
fn eta_sweep_above_two_is_flagged() {
    let (grid, state) = setup(20);
    let params = ModelParams::new(3.0, 0.3, 1.0, 1.0).unwrap();
    let config = SolverConfig {
        dt: 1e-2,
        ..SolverConfig::default()
    };
    let r = sweep(
        LimitSystem::EtaZero,
        &[1.0, 0.1],
        &state,
        &params,
        &config,
        &grid,
        0.5,
        0.1,
    )
    .unwrap();
    assert!(r.outside_proven_regime);
}

#[test]
fn sweep_results_are_deterministic() {
    let (grid, state) = setup(30);
    let params = ModelParams::preset(1.0);
    let config = SolverConfig {
        dt: 1e-2,
        ..SolverConfig::default()
    };
    let go = || {
        sweep(
            LimitSystem::TauZero,
            &[1.0, 0.5, 0.1, 0.05],
            &state,
            &params,
            &config,
            &grid,
            1.0,
            0.1,
        )
        .unwrap()
    };
    let (a, b) = (go(), go());
    assert_eq!(a.distances, b.distances);
    assert_eq!(a.final_states, b.final_states);
}
