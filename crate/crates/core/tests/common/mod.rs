#![allow(dead_code)]

use rand::Rng;

/// Interface fluxes of the upwind scheme, written out from the formulas.
pub fn oracle_fluxes(rho: &[f64], c: &[f64], m: f64, chi: f64, dx: f64) -> Vec<f64> {
    let n = rho.len();
    let mut f = vec![0.0; n + 1];
    for i in 0..n - 1 {
        let (rl, rr) = (rho[i], rho[i + 1]);
        let psi = if rr - rl >= 0.0 {
            (1.0 - rl) * rr.max(0.0).powf(m - 1.0)
        } else {
            (1.0 - rr) * rl.max(0.0).powf(m - 1.0)
        };
        let phi = if c[i + 1] - c[i] >= 0.0 {
            rl * (1.0 - rr)
        } else {
            rr * (1.0 - rl)
        };
        f[i + 1] = -(psi * (rr - rl) - chi * phi * (c[i + 1] - c[i])) / dx;
    }
    f
}

/// `(ρ - ρ_old)/dt + (F_{i+1/2} - F_{i-1/2})/dx`.
pub fn oracle_residual(rho: &[f64], rho_old: &[f64], c: &[f64], m: f64, chi: f64, dt: f64, dx: f64) -> Vec<f64> {
    let f = oracle_fluxes(rho, c, m, chi, dx);
    (0..rho.len())
        .map(|i| (rho[i] - rho_old[i]) / dt + (f[i + 1] - f[i]) / dx)
        .collect()
}

/// Damped Picard iteration `ρ ← (1-ω)ρ + ω(ρ_old - dt div F(ρ))`.
pub fn fixed_point_rho(rho_old: &[f64], c: &[f64], m: f64, chi: f64, dt: f64, dx: f64) -> Vec<f64> {
    let omega = 0.5;
    let mut rho = rho_old.to_vec();
    for _ in 0..200_000 {
        let f = oracle_fluxes(&rho, c, m, chi, dx);
        let mut change: f64 = 0.0;
        for i in 0..rho.len() {
            let picard = rho_old[i] - dt * (f[i + 1] - f[i]) / dx;
            let next = (1.0 - omega) * rho[i] + omega * picard;
            change = change.max((next - rho[i]).abs());
            rho[i] = next;
        }
        if change < 1e-16 {
            break;
        }
    }
    rho
}

/// Newton with a dense finite-difference Jacobian and partial pivoting.
pub fn dense_newton_rho(rho_old: &[f64], c: &[f64], m: f64, chi: f64, dt: f64, dx: f64) -> Vec<f64> {
    let n = rho_old.len();
    let mut rho = rho_old.to_vec();
    for _ in 0..50 {
        let r = oracle_residual(&rho, rho_old, c, m, chi, dt, dx);
        if r.iter().all(|v| v.abs() < 1e-11) {
            break;
        }
        let mut jac = vec![vec![0.0; n]; n];
        for j in 0..n {
            let h = 1e-7 * (1.0 + rho[j].abs());
            let mut plus = rho.clone();
            plus[j] += h;
            let mut minus = rho.clone();
            minus[j] -= h;
            let rp = oracle_residual(&plus, rho_old, c, m, chi, dt, dx);
            let rm = oracle_residual(&minus, rho_old, c, m, chi, dt, dx);
            for i in 0..n {
                jac[i][j] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let delta = gauss_solve(jac, r.iter().map(|v| -v).collect());
        for i in 0..n {
            rho[i] += delta[i];
        }
    }
    rho
}

pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        let pivot_row = a[k].clone();
        for i in k + 1..n {
            let l = a[i][k] / pivot_row[k];
            for (aij, pj) in a[i][k..].iter_mut().zip(&pivot_row[k..]) {
                *aij -= l * pj;
            }
            b[i] -= l * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

pub fn random_vec<R: Rng>(rng: &mut R, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// `ρ = M + A cos(kπx)` at the cell centers.
pub fn cosine_profile(n: usize, mass: f64, amplitude: f64, k: f64) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let x = (i as f64 + 0.5) / n as f64;
            mass + amplitude * (k * std::f64::consts::PI * x).cos()
        })
        .collect()
}
