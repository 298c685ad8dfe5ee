//! Quadrature rules used by the steady-state analysis.

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK constants).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_gauss_kronrod<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (value, err) = gk15(f, a, b);
        let mid = 0.5 * (a + b);
        if err <= tol || depth >= 60 || mid <= a || mid >= b {
            return value;
        }
        recurse(f, a, mid, 0.5 * tol, depth + 1) + recurse(f, mid, b, 0.5 * tol, depth + 1)
    }
    if a == b {
        return 0.0;
    }
    recurse(&f, a, b, tol, 0)
}

/// Midpoint rule in θ over `[0, π]` with `n` nodes, equivalently Gauss-Chebyshev
/// quadrature of `∫_{-1}^{1} g(z) / sqrt(1 - z²) dz` with `z = -cos θ`.
pub fn chebyshev_midpoint<F: Fn(f64) -> f64>(g: &F, n: usize) -> f64 {
    let h = std::f64::consts::PI / n as f64;
    (0..n).map(|j| g((j as f64 + 0.5) * h)).sum::<f64>() * h
}

/// Doubles `n` from `n0` until successive midpoint sums differ by less than
/// `tol`; returns the last value and node count.
pub fn chebyshev_adaptive<F: Fn(f64) -> f64>(g: F, n0: usize, tol: f64, n_max: usize) -> (f64, usize) {
    let mut n = n0.max(1);
    let mut prev = chebyshev_midpoint(&g, n);
    while n < n_max {
        n *= 2;
        let next = chebyshev_midpoint(&g, n);
        if (next - prev).abs() < tol || !next.is_finite() {
            return (next, n);
        }
        prev = next;
    }
    (prev, n)
}
