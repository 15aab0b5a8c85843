//! Field generators shared by the integration tests.
#![allow(dead_code)]

use mhs_core::{BoundaryData, ScalarField2, SlabGrid3, SolverConfig, TorusGrid2, VectorField3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn config(n: usize, n_z: usize) -> SolverConfig {
    SolverConfig {
        n_x: n,
        n_y: n,
        n_z,
        ..SolverConfig::default()
    }
}

/// Random trigonometric polynomial with horizontal modes `|m|, |n| ≤ cap`,
/// zero mean, scaled to `max |u| = amp`.
pub fn band_limited(grid: TorusGrid2, seed: u64, cap: i32, amp: f64) -> ScalarField2 {
    let mut r = rng(seed);
    let terms: Vec<(f64, f64, f64, f64)> = (0..8)
        .map(|_| {
            let (mut m, mut n) = (0, 0);
            while m == 0 && n == 0 {
                m = r.random_range(-cap..=cap);
                n = r.random_range(-cap..=cap);
            }
            (m as f64, n as f64, r.random_range(0.0..std::f64::consts::TAU), r.random_range(-1.0..1.0))
        })
        .collect();
    let f = |x: f64, y: f64| terms.iter().map(|&(m, n, ph, c)| c * (m * x + n * y + ph).cos()).sum::<f64>();
    let raw = ScalarField2::from_fn(grid, f);
    let s = amp / raw.max_abs();
    ScalarField2::from_fn(grid, |x, y| s * f(x, y))
}

/// Divergence-free field `∇×A` for a random `A` built from terms
/// `sin(mx + ny + φ) cos(kz + ψ)` with `|m|, |n| ≤ cap`, differentiated
/// analytically and scaled to `max |b| = amp`.
pub fn solenoidal(grid: SlabGrid3, seed: u64, cap: i32, amp: f64) -> VectorField3 {
    let mut r = rng(seed);
    let terms: Vec<(f64, f64, f64, f64, f64, f64, usize)> = (0..6)
        .map(|_| {
            (
                r.random_range(-cap..=cap) as f64,
                r.random_range(-cap..=cap) as f64,
                r.random_range(0.0..3.0),
                r.random_range(0.0..std::f64::consts::TAU),
                r.random_range(0.0..std::f64::consts::TAU),
                r.random_range(-1.0..1.0),
                r.random_range(0..3usize),
            )
        })
        .collect();
    let f = |x: f64, y: f64, z: f64| {
        // d[c][a] = ∂_a A_c
        let mut d = [[0.0; 3]; 3];
        for &(m, n, k, ph, ps, c, comp) in &terms {
            let th = m * x + n * y + ph;
            let q = (k * z + ps).cos();
            d[comp][0] += c * m * th.cos() * q;
            d[comp][1] += c * n * th.cos() * q;
            d[comp][2] -= c * k * th.sin() * (k * z + ps).sin();
        }
        [d[2][1] - d[1][2], d[0][2] - d[2][0], d[1][0] - d[0][1]]
    };
    let raw = VectorField3::from_fn(grid, f);
    let s = amp / raw.max_abs();
    VectorField3::from_fn(grid, |x, y, z| f(x, y, z).map(|v| s * v))
}

/// `f = ε cos x` on both faces and `g = ε (sin y, sin x)`.
pub fn cosine_data(grid: TorusGrid2, eps: f64) -> BoundaryData {
    let f = ScalarField2::from_fn(grid, |x, _| eps * x.cos());
    BoundaryData::new(
        f.clone(),
        f,
        ScalarField2::from_fn(grid, |_, y| eps * y.sin()),
        ScalarField2::from_fn(grid, |x, _| eps * x.sin()),
    )
    .unwrap()
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
