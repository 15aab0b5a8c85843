//! Property tests and independent oracles for the spectral layer, field I/O
//! and configuration.

mod common;

use std::f64::consts::PI;

use mhs_core::cli_io::field_io::FieldFile;
use mhs_core::fixed_point::{gamma_step, solve};
use mhs_core::linear_oracle::linear_solve;
use mhs_core::spectral_core::{holder_norm_estimate, to_spectral, Complex64, HolderOptions};
use mhs_core::{ScalarField2, SlabGrid3, SolverConfig, TorusGrid2, VectorField3};
use proptest::prelude::*;

fn grid_strategy() -> impl Strategy<Value = TorusGrid2> {
    (2usize..=6, 2usize..=6).prop_map(|(a, b)| TorusGrid2::new(2 * a, 2 * b).unwrap())
}

fn field_strategy() -> impl Strategy<Value = ScalarField2> {
    grid_strategy().prop_flat_map(|g| {
        prop::collection::vec(-10.0f64..10.0, g.len()).prop_map(move |v| ScalarField2::from_values(g, v).unwrap())
    })
}

/// `(2π)²/N Σ f(r) e^{−i(mx + ny)}` summed directly.
fn direct_coefficient(f: &ScalarField2, m: i64, n: i64) -> Complex64 {
    let g = f.grid;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..g.n_y {
        for i in 0..g.n_x {
            let phase = -(m as f64 * g.x(i) + n as f64 * g.y(j));
            acc += f.values[g.idx(i, j)] * Complex64::from_polar(1.0, phase);
        }
    }
    acc * (4.0 * PI * PI / g.len() as f64)
}

proptest! {
    #[test]
    fn fft_matches_direct_sum(f in field_strategy()) {
        let s = to_spectral(&f);
        let g = f.grid;
        let scale = f.max_abs().max(1.0) * 4.0 * PI * PI;
        for n in -(g.n_y as i64) / 2 + 1..(g.n_y as i64) / 2 {
            for m in -(g.n_x as i64) / 2 + 1..(g.n_x as i64) / 2 {
                let d = direct_coefficient(&f, m, n);
                prop_assert!((s.coeff(m, n) - d).norm() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn parseval(f in field_strategy()) {
        let g = f.grid;
        let integral: f64 = f.values.iter().map(|v| v * v).sum::<f64>() * g.cell_area();
        let energy = to_spectral(&f).energy();
        prop_assert!((integral - energy).abs() <= 1e-12 * integral.max(1.0));
    }

    #[test]
    fn transform_is_linear(f in field_strategy(), a in -3.0f64..3.0, b in -3.0f64..3.0, seed in 0u64..1000) {
        let h = common::band_limited(f.grid, seed, 2, 1.0);
        let comb = ScalarField2::from_values(f.grid, f.values.iter().zip(&h.values).map(|(x, y)| a * x + b * y).collect()).unwrap();
        let lhs = to_spectral(&comb);
        let rhs = to_spectral(&f).axpby(a, &to_spectral(&h), b);
        for (x, y) in lhs.coeffs.iter().zip(&rhs.coeffs) {
            prop_assert!((x - y).norm() <= 1e-11 * (1.0 + x.norm()));
        }
    }

    #[test]
    fn inverse_transform_round_trip(f in field_strategy()) {
        let back = to_spectral(&f).to_real();
        prop_assert!(common::max_diff(&back.values, &f.values) <= 1e-12 * f.max_abs().max(1.0));
    }

    #[test]
    fn t0_round_trip(f in field_strategy(), l in 0.05f64..5.0) {
        // Multipliers act on the Nyquist-free part of a field.
        let s = to_spectral(&f);
        let projected = s.apply_real_multiplier(|_, _| 1.0).to_real();
        let back = s.t0_apply(l).t0_inverse(l).to_real();
        prop_assert!(common::max_diff(&back.values, &projected.values) <= 1e-12 * f.max_abs().max(1.0));
    }

    #[test]
    fn field_file_round_trip_is_bit_exact(
        (nx, ny, nz) in (2usize..=4, 2usize..=4, 4usize..=6),
        l in 0.1f64..4.0,
        bits in prop::collection::vec(any::<u64>(), 1..64),
    ) {
        let g = SlabGrid3::new(TorusGrid2::new(2 * nx, 2 * ny).unwrap(), nz, l).unwrap();
        let v = VectorField3::from_fn(g, |x, y, z| {
            let k = ((x * 7.0 + y * 13.0 + z * 17.0).abs() * 1e3) as usize;
            [f64::from_bits(bits[k % bits.len()]), x - z, y * l]
        });
        let bytes = FieldFile::from_volume(&v).to_bytes();
        let again = FieldFile::from_bytes(&bytes).unwrap().to_bytes();
        prop_assert_eq!(bytes, again);
    }

    #[test]
    fn config_text_round_trip(
        (nx, ny, nz) in (2usize..20, 2usize..20, 4usize..200),
        l in 1e-3f64..1e3,
        tols in prop::array::uniform3(1e-16f64..1.0),
        caps in prop::array::uniform3(1usize..1000),
        m_max in 1e-6f64..1e3,
        damping in 1e-3f64..=1.0,
        alpha in 1e-3f64..0.999,
    ) {
        let c = SolverConfig {
            n_x: 2 * nx,
            n_y: 2 * ny,
            n_z: nz,
            l,
            n_s: 2 + caps[0] % 30,
            n_quad_z: 1 + caps[1] % 4,
            fp_tol: tols[0],
            j0_tol: tols[1],
            flow_tol: tols[2],
            max_outer: caps[0],
            max_neumann: caps[1],
            max_newton: caps[2],
            m_max,
            damping,
            alpha,
        };
        prop_assert_eq!(SolverConfig::parse(&c.to_text()).unwrap(), c);
    }
}

/// Brute-force `sup|f| + sup |f(p) − f(q)|/|p − q|^α` over every node pair.
fn holder0_all_pairs(f: &ScalarField2, alpha: f64) -> f64 {
    let g = f.grid;
    let period = |d: f64| {
        let d = d.rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d)
    };
    let mut semi = 0.0f64;
    for p in 0..g.len() {
        for q in 0..g.len() {
            if p == q {
                continue;
            }
            let (xp, yp) = g.coords(p);
            let (xq, yq) = g.coords(q);
            let dist = period(xp - xq).hypot(period(yp - yq));
            semi = semi.max((f.values[p] - f.values[q]).abs() / dist.powf(alpha));
        }
    }
    f.max_abs() + semi
}

#[test]
fn holder_estimate_matches_all_pairs_oracle() {
    for (n, seed) in [(8, 1), (10, 2), (12, 3)] {
        let g = TorusGrid2::square(n).unwrap();
        let f = common::band_limited(g, seed, 3, 1.0);
        for alpha in [0.2, 0.5, 0.9] {
            let est = holder_norm_estimate(&f, 0, alpha, HolderOptions { cap_cells: n / 2 }).unwrap();
            let oracle = holder0_all_pairs(&f, alpha);
            assert!((est - oracle).abs() <= 1e-13 * oracle, "n {n} alpha {alpha}: {est} vs {oracle}");
        }
    }
}

fn first_step(data: &mhs_core::BoundaryData, c: &SolverConfig) -> (f64, f64) {
    let (b1, state) = gamma_step(&VectorField3::zeros(c.slab().unwrap(), 3), data, c).unwrap();
    let lin = linear_solve(data, c.slab().unwrap()).unwrap();
    let flux = (state.flux.j1 - lin.flux.j1).abs().max((state.flux.j2 - lin.flux.j2).abs());
    (b1.max_abs_diff(&lin.b).max(flux), state.j0.max_abs_diff(&lin.j0))
}

#[test]
fn first_step_from_zero_equals_closed_form_solution() {
    // With f = 0 and g = ε(sin y, sin x) the quadratic mean terms ⟨j₀f⟩ and
    // ⟨j₀³g⟩ vanish, so one step from b = 0 is exactly the linear problem.
    let c = common::config(12, 16);
    let g = c.torus().unwrap();
    let zero = ScalarField2::zeros(g);
    let data = mhs_core::BoundaryData::new(
        zero.clone(),
        zero,
        ScalarField2::from_fn(g, |_, y| 1e-3 * y.sin()),
        ScalarField2::from_fn(g, |x, _| 1e-3 * x.sin()),
    )
    .unwrap();
    let (gap_b, gap_j0) = first_step(&data, &c);
    assert!(gap_b <= 1e-17 && gap_j0 <= 1e-17, "{gap_b:.3e} {gap_j0:.3e}");
}

#[test]
fn first_step_departs_from_closed_form_quadratically() {
    let c = common::config(12, 16);
    let g = c.torus().unwrap();
    let data = |eps: f64| {
        let f = common::band_limited(g, 31, 2, eps);
        mhs_core::BoundaryData::new(
            f.clone(),
            f,
            common::band_limited(g, 32, 2, eps),
            common::band_limited(g, 33, 2, eps),
        )
        .unwrap()
    };
    let (b4, j4) = first_step(&data(1e-4), &c);
    let (b3, j3) = first_step(&data(1e-3), &c);
    for r in [b3 / b4, j3 / j4] {
        assert!((r - 100.0).abs() < 1.0, "ratio {r}");
    }
}

#[test]
fn solves_are_bit_identical() {
    let c = common::config(8, 8);
    let data = common::cosine_data(c.torus().unwrap(), 1e-3);
    let a = solve(&data, &c).unwrap();
    let b = solve(&data, &c).unwrap();
    assert_eq!(a.b, b.b);
    assert_eq!(a.j, b.j);
    assert_eq!(a.p, b.p);
    assert_eq!(a.diagnostics, b.diagnostics);
}

#[test]
fn mirror_symmetric_data_give_mirror_symmetric_solution() {
    // Under x ↦ −x with B₁ flipped, f(−x,y) = f(x,y), g₁(−x,y) = −g₁(x,y),
    // g₂(−x,y) = g₂(x,y).
    let c = common::config(12, 16);
    let g = c.torus().unwrap();
    let f = ScalarField2::from_fn(g, |x, y| 1e-3 * (x.cos() + 0.5 * (2.0 * x).cos() * y.sin()));
    let data = mhs_core::BoundaryData::new(
        f.clone(),
        f,
        ScalarField2::from_fn(g, |x, y| 1e-3 * x.sin() * (1.0 + y.cos())),
        ScalarField2::from_fn(g, |x, y| 1e-3 * (x.cos() * y.sin() + 0.3 * y.cos())),
    )
    .unwrap();
    let s = solve(&data, &c).unwrap();
    let sg = s.b.grid;
    let mirror = |p: usize| {
        let (i, j) = (p % g.n_x, p / g.n_x);
        g.idx((g.n_x - i) % g.n_x, j)
    };
    let mut worst = 0.0f64;
    for k in 0..sg.nz_nodes() {
        for p in 0..g.len() {
            let q = mirror(p);
            let b = |c: usize, p: usize| s.b.comps[c].slice_values(k)[p];
            worst = worst.max((b(0, p) + b(0, q)).abs()).max((b(1, p) - b(1, q)).abs()).max((b(2, p) - b(2, q)).abs());
        }
    }
    assert!(worst <= 1e-10, "mirror defect {worst:.3e}");
}
