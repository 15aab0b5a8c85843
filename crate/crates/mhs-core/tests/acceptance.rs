//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits with
//! status 1 if any fails.

mod common;

use std::time::Instant;

use common::{band_limited, config, cosine_data, max_diff, solenoidal};
use mhs_core::current_equation::{enforce_divergence_constraint, op_a_apply, CurrentOperator, KernelCoeffs, SurfaceB};
use mhs_core::divcurl::{divcurl_solve, Fluxes, GreenTable};
use mhs_core::fixed_point::solve;
use mhs_core::linear_oracle::linear_solve;
use mhs_core::spectral_core::multipliers::{m_symbol, riesz_x, riesz_y};
use mhs_core::spectral_core::to_spectral;
use mhs_core::transport::{check_div_transport, compute_flow, transport_solve};
use mhs_core::{BoundaryData, DerivedBoundary, ScalarField2, SolverState, TorusGrid2, VectorField3};

// Criterion 1
const TRIVIAL_TOL: f64 = 1e-12;
const TRIVIAL_SECONDS: f64 = 1.0;
// Criterion 2
const LINEAR_C: f64 = 1.0;
const LINEAR_FLOOR: f64 = 1e-8;
const LINEAR_RATIO: (f64, f64) = (50.0, 200.0);
const LINEAR_SECONDS: f64 = 30.0;
// Criterion 3
const KERNEL_TOL: f64 = 1e-6;
const KERNEL_B_MAX: f64 = 5e-2;
const KERNEL_SECONDS: f64 = 60.0;
// Criteria 4 and 5
const TRACE_TOL: f64 = 1e-6;
const FORCE_TOL: f64 = 1e-6;
const DEFECT_TOL: f64 = 1e-9;
// Criterion 6
const DIV_TOL: f64 = 1e-5;
const DIV_REDUCTION: f64 = 4.0;
const DIV_FLOW_TOL: f64 = 1e-14;
// Criterion 7
const GAMMA_QUOTIENT: f64 = 0.5;
const UPSILON_SCALING: (f64, f64) = (5.0, 20.0);
// Criterion 8
const DIVCURL_TOL: f64 = 1e-8;
const FLUX_TOL: f64 = 1e-10;
// Criterion 9
const MULTIPLIER_TOL: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(no: usize, name: &str, outcome: Outcome) -> bool {
    let tag = if outcome.pass { "PASS" } else { "FAIL" };
    println!("[{tag}] {no}. {name}: {}", outcome.detail);
    outcome.pass
}

fn run(no: usize, name: &str, check: impl FnOnce() -> Outcome) -> bool {
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check)).unwrap_or_else(|e| Outcome {
        pass: false,
        detail: format!(
            "panicked: {}",
            e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
        ),
    });
    report(no, name, outcome)
}

fn trace_errors(s: &SolverState, data: &BoundaryData) -> f64 {
    let top = s.b.grid.nz_nodes() - 1;
    max_diff(s.b.comps[2].slice_values(0), &data.f_minus.values)
        .max(max_diff(s.b.comps[2].slice_values(top), &data.f_plus.values))
        .max(max_diff(s.b.comps[0].slice_values(0), &data.g1().values))
        .max(max_diff(s.b.comps[1].slice_values(0), &data.g2().values))
}

/// Small band-limited data with `‖f‖∞ = ‖g₁‖∞ = ‖g₂‖∞ = amp` and a common
/// mean on the two faces.
fn random_data(grid: TorusGrid2, amp: f64) -> BoundaryData {
    let mean = 0.25 * amp;
    let shift = |f: ScalarField2, a: f64| ScalarField2::from_values(grid, f.values.iter().map(|v| v * a + mean).collect()).unwrap();
    BoundaryData::new(
        shift(band_limited(grid, 21, 3, 1.0), 0.75 * amp),
        shift(band_limited(grid, 22, 3, 1.0), 0.75 * amp),
        band_limited(grid, 23, 3, amp),
        band_limited(grid, 24, 3, amp),
    )
    .unwrap()
}

fn main() {
    let mut all = true;
    let c16 = config(16, 32);
    let grid16 = c16.torus().unwrap();

    all &= run(1, "trivial equilibrium", || {
        let data = BoundaryData::zeros(grid16);
        let t = Instant::now();
        let s = solve(&data, &c16).unwrap();
        let secs = t.elapsed().as_secs_f64();
        let p0 = s.p.values[0];
        let p_var = s.p.values.iter().fold(0.0f64, |m, v| m.max((v - p0).abs()));
        let worst = s.diagnostics.entries()[..8].iter().fold(0.0f64, |m, (_, v)| m.max(*v));
        Outcome {
            pass: s.b.max_abs() == 0.0 && p_var <= TRIVIAL_TOL && worst <= TRIVIAL_TOL && secs <= TRIVIAL_SECONDS,
            detail: format!(
                "|b| = {:.1e}, p variation {p_var:.1e}, worst residual {worst:.1e} (tol {TRIVIAL_TOL:.0e}), {} iteration(s), {secs:.2} s (limit {TRIVIAL_SECONDS} s)",
                s.b.max_abs(),
                s.iterate
            ),
        }
    });

    // Kept for criteria 4, 5 and 7.
    let mut converged: Vec<(String, BoundaryData, SolverState)> = Vec::new();

    all &= run(2, "linearization consistency", || {
        let t = Instant::now();
        let mut gaps = Vec::new();
        let mut pass = true;
        for eps in [1e-4, 1e-3] {
            let data = cosine_data(grid16, eps);
            let s = solve(&data, &c16).unwrap();
            let lin = linear_solve(&data, c16.slab().unwrap()).unwrap();
            let gap_j0 = s.j0.max_abs_diff(&lin.j0);
            let gap_b = s.b.max_abs_diff(&lin.b);
            let bound = LINEAR_C * eps * eps + LINEAR_FLOOR;
            pass &= gap_j0 <= bound && gap_b <= bound;
            gaps.push((gap_j0, gap_b));
            converged.push((format!("eps={eps:.0e}"), data, s));
        }
        let secs = t.elapsed().as_secs_f64();
        let r_j0 = gaps[1].0 / gaps[0].0;
        let r_b = gaps[1].1 / gaps[0].1;
        let in_range = |r: f64| (LINEAR_RATIO.0..=LINEAR_RATIO.1).contains(&r);
        pass &= in_range(r_j0) && in_range(r_b) && secs <= LINEAR_SECONDS;
        Outcome {
            pass,
            detail: format!(
                "gaps j0 {:.3e}/{:.3e}, b {:.3e}/{:.3e} (bound C eps^2 + {LINEAR_FLOOR:.0e}, C = {LINEAR_C}), ratios {r_j0:.1}/{r_b:.1} (range {:?}), {secs:.1} s (limit {LINEAR_SECONDS} s)",
                gaps[0].0, gaps[1].0, gaps[0].1, gaps[1].1, LINEAR_RATIO
            ),
        }
    });

    all &= run(3, "kernel decomposition identity", || {
        let t = Instant::now();
        let zops = c16.zops().unwrap();
        let g = zops.grid;
        let table = GreenTable::new(zops.clone());
        // Admissible b: horizontal band n/8 resolves the pulled-back products
        // on the grid without aliasing.
        let cap = (g.base.n_x / 8) as i32;
        let mut worst = 0.0f64;
        for b_seed in [3, 4] {
            let b = solenoidal(g, b_seed, cap, KERNEL_B_MAX);
            let flow = compute_flow(&b, &zops, &c16).unwrap();
            let kc = KernelCoeffs::build(&flow, &table);
            for u_seed in 100..104 {
                let u = band_limited(g.base, u_seed, 2, 1.0);
                let lhs = op_a_apply(&flow.pull_back_surface(&u), &table);
                let rhs = to_spectral(&u).t0_apply(g.l).add(&kc.t_sum_raw(&u)).to_real();
                worst = worst.max(max_diff(&lhs.values, &rhs.values));
            }
        }
        let secs = t.elapsed().as_secs_f64();
        Outcome {
            pass: worst <= KERNEL_TOL && secs <= KERNEL_SECONDS,
            detail: format!(
                "max error {worst:.3e} over 2 fields b x 4 fields u (tol {KERNEL_TOL:.0e}), |b| = {KERNEL_B_MAX}, b modes <= {cap}, {secs:.1} s (limit {KERNEL_SECONDS} s)"
            ),
        }
    });

    let random = random_data(grid16, 4e-4);
    match solve(&random, &c16) {
        Ok(s) => converged.push(("random band-limited".into(), random.clone(), s)),
        Err(e) => println!("note: solve on random band-limited data failed: {e}"),
    }

    all &= run(4, "boundary-value reproduction", || {
        let mut pass = converged.len() == 3;
        let mut parts = Vec::new();
        for (name, data, s) in &converged {
            let e = trace_errors(s, data);
            pass &= e <= TRACE_TOL;
            parts.push(format!("{name}: {e:.2e}"));
        }
        Outcome {
            pass,
            detail: format!("trace errors {} (tol {TRACE_TOL:.0e})", parts.join(", ")),
        }
    });

    all &= run(5, "force balance", || {
        let mut pass = converged.len() == 3;
        let mut parts = Vec::new();
        for (name, _, s) in &converged {
            let d = &s.diagnostics;
            let defect = d.pressure_mean_defect.0.max(d.pressure_mean_defect.1);
            pass &= d.residual_force <= FORCE_TOL && defect <= DEFECT_TOL;
            parts.push(format!("{name}: force {:.2e}, defect {defect:.2e}", d.residual_force));
        }
        Outcome {
            pass,
            detail: format!("{} (tol {FORCE_TOL:.0e}, {DEFECT_TOL:.0e})", parts.join("; ")),
        }
    });

    all &= run(6, "divergence transport", || {
        let div_at = |n_z: usize| {
            let mut c = config(32, n_z);
            c.flow_tol = DIV_FLOW_TOL;
            let zops = c.zops().unwrap();
            let g = zops.grid;
            let b = solenoidal(g, 3, 2, 0.1);
            let sb = SurfaceB::new(&b, &zops);
            let j3 = ScalarField2::from_fn(g.base, |x, y| (x + y).cos() + 0.5 * (2.0 * x).sin());
            let s1 = ScalarField2::from_fn(g.base, |x, y| y.sin() + 0.3 * (x - y).cos());
            let s2 = ScalarField2::from_fn(g.base, |x, y| 0.7 * x.cos() + 0.2 * (2.0 * y).sin());
            let j0 = enforce_divergence_constraint(&sb, &j3, &s1, &s2, 1e-14, 100).unwrap();
            let flow = compute_flow(&b, &zops, &c).unwrap();
            check_div_transport(&transport_solve(&flow, &j0), &zops)
        };
        let (d32, d64) = (div_at(32), div_at(64));
        Outcome {
            pass: d64 <= DIV_TOL && d32 / d64 >= DIV_REDUCTION,
            detail: format!(
                "max div j: n_z=32 {d32:.3e}, n_z=64 {d64:.3e} (tol {DIV_TOL:.0e}), reduction {:.1} (min {DIV_REDUCTION}), |b| = 0.1, n = 32, flow_tol {DIV_FLOW_TOL:.0e}",
                d32 / d64
            ),
        }
    });

    all &= run(7, "contraction", || {
        let (_, data, s) = converged.last().expect("random-data run");
        let size = data.f_minus.max_abs().max(data.f_plus.max_abs())
            + data.g1().values.iter().zip(&data.g2().values).fold(0.0f64, |m, (a, b)| m.max(a.hypot(*b)));
        let q = s.diagnostics.contraction_estimate;
        let zops = c16.zops().unwrap();
        let g = zops.grid;
        let table = GreenTable::new(zops.clone());
        let zero = BoundaryData::zeros(g.base);
        let derived = DerivedBoundary::build(&zero, g.l);
        let upsilon = |amp: f64| {
            let b = solenoidal(g, 5, 2, amp);
            let flow = compute_flow(&b, &zops, &c16).unwrap();
            let kc = KernelCoeffs::build(&flow, &table);
            CurrentOperator::new(&b, &flow, &kc, &table, &zero, &derived).contraction_estimate(20, 1)
        };
        let (u3, u2) = (upsilon(1e-3), upsilon(1e-2));
        let scale = u2 / u3;
        Outcome {
            pass: size <= 1e-3
                && s.iterate >= 2
                && q < GAMMA_QUOTIENT
                && (UPSILON_SCALING.0..=UPSILON_SCALING.1).contains(&scale),
            detail: format!(
                "Gamma quotient {q:.3e} (limit {GAMMA_QUOTIENT}) for |f|+|g| = {size:.2e}; Upsilon {u3:.3e} at |b| = 1e-3, {u2:.3e} at 1e-2, ratio {scale:.2} (range {:?})",
                UPSILON_SCALING
            ),
        }
    });

    all &= run(8, "div-curl solver", || {
        let c = config(32, 64);
        let zops = c.zops().unwrap();
        let g = zops.grid;
        let table = GreenTable::new(zops);
        let j = solenoidal(g, 11, 3, 1.0);
        let f = ScalarField2::from_fn(g.base, |x, y| 1e-3 * (x.cos() + (x + y).sin()));
        let zero2 = ScalarField2::zeros(g.base);
        let data = BoundaryData::new(f.clone(), f, zero2.clone(), zero2).unwrap();
        let derived = DerivedBoundary::build(&data, g.l);
        let flux = Fluxes { j1: 0.3, j2: -0.2 };
        let (_, rep) = divcurl_solve(&j, &data, &derived, flux, &table).unwrap();
        let curl_rel = rep.curl / j.max_abs();
        let flux_err = (rep.flux.j1 - flux.j1).abs().max((rep.flux.j2 - flux.j2).abs());
        let zero_data = BoundaryData::zeros(g.base);
        let (w0, _) = divcurl_solve(
            &VectorField3::zeros(g, 3),
            &zero_data,
            &DerivedBoundary::build(&zero_data, g.l),
            Fluxes::default(),
            &table,
        )
        .unwrap();
        Outcome {
            pass: curl_rel <= DIVCURL_TOL && rep.div <= DIVCURL_TOL && flux_err <= FLUX_TOL && w0.max_abs() == 0.0,
            detail: format!(
                "curl rel {curl_rel:.3e}, div {:.3e} (tol {DIVCURL_TOL:.0e}), flux error {flux_err:.1e} (tol {FLUX_TOL:.0e}), zero data |W| = {:.1e}",
                rep.div,
                w0.max_abs()
            ),
        }
    });

    all &= run(9, "multiplier unit suite", || {
        let mut worst = 0.0f64;
        for l in [0.5, 1.0, 2.0] {
            worst = worst.max((m_symbol(0.0, l) - l / 2.0).abs());
            for k in [1e3, 1e5, 1e8] {
                worst = worst.max((m_symbol(k, l) * k - 1.0).abs());
            }
        }
        worst = worst.max(riesz_x(0, 0).norm()).max(riesz_y(0, 0).norm());
        let grid = TorusGrid2::square(16).unwrap();
        let u = band_limited(grid, 7, 7, 1.0);
        let s = to_spectral(&u);
        let back = s.t0_apply(1.3).t0_inverse(1.3).to_real();
        let round_trip = max_diff(&back.values, &u.values);
        worst = worst.max(round_trip);
        Outcome {
            pass: worst <= MULTIPLIER_TOL,
            detail: format!("worst deviation {worst:.2e} (tol {MULTIPLIER_TOL:.0e}), T0 round trip {round_trip:.2e}"),
        }
    });

    if all {
        println!("all acceptance criteria passed");
    } else {
        println!("some acceptance criteria failed");
        std::process::exit(1);
    }
}
