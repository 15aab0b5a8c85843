//! Discrete estimates of `C^{k,α}` norms.
//!
//! The estimate is `max_{|β|≤k} sup|∂^β f| + max_{|β|=k} [∂^β f]_α`, where the
//! seminorm `[u]_α = sup |u(p) − u(q)|/|p − q|^α` runs over node pairs whose
//! periodic distance is at most `cap_cells` grid cells in every direction.
//! Horizontal derivatives are spectral; z-derivatives use finite differences.

use rayon::prelude::*;

use super::fft::to_spectral;
use super::grid::{ScalarField2, ScalarField3};
use super::slab::ZOps;
use crate::error::{MhsError, Result};

/// Options of the Hölder estimate.
#[derive(Debug, Clone, Copy)]
pub struct HolderOptions {
    /// Pairs are compared up to this many cells apart along each axis.
    pub cap_cells: usize,
}

impl Default for HolderOptions {
    fn default() -> Self {
        Self { cap_cells: 4 }
    }
}

fn check(k: usize, alpha: f64) -> Result<()> {
    if k > 2 {
        return Err(MhsError::InvalidConfig(format!("Hölder order {k} must be 0, 1 or 2")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(MhsError::InvalidConfig(format!("alpha = {alpha} must lie in (0,1)")));
    }
    Ok(())
}

/// All horizontal derivatives of order exactly `k` of a surface field.
fn derivatives2(f: &ScalarField2, k: usize) -> Vec<Vec<Vec<f64>>> {
    let s = to_spectral(f);
    let mut by_order = vec![vec![f.values.clone()]];
    if k >= 1 {
        let sx = s.dx();
        let sy = s.dy();
        by_order.push(vec![sx.to_real().values, sy.to_real().values]);
        if k >= 2 {
            by_order.push(vec![
                sx.dx().to_real().values,
                sx.dy().to_real().values,
                sy.dy().to_real().values,
            ]);
        }
    }
    by_order
}

fn periodic_offset(d: isize, n: usize, h: f64) -> f64 {
    let n = n as isize;
    let d = d.rem_euclid(n);
    (d.min(n - d)) as f64 * h
}

/// `C^{k,α}` estimate of a surface field.
pub fn holder_norm_estimate(f: &ScalarField2, k: usize, alpha: f64, opts: HolderOptions) -> Result<f64> {
    check(k, alpha)?;
    let g = f.grid;
    let ders = derivatives2(f, k);
    let sup = ders
        .iter()
        .flatten()
        .map(|v| super::grid::max_abs(v))
        .fold(0.0, f64::max);
    let cap = opts.cap_cells as isize;
    let mut semi = 0.0f64;
    for u in &ders[k] {
        for j in 0..g.n_y {
            for i in 0..g.n_x {
                let a = u[g.idx(i, j)];
                for dj in 0..=cap {
                    for di in -cap..=cap {
                        if dj == 0 && di <= 0 {
                            continue;
                        }
                        let ii = (i as isize + di).rem_euclid(g.n_x as isize) as usize;
                        let jj = (j as isize + dj).rem_euclid(g.n_y as isize) as usize;
                        let dx = periodic_offset(di, g.n_x, g.dx());
                        let dy = periodic_offset(dj, g.n_y, g.dy());
                        let dist = (dx * dx + dy * dy).sqrt();
                        if dist == 0.0 {
                            continue;
                        }
                        semi = semi.max((a - u[g.idx(ii, jj)]).abs() / dist.powf(alpha));
                    }
                }
            }
        }
    }
    Ok(sup + semi)
}

/// `C^{k,α}` estimate of a volume field.
pub fn holder_norm_estimate3(
    f: &ScalarField3,
    k: usize,
    alpha: f64,
    zops: &ZOps,
    opts: HolderOptions,
) -> Result<f64> {
    check(k, alpha)?;
    let g = f.grid;
    let nn = g.nz_nodes();
    let n = g.slice_len();
    let dz = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for i in 0..nn {
            let (start, w) = zops.derivative_stencil(i);
            for p in 0..n {
                out[i * n + p] = w.iter().enumerate().map(|(j, c)| c * v[(start + j) * n + p]).sum();
            }
        }
        out
    };
    let per_slice = |v: &[f64], order: usize| -> Vec<Vec<f64>> {
        let mut comps: Vec<Vec<f64>> = Vec::new();
        for i in 0..nn {
            let s = ScalarField2 {
                grid: g.base,
                values: v[i * n..(i + 1) * n].to_vec(),
            };
            let d = derivatives2(&s, order);
            if comps.is_empty() {
                comps = vec![Vec::with_capacity(v.len()); d[order].len()];
            }
            for (c, dv) in comps.iter_mut().zip(&d[order]) {
                c.extend_from_slice(dv);
            }
        }
        comps
    };
    // Derivatives grouped by total order: horizontal order r combined with z order k−r.
    let mut by_order: Vec<Vec<Vec<f64>>> = vec![vec![f.values.clone()]];
    let fz = dz(&f.values);
    if k >= 1 {
        let mut o1 = per_slice(&f.values, 1);
        o1.push(fz.clone());
        by_order.push(o1);
        if k >= 2 {
            let mut o2 = per_slice(&f.values, 2);
            o2.extend(per_slice(&fz, 1));
            o2.push(dz(&fz));
            by_order.push(o2);
        }
    }
    let sup = by_order
        .iter()
        .flatten()
        .map(|v| super::grid::max_abs(v))
        .fold(0.0, f64::max);
    let cap = opts.cap_cells as isize;
    let bg = g.base;
    let mut offsets = Vec::new();
    for dk in 0..=cap {
        for dj in -cap..=cap {
            for di in -cap..=cap {
                if dk == 0 && (dj < 0 || (dj == 0 && di <= 0)) {
                    continue;
                }
                let dx = periodic_offset(di, bg.n_x, bg.dx());
                let dy = periodic_offset(dj, bg.n_y, bg.dy());
                let dzv = dk as f64 * g.dz();
                let dist = (dx * dx + dy * dy + dzv * dzv).sqrt();
                if dist > 0.0 {
                    offsets.push((di, dj, dk as usize, dist.powf(-alpha)));
                }
            }
        }
    }
    let semi = by_order[k]
        .par_iter()
        .flat_map(|u| (0..nn).into_par_iter().map(move |kz| (u, kz)))
        .map(|(u, kz)| {
            let mut m = 0.0f64;
            for j in 0..bg.n_y {
                for i in 0..bg.n_x {
                    let a = u[kz * n + bg.idx(i, j)];
                    for &(di, dj, dk, w) in &offsets {
                        let kk = kz + dk;
                        if kk >= nn {
                            continue;
                        }
                        let ii = (i as isize + di).rem_euclid(bg.n_x as isize) as usize;
                        let jj = (j as isize + dj).rem_euclid(bg.n_y as isize) as usize;
                        m = m.max((a - u[kk * n + bg.idx(ii, jj)]).abs() * w);
                    }
                }
            }
            m
        })
        .reduce(|| 0.0, f64::max);
    Ok(sup + semi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_core::{SlabGrid3, TorusGrid2};

    #[test]
    fn zero_and_constant_fields() {
        let g = TorusGrid2::square(8).unwrap();
        let o = HolderOptions::default();
        assert_eq!(holder_norm_estimate(&ScalarField2::zeros(g), 2, 0.5, o).unwrap(), 0.0);
        let c = ScalarField2::from_fn(g, |_, _| -2.5);
        assert!((holder_norm_estimate(&c, 2, 0.5, o).unwrap() - 2.5).abs() < 1e-12);
        let sg = SlabGrid3::new(g, 8, 1.0).unwrap();
        let z = ZOps::new(sg, 8, 1).unwrap();
        let c3 = ScalarField3::from_fn(sg, |_, _, _| 1.5);
        assert!((holder_norm_estimate3(&c3, 2, 0.5, &z, o).unwrap() - 1.5).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = TorusGrid2::square(8).unwrap();
        let f = ScalarField2::zeros(g);
        assert!(holder_norm_estimate(&f, 3, 0.5, HolderOptions::default()).is_err());
        assert!(holder_norm_estimate(&f, 1, 1.0, HolderOptions::default()).is_err());
    }
}
