//! Scalar Fourier symbols evaluated without overflow.
//!
//! Every hyperbolic ratio is rewritten with exponentials of non-positive
//! arguments, and every removable singularity at `|ξ| = 0` returns its limit.

use num_complex::Complex64;

/// Euclidean length `|ξ|` of the lattice mode `(m, n)`.
pub fn norm(m: i64, n: i64) -> f64 {
    ((m * m + n * n) as f64).sqrt()
}

/// `𝔪(k) = (cosh(kL) − 1)/(k sinh(kL))`, with `𝔪(0) = L/2`.
pub fn m_symbol(k: f64, l: f64) -> f64 {
    if k == 0.0 {
        return l / 2.0;
    }
    let a = -(-k * l).exp_m1();
    let b = -(-2.0 * k * l).exp_m1();
    a * a / (k * b)
}

/// `k cosh(kL)/sinh(kL)`, with limit `1/L` at `k = 0`.
pub fn k_coth(k: f64, l: f64) -> f64 {
    if k == 0.0 {
        return 1.0 / l;
    }
    let e = (-2.0 * k * l).exp();
    k * (1.0 + e) / -(-2.0 * k * l).exp_m1()
}

/// `k/sinh(kL)`, with limit `1/L` at `k = 0`.
pub fn k_csch(k: f64, l: f64) -> f64 {
    if k == 0.0 {
        return 1.0 / l;
    }
    2.0 * k * (-k * l).exp() / -(-2.0 * k * l).exp_m1()
}

/// `sinh(a)/sinh(b)` for `0 ≤ a ≤ b`, written with decaying exponentials.
pub fn sinh_ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    (a - b).exp() * (-(-2.0 * a).exp_m1()) / (-(-2.0 * b).exp_m1())
}

/// `cosh(a)/sinh(b)` for `0 ≤ a ≤ b`, `b > 0`.
pub fn cosh_sinh_ratio(a: f64, b: f64) -> f64 {
    (a - b).exp() * (1.0 + (-2.0 * a).exp()) / (-(-2.0 * b).exp_m1())
}

/// Riesz symbol `−im/|ξ|`.
pub fn riesz_x(m: i64, n: i64) -> Complex64 {
    if m == 0 && n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(0.0, -(m as f64) / norm(m, n))
}

/// Riesz symbol `−in/|ξ|`.
pub fn riesz_y(m: i64, n: i64) -> Complex64 {
    riesz_x(n, m)
}

/// `ℬ_x` symbol `−im/|ξ|²`.
pub fn op_b_x(m: i64, n: i64) -> Complex64 {
    if m == 0 && n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::new(0.0, -(m as f64) / (m * m + n * n) as f64)
}

/// `ℬ_y` symbol `−in/|ξ|²`.
pub fn op_b_y(m: i64, n: i64) -> Complex64 {
    op_b_x(n, m)
}

/// Projection symbol `ξ_a ξ_b/|ξ|²` for `(a, b)` chosen by the two factors; zero at `ξ = 0`.
pub fn proj(a: i64, b: i64, m: i64, n: i64) -> f64 {
    if m == 0 && n == 0 {
        return 0.0;
    }
    (a * b) as f64 / (m * m + n * n) as f64
}

/// `m²/|ξ|² − 1`, equal to `−1` at `ξ = 0`.
pub fn bracket_xx(m: i64, n: i64) -> f64 {
    proj(m, m, m, n) - 1.0
}

/// `n²/|ξ|² − 1`, equal to `−1` at `ξ = 0`.
pub fn bracket_yy(m: i64, n: i64) -> f64 {
    proj(n, n, m, n) - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m_symbol_limits() {
        assert_eq!(m_symbol(0.0, 3.0), 1.5);
        assert!((m_symbol(64.0, 1.0) * 64.0 - 1.0).abs() < 1e-10);
        let k: f64 = 1.3;
        let direct = (k.cosh() - 1.0) / (k * k.sinh());
        assert!((m_symbol(k, 1.0) - direct).abs() < 1e-14);
        assert!((m_symbol(1e-9, 2.0) - 1.0).abs() < 1e-12);
        assert!(m_symbol(1e4, 1e3).is_finite());
    }

    #[test]
    fn hyperbolic_ratios_match_direct_forms() {
        let (k, l): (f64, f64) = (2.0, 0.7);
        assert!((k_coth(k, l) - k * (k * l).cosh() / (k * l).sinh()).abs() < 1e-13);
        assert!((k_csch(k, l) - k / (k * l).sinh()).abs() < 1e-13);
        assert!((sinh_ratio(0.4, 1.1) - 0.4f64.sinh() / 1.1f64.sinh()).abs() < 1e-15);
        assert!((cosh_sinh_ratio(0.4, 1.1) - 0.4f64.cosh() / 1.1f64.sinh()).abs() < 1e-15);
        assert!((k_coth(1e-8, 2.0) - 0.5).abs() < 1e-8);
    }

    #[test]
    fn riesz_square_sum_is_minus_one() {
        for m in -5..=5 {
            for n in -5..=5 {
                let s = riesz_x(m, n) * riesz_x(m, n) + riesz_y(m, n) * riesz_y(m, n);
                let want = if m == 0 && n == 0 { 0.0 } else { -1.0 };
                assert!((s.re - want).abs() < 1e-15 && s.im.abs() < 1e-15);
            }
        }
    }
}
