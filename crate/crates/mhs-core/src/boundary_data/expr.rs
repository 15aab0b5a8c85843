//! Boundary fields from closed-form expressions in `x` and `y`.
//!
//! Expressions use the usual arithmetic operators, `^` for powers, the
//! constants `pi` and `e`, and functions such as `sin`, `cos`, `exp`.

use crate::error::{MhsError, Result};
use crate::spectral_core::{ScalarField2, TorusGrid2};

/// Samples the expression on every node of `grid`.
pub fn field_from_expr(text: &str, grid: TorusGrid2) -> Result<ScalarField2> {
    let expr: meval::Expr = text
        .parse()
        .map_err(|e| MhsError::Parse(format!("expression {text:?}: {e}")))?;
    let f = expr
        .bind2("x", "y")
        .map_err(|e| MhsError::Parse(format!("expression {text:?}: {e}")))?;
    let field = ScalarField2::from_fn(grid, f);
    if !field.is_finite() {
        return Err(MhsError::Parse(format!(
            "expression {text:?} is not finite on the grid"
        )));
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_expression() {
        let g = TorusGrid2::square(8).unwrap();
        let f = field_from_expr("1e-3*cos(x) + 2*sin(y)^2 - exp(-pi)", g).unwrap();
        for (k, v) in f.values.iter().enumerate() {
            let (x, y) = g.coords(k);
            let want = 1e-3 * x.cos() + 2.0 * y.sin().powi(2) - (-std::f64::consts::PI).exp();
            assert!((v - want).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let g = TorusGrid2::square(8).unwrap();
        assert!(field_from_expr("sin(x", g).is_err());
        assert!(field_from_expr("z + 1", g).is_err());
        assert!(field_from_expr("1/(x-x)", g).is_err());
    }
}
