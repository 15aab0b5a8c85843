//! Solver configuration and its flat `key=value` text form.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{MhsError, Result};
use crate::spectral_core::{SlabGrid3, TorusGrid2, ZOps};

/// Every numerical knob of a solve run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub n_x: usize,
    pub n_y: usize,
    /// Number of z-intervals; the slab carries `n_z + 1` node layers.
    pub n_z: usize,
    #[serde(rename = "L")]
    pub l: f64,
    /// Gauss–Legendre nodes per z-interval in product integration.
    pub n_s: usize,
    /// Sub-intervals per z-interval in product integration.
    pub n_quad_z: usize,
    pub fp_tol: f64,
    pub j0_tol: f64,
    pub flow_tol: f64,
    pub max_outer: usize,
    pub max_neumann: usize,
    pub max_newton: usize,
    #[serde(rename = "M_max")]
    pub m_max: f64,
    pub damping: f64,
    pub alpha: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n_x: 16,
            n_y: 16,
            n_z: 32,
            l: 1.0,
            n_s: 8,
            n_quad_z: 1,
            fp_tol: 1e-10,
            j0_tol: 1e-10,
            flow_tol: 1e-10,
            max_outer: 50,
            max_neumann: 200,
            max_newton: 50,
            m_max: 0.1,
            damping: 1.0,
            alpha: 0.5,
        }
    }
}

impl SolverConfig {
    /// Checks ranges of every field.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(MhsError::InvalidConfig(msg));
        if self.n_x < 4 || self.n_y < 4 || self.n_x % 2 != 0 || self.n_y % 2 != 0 {
            return bad(format!("grid {}x{} must be even and at least 4", self.n_x, self.n_y));
        }
        if self.n_z < 4 {
            return bad(format!("n_z = {} must be at least 4", self.n_z));
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return bad(format!("L = {} must be positive", self.l));
        }
        if self.n_s < 2 || self.n_quad_z < 1 {
            return bad("n_s must be at least 2 and n_quad_z at least 1".into());
        }
        for (name, v) in [
            ("fp_tol", self.fp_tol),
            ("j0_tol", self.j0_tol),
            ("flow_tol", self.flow_tol),
            ("M_max", self.m_max),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} = {v} must be positive"));
            }
        }
        if self.max_outer < 1 || self.max_neumann < 1 || self.max_newton < 1 {
            return bad("iteration caps must be at least 1".into());
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad(format!("damping = {} must lie in (0,1]", self.damping));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha = {} must lie in (0,1)", self.alpha));
        }
        Ok(())
    }

    /// Surface grid.
    pub fn torus(&self) -> Result<TorusGrid2> {
        TorusGrid2::new(self.n_x, self.n_y)
    }

    /// Slab grid.
    pub fn slab(&self) -> Result<SlabGrid3> {
        SlabGrid3::new(self.torus()?, self.n_z, self.l)
    }

    /// z-operators for the slab grid.
    pub fn zops(&self) -> Result<ZOps> {
        ZOps::new(self.slab()?, self.n_s, self.n_quad_z)
    }

    /// Parses `key=value` lines; blank lines and `#` comments are skipped,
    /// missing keys keep their defaults, unknown keys are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                MhsError::InvalidConfig(format!("line {}: expected key=value", lineno + 1))
            })?;
            c.set(key.trim(), value.trim())
                .map_err(|e| MhsError::InvalidConfig(format!("line {}: {e}", lineno + 1)))?;
        }
        c.validate()?;
        Ok(c)
    }

    /// Reads and parses a config file.
    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Sets one field from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn int(v: &str) -> std::result::Result<usize, String> {
            v.parse().map_err(|e| format!("{v:?}: {e}"))
        }
        fn real(v: &str) -> std::result::Result<f64, String> {
            v.parse().map_err(|e| format!("{v:?}: {e}"))
        }
        match key {
            "n_x" => self.n_x = int(value)?,
            "n_y" => self.n_y = int(value)?,
            "n_z" => self.n_z = int(value)?,
            "L" => self.l = real(value)?,
            "n_s" => self.n_s = int(value)?,
            "n_quad_z" => self.n_quad_z = int(value)?,
            "fp_tol" => self.fp_tol = real(value)?,
            "j0_tol" => self.j0_tol = real(value)?,
            "flow_tol" => self.flow_tol = real(value)?,
            "max_outer" => self.max_outer = int(value)?,
            "max_neumann" => self.max_neumann = int(value)?,
            "max_newton" => self.max_newton = int(value)?,
            "M_max" => self.m_max = real(value)?,
            "damping" => self.damping = real(value)?,
            "alpha" => self.alpha = real(value)?,
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    /// Serializes to the `key=value` form accepted by [`SolverConfig::parse`].
    pub fn to_text(&self) -> String {
        format!(
            "n_x={}\nn_y={}\nn_z={}\nL={:?}\nn_s={}\nn_quad_z={}\nfp_tol={:?}\nj0_tol={:?}\nflow_tol={:?}\nmax_outer={}\nmax_neumann={}\nmax_newton={}\nM_max={:?}\ndamping={:?}\nalpha={:?}\n",
            self.n_x,
            self.n_y,
            self.n_z,
            self.l,
            self.n_s,
            self.n_quad_z,
            self.fp_tol,
            self.j0_tol,
            self.flow_tol,
            self.max_outer,
            self.max_neumann,
            self.max_newton,
            self.m_max,
            self.damping,
            self.alpha
        )
    }
}
