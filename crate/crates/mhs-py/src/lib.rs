//! Python module `mhs`: configuration, boundary data, the fixed-point solver,
//! the closed-form linearized solver and field files.

use std::path::PathBuf;

use mhs_core::boundary_data::expr::field_from_expr;
use mhs_core::cli_io::field_io::FieldFile;
use mhs_core::fixed_point;
use mhs_core::linear_oracle;
use mhs_core::{MhsError, ScalarField2, TorusGrid2, VectorField3};
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(mhs, SolverError, PyException, "Any failure reported by the solver.");
create_exception!(mhs, ValidationError, SolverError, "Invalid configuration, grid or boundary data.");
create_exception!(mhs, NonConvergenceError, SolverError, "The fixed-point iteration did not converge.");

fn to_py(e: MhsError) -> PyErr {
    let msg = e.to_string();
    match e {
        MhsError::NonConvergence { .. } => NonConvergenceError::new_err(msg),
        MhsError::InvalidGrid(_)
        | MhsError::GridMismatch(_)
        | MhsError::CompatibilityViolation { .. }
        | MhsError::SmallnessViolation { .. }
        | MhsError::InvalidConfig(_)
        | MhsError::Parse(_)
        | MhsError::Format(_) => ValidationError::new_err(msg),
        _ => SolverError::new_err(msg),
    }
}

fn volume(v: &VectorField3) -> Vec<Vec<f64>> {
    v.comps.iter().map(|c| c.values.clone()).collect()
}

/// Solver configuration; keys match the `key=value` config format.
#[pyclass(name = "SolverConfig", module = "mhs", from_py_object)]
#[derive(Clone)]
struct PySolverConfig {
    inner: mhs_core::SolverConfig,
}

#[pymethods]
impl PySolverConfig {
    /// Defaults, optionally overridden by keyword arguments such as `n_x=8`.
    #[new]
    #[pyo3(signature = (**overrides))]
    fn new(overrides: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut c = Self {
            inner: mhs_core::SolverConfig::default(),
        };
        if let Some(d) = overrides {
            for (k, v) in d.iter() {
                c.set(&k.extract::<String>()?, &v.str()?.to_string())?;
            }
        }
        c.inner.validate().map_err(to_py)?;
        Ok(c)
    }

    /// Parses `key=value` text.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: mhs_core::SolverConfig::parse(text).map_err(to_py)?,
        })
    }

    /// Sets one key from its text value.
    fn set(&mut self, key: &str, value: &str) -> PyResult<()> {
        self.inner.set(key, value).map_err(ValidationError::new_err)
    }

    /// Text form accepted by `parse`.
    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    #[getter]
    fn n_x(&self) -> usize {
        self.inner.n_x
    }

    #[getter]
    fn n_y(&self) -> usize {
        self.inner.n_y
    }

    #[getter]
    fn n_z(&self) -> usize {
        self.inner.n_z
    }

    #[getter(L)]
    fn l(&self) -> f64 {
        self.inner.l
    }

    #[getter]
    fn fp_tol(&self) -> f64 {
        self.inner.fp_tol
    }

    #[getter(M_max)]
    fn m_max(&self) -> f64 {
        self.inner.m_max
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    fn __repr__(&self) -> String {
        format!("SolverConfig({})", self.inner.to_text().trim().replace('\n', ", "))
    }
}

/// Normal data `f_minus`, `f_plus` and tangential data `g1`, `g2` on an
/// `n_x × n_y` grid, stored row-major with `x` fastest.
#[pyclass(name = "BoundaryData", module = "mhs", from_py_object)]
#[derive(Clone)]
struct PyBoundaryData {
    inner: mhs_core::BoundaryData,
}

#[pymethods]
impl PyBoundaryData {
    /// Zero data.
    #[staticmethod]
    fn zeros(n_x: usize, n_y: usize) -> PyResult<Self> {
        let g = TorusGrid2::new(n_x, n_y).map_err(to_py)?;
        Ok(Self {
            inner: mhs_core::BoundaryData::zeros(g),
        })
    }

    /// Samples expressions in `x` and `y`.
    #[staticmethod]
    fn from_expressions(n_x: usize, n_y: usize, f_minus: &str, f_plus: &str, g1: &str, g2: &str) -> PyResult<Self> {
        let g = TorusGrid2::new(n_x, n_y).map_err(to_py)?;
        let f = |e: &str| field_from_expr(e, g).map_err(to_py);
        Ok(Self {
            inner: mhs_core::BoundaryData::new(f(f_minus)?, f(f_plus)?, f(g1)?, f(g2)?).map_err(to_py)?,
        })
    }

    /// Node values given as flat lists.
    #[staticmethod]
    fn from_values(
        n_x: usize,
        n_y: usize,
        f_minus: Vec<f64>,
        f_plus: Vec<f64>,
        g1: Vec<f64>,
        g2: Vec<f64>,
    ) -> PyResult<Self> {
        let g = TorusGrid2::new(n_x, n_y).map_err(to_py)?;
        let f = |v: Vec<f64>| ScalarField2::from_values(g, v).map_err(to_py);
        Ok(Self {
            inner: mhs_core::BoundaryData::new(f(f_minus)?, f(f_plus)?, f(g1)?, f(g2)?).map_err(to_py)?,
        })
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        let g = self.inner.grid();
        (g.n_x, g.n_y)
    }

    #[getter]
    fn f_minus(&self) -> Vec<f64> {
        self.inner.f_minus.values.clone()
    }

    #[getter]
    fn f_plus(&self) -> Vec<f64> {
        self.inner.f_plus.values.clone()
    }

    #[getter]
    fn g1(&self) -> Vec<f64> {
        self.inner.g1().values.clone()
    }

    #[getter]
    fn g2(&self) -> Vec<f64> {
        self.inner.g2().values.clone()
    }

    /// Scaled copy.
    fn scaled(&self, a: f64) -> Self {
        Self {
            inner: self.inner.scaled(a),
        }
    }
}

/// Converged solution. Volume fields are lists of components, each a flat
/// list over `(layer, y, x)` with `x` fastest.
#[pyclass(name = "SolverState", module = "mhs")]
struct PySolverState {
    inner: fixed_point::SolverState,
}

fn diagnostics_dict<'py>(py: Python<'py>, d: &mhs_core::DiagnosticsReport) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    for (k, v) in d.entries() {
        out.set_item(k, v)?;
    }
    Ok(out)
}

#[pymethods]
impl PySolverState {
    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterate
    }

    /// `(J1, J2)`.
    #[getter]
    fn flux(&self) -> (f64, f64) {
        (self.inner.flux.j1, self.inner.flux.j2)
    }

    #[getter]
    fn diagnostics<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        diagnostics_dict(py, &self.inner.diagnostics)
    }

    /// Perturbation `b = B − e₃`.
    #[getter]
    fn b(&self) -> Vec<Vec<f64>> {
        volume(&self.inner.b)
    }

    #[getter]
    fn j(&self) -> Vec<Vec<f64>> {
        volume(&self.inner.j)
    }

    #[getter]
    fn j0(&self) -> Vec<Vec<f64>> {
        let c = &self.inner.j0;
        vec![c.j0_1.values.clone(), c.j0_2.values.clone(), c.j0_3.values.clone()]
    }

    #[getter]
    fn p(&self) -> Vec<f64> {
        self.inner.p.values.clone()
    }

    /// `(n_x, n_y, n_z, L)`.
    #[getter]
    fn grid(&self) -> (usize, usize, usize, f64) {
        let g = self.inner.b.grid;
        (g.base.n_x, g.base.n_y, g.n_z, g.l)
    }

    /// Recomputes the diagnostics from the stored fields.
    fn verify<'py>(
        &self,
        py: Python<'py>,
        data: &PyBoundaryData,
        config: &PySolverConfig,
    ) -> PyResult<Bound<'py, PyDict>> {
        let zops = config.inner.zops().map_err(to_py)?;
        let d = fixed_point::verify(&self.inner, &data.inner, &zops, config.inner.alpha);
        diagnostics_dict(py, &d)
    }

    /// Writes `b`, `j` and `p` as field files into `directory`.
    fn save_fields(&self, directory: PathBuf) -> PyResult<()> {
        std::fs::create_dir_all(&directory).map_err(|e| to_py(e.into()))?;
        let p = VectorField3::from_comps(vec![self.inner.p.clone()]).map_err(to_py)?;
        for (name, v) in [("b.mhsf", &self.inner.b), ("j.mhsf", &self.inner.j), ("p.mhsf", &p)] {
            FieldFile::from_volume(v).save(&directory.join(name)).map_err(to_py)?;
        }
        Ok(())
    }
}

/// Runs the fixed-point solver from `b = 0`.
#[pyfunction]
fn solve(py: Python<'_>, data: &PyBoundaryData, config: &PySolverConfig) -> PyResult<PySolverState> {
    let (d, c) = (data.inner.clone(), config.inner.clone());
    let state = py.detach(move || fixed_point::solve(&d, &c)).map_err(to_py)?;
    Ok(PySolverState { inner: state })
}

/// Closed-form solution of the linearized problem as a dict with keys
/// `b`, `j0` and `flux`.
#[pyfunction]
fn linear_solve<'py>(py: Python<'py>, data: &PyBoundaryData, config: &PySolverConfig) -> PyResult<Bound<'py, PyDict>> {
    let slab = config.inner.slab().map_err(to_py)?;
    let sol = linear_oracle::linear_solve(&data.inner, slab).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("b", volume(&sol.b))?;
    out.set_item(
        "j0",
        vec![sol.j0.j0_1.values, sol.j0.j0_2.values, sol.j0.j0_3.values],
    )?;
    out.set_item("flux", (sol.flux.j1, sol.flux.j2))?;
    Ok(out)
}

/// Reads a field file; returns `(n_x, n_y, n_z, L, components)`, with
/// `n_z = 0` for a surface field.
#[pyfunction]
fn read_field(path: PathBuf) -> PyResult<(usize, usize, usize, f64, Vec<Vec<f64>>)> {
    let f = FieldFile::load(&path).map_err(to_py)?;
    Ok((f.grid.n_x, f.grid.n_y, f.n_z, f.l, f.comps))
}

#[pymodule]
fn mhs(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySolverConfig>()?;
    m.add_class::<PyBoundaryData>()?;
    m.add_class::<PySolverState>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(linear_solve, m)?)?;
    m.add_function(wrap_pyfunction!(read_field, m)?)?;
    m.add("SolverError", m.py().get_type::<SolverError>())?;
    m.add("ValidationError", m.py().get_type::<ValidationError>())?;
    m.add("NonConvergenceError", m.py().get_type::<NonConvergenceError>())?;
    Ok(())
}
