//! Python bindings: fiber spectra, frames, effective and full spectra, and
//! the experiment harness.

use std::path::PathBuf;
use std::str::FromStr;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use wgspec::curve::{build_parallel_frame, CurveModel, FrameField};
use wgspec::effective::{assemble, Variant};
use wgspec::fiber::{self, FiberShape};
use wgspec::harness::{self, ExperimentConfig, Prepared};
use wgspec::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::InvalidInput(_) | Error::Parse(_) | Error::Json(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Transverse spectrum and moments of one cross-section.
#[pyclass(name = "VerticalSpectrum", module = "wgspec", frozen)]
struct PyVertical(fiber::VerticalSpectrum);

#[pymethods]
impl PyVertical {
    /// Unit-disk data from Bessel zeros, scaled to `radius`.
    #[staticmethod]
    #[pyo3(signature = (radius = 1.0))]
    fn disk(radius: f64) -> Self {
        PyVertical(fiber::solve_vertical_disk(radius))
    }

    /// Unit circle (hollow tube).
    #[staticmethod]
    fn circle() -> Self {
        PyVertical(fiber::solve_vertical_circle())
    }

    /// Grid solve on a disk, square or annulus.
    #[staticmethod]
    #[pyo3(signature = (shape, h, n_modes = 4, radius = 1.0, side = 1.0, center = (0.0, 0.0), r_in = 0.5, r_out = 1.0))]
    #[allow(clippy::too_many_arguments)]
    fn grid(
        py: Python<'_>,
        shape: &str,
        h: f64,
        n_modes: usize,
        radius: f64,
        side: f64,
        center: (f64, f64),
        r_in: f64,
        r_out: f64,
    ) -> PyResult<Self> {
        let shape = match shape {
            "disk" => FiberShape::Disk { radius },
            "square" => FiberShape::Square { side, center: [center.0, center.1] },
            "annulus" => FiberShape::Annulus { r_in, r_out },
            other => return Err(PyValueError::new_err(format!("unknown shape {other:?}"))),
        };
        py.detach(|| fiber::solve_vertical_grid(&shape, h, n_modes)).map(PyVertical).map_err(err)
    }

    #[getter]
    fn eigenvalues(&self) -> Vec<f64> {
        self.0.eigenvalues.clone()
    }

    #[getter]
    fn lambda0(&self) -> f64 {
        self.0.lambda0()
    }

    #[getter]
    fn mean_y(&self) -> (f64, f64) {
        (self.0.mean_y[0], self.0.mean_y[1])
    }

    /// Mean of `|y|^2` in the ground state.
    #[getter]
    fn mean_ysq(&self) -> f64 {
        self.0.mean_ysq
    }

    #[getter]
    fn mean_l(&self) -> f64 {
        self.0.mean_l
    }

    #[getter]
    fn hollow(&self) -> bool {
        self.0.hollow
    }

    /// Second-order field correction of the ground energy.
    #[pyo3(signature = (b_par, scale = 1.0))]
    fn lambda02(&self, b_par: f64, scale: f64) -> PyResult<f64> {
        fiber::lambda02(&self.0, b_par, scale).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "VerticalSpectrum(lambda0={:.6}, mean_ysq={:.6}, modes={})",
            self.0.lambda0(),
            self.0.mean_ysq,
            self.0.eigenvalues.len()
        )
    }
}

/// Parallel-transport frame along a named curve.
#[pyclass(name = "Frame", module = "wgspec", frozen)]
struct PyFrame(FrameField);

#[pymethods]
impl PyFrame {
    /// `name` is one of `line`, `circle(R)`, `helix(a,b)`, `bump_curve(k0,w)`.
    #[new]
    #[pyo3(signature = (name, x_min = 0.0, x_max = 1.0, points = 4096))]
    fn new(py: Python<'_>, name: &str, x_min: f64, x_max: f64, points: usize) -> PyResult<Self> {
        let cfg = ExperimentConfig::from_json(
            &serde_json::json!({
                "curve": {"name": name, "x_min": x_min, "x_max": x_max, "frame_points": points},
                "fiber": {"kind": "disk"},
                "variants": [],
                "epsilons": [0.1],
                "C": 1.0,
                "grid": {"n_x": 16}
            })
            .to_string(),
        )
        .map_err(err)?;
        let curve: CurveModel = cfg.curve_model().map_err(err)?;
        py.detach(|| build_parallel_frame(&curve, points, None)).map(PyFrame).map_err(err)
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.0.grid.clone()
    }

    #[getter]
    fn kappa1(&self) -> Vec<f64> {
        self.0.kappa1.clone()
    }

    #[getter]
    fn kappa2(&self) -> Vec<f64> {
        self.0.kappa2.clone()
    }

    /// Rotation of the frame after one loop, or `None` for open curves.
    #[getter]
    fn holonomy_angle(&self) -> Option<f64> {
        self.0.holonomy_angle
    }

    fn orthonormality_defect(&self) -> f64 {
        self.0.orthonormality_defect()
    }

    /// `(tau, e1, e2)` at arc length `x`.
    fn at(&self, x: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
        let f = self.0.at(x);
        (f.tau, f.e1, f.e2)
    }
}

/// A parsed experiment configuration with its prepared geometry.
#[pyclass(name = "Experiment", module = "wgspec", frozen)]
struct PyExperiment {
    cfg: ExperimentConfig,
    prepared: Prepared,
}

impl PyExperiment {
    fn build(cfg: ExperimentConfig) -> PyResult<Self> {
        let prepared = Prepared::new(&cfg).map_err(err)?;
        Ok(PyExperiment { cfg, prepared })
    }

    fn variant(name: &str) -> PyResult<Variant> {
        Variant::from_str(name).map_err(err)
    }
}

#[pymethods]
impl PyExperiment {
    #[new]
    fn new(json: &str) -> PyResult<Self> {
        Self::build(ExperimentConfig::from_json(json).map_err(err)?)
    }

    /// Load a config file; relative paths inside it resolve against its directory.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Self::build(ExperimentConfig::load(&path).map_err(err)?)
    }

    #[getter]
    fn hash(&self) -> String {
        self.cfg.hash()
    }

    #[getter]
    fn epsilons(&self) -> Vec<f64> {
        self.cfg.epsilons.clone()
    }

    #[getter]
    fn vertical(&self) -> PyVertical {
        PyVertical(self.prepared.vertical.clone())
    }

    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &harness::validate_config(&self.cfg))
    }

    /// Run the sweep; returns the summary record and optionally writes CSV/JSON output.
    #[pyo3(signature = (threads = None, out_dir = None))]
    fn run<'py>(&self, py: Python<'py>, threads: Option<usize>, out_dir: Option<PathBuf>) -> PyResult<Bound<'py, PyAny>> {
        let rec = py.detach(|| harness::run_experiment(&self.cfg, threads)).map_err(err)?;
        if let Some(dir) = out_dir {
            harness::write_outputs(&self.cfg, &rec, &dir).map_err(err)?;
        }
        to_py(py, &rec)
    }

    /// Raw and rescaled eigenvalues of one effective variant.
    fn effective_spectrum(&self, py: Python<'_>, variant: &str, eps: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let v = Self::variant(variant)?;
        let s = py.detach(|| self.prepared.effective_spectrum(&self.cfg, v, eps)).map_err(err)?;
        Ok((s.raw, s.rescaled))
    }

    /// Raw and rescaled eigenvalues of the full discretized operator.
    fn full_spectrum(&self, py: Python<'_>, eps: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let n = self.cfg.grid.n_eigs;
        let s = py
            .detach(|| {
                let op = self.prepared.full_operator(&self.cfg, eps)?;
                op.spectrum(n, &wgspec::eigen::EigenOptions { seed: self.cfg.seed, ..Default::default() })
            })
            .map_err(err)?;
        Ok((s.raw, s.rescaled))
    }

    /// Coefficients of one effective operator on the base grid.
    fn effective_operator<'py>(&self, py: Python<'py>, variant: &str, eps: f64) -> PyResult<Bound<'py, PyDict>> {
        let op = assemble(Self::variant(variant)?, &self.prepared.input(eps)).map_err(err)?;
        let d = PyDict::new(py);
        d.set_item("x", op.grid.x.clone())?;
        d.set_item("metric", op.metric.clone())?;
        d.set_item("potential", op.potential.clone())?;
        d.set_item("link_phase", op.link_phase.clone())?;
        d.set_item("kinetic_scale", op.kinetic_scale)?;
        d.set_item("energy_offset", op.energy_offset)?;
        d.set_item("rescaled", op.rescaled)?;
        Ok(d)
    }

    fn oracle_lambda02<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let rep = py.detach(|| harness::oracle_lambda02(&self.cfg)).map_err(err)?;
        to_py(py, &rep)
    }

    /// Write the operator as Matrix Market plus a coefficient table; returns both paths.
    fn dump_operator(&self, variant: &str, eps: f64, out_dir: PathBuf) -> PyResult<(PathBuf, PathBuf)> {
        let f = harness::dump_operator(&self.cfg, variant, eps, &out_dir).map_err(err)?;
        Ok((f.matrix, f.table))
    }
}

#[pyfunction]
fn bessel_zeros(n: u32, count: usize) -> Vec<f64> {
    fiber::bessel_zeros(n, count)
}

#[pymodule]
#[pyo3(name = "wgspec")]
fn wgspec_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyVertical>()?;
    m.add_class::<PyFrame>()?;
    m.add_class::<PyExperiment>()?;
    m.add_function(wrap_pyfunction!(bessel_zeros, m)?)?;
    m.add("VARIANTS", ["nonmagnetic", "moderate", "rigid_moderate", "strong_alpha0", "rigid_strong", "hollow_strong"])?;
    Ok(())
}
