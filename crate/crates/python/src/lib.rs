//! Python bindings. Propagators and coupled systems work in atomic units;
//! configs, spectra and CSV output use cm⁻¹ and Å like the command line.

use curve_crossing::cli::format_csv;
use curve_crossing::config::RunConfig;
use curve_crossing::coupled::{CoupledSystem, FactorizedSystem, SiteClosure};
use curve_crossing::green0::{ChannelPropagator, ComplexEnergy};
use curve_crossing::model::{DeltaCoupling, HarmonicChannel};
use curve_crossing::spectra::{PointResult, Spectrometer, SpectrumResult};
use curve_crossing::units;
use curve_crossing::validation::{validate as run_validation, ValidationPlan};
use num_complex::Complex64 as C64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_error(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn energy(z: C64) -> PyResult<ComplexEnergy> {
    ComplexEnergy::new(z.re, z.im).map_err(value_error)
}

/// Run configuration, as read by `curve-crossing run`.
#[pyclass(name = "RunConfig", from_py_object)]
#[derive(Clone)]
struct PyRunConfig {
    inner: RunConfig,
}

#[pymethods]
impl PyRunConfig {
    /// The bundled default configuration.
    #[staticmethod]
    fn paper() -> Self {
        Self { inner: RunConfig::paper() }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        RunConfig::from_json(text).map(|inner| Self { inner }).map_err(value_error)
    }

    /// JSON text with every default written out.
    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn damping_cm1(&self) -> f64 {
        self.inner.damping_cm1
    }

    #[getter]
    fn coupling_k0_cm1(&self) -> f64 {
        self.inner.coupling.k0_cm1
    }

    #[getter]
    fn grid(&self) -> (f64, f64, usize) {
        let g = &self.inner.grid;
        (g.min_cm1, g.max_cm1, g.points)
    }

    /// Copy with selected fields replaced; validated like a parsed file.
    #[pyo3(signature = (*, k0_cm1=None, damping_cm1=None, grid=None, quadrature_points=None))]
    fn replace(
        &self,
        k0_cm1: Option<f64>,
        damping_cm1: Option<f64>,
        grid: Option<(f64, f64, usize)>,
        quadrature_points: Option<usize>,
    ) -> PyResult<Self> {
        let mut cfg = self.inner.clone();
        if let Some(k) = k0_cm1 {
            cfg.coupling.k0_cm1 = k;
        }
        if let Some(d) = damping_cm1 {
            cfg.damping_cm1 = d;
        }
        if let Some((min, max, points)) = grid {
            cfg.grid.min_cm1 = min;
            cfg.grid.max_cm1 = max;
            cfg.grid.points = points;
        }
        if let Some(n) = quadrature_points {
            cfg.coupling.quadrature.n = n;
        }
        Self::from_json(&cfg.to_json())
    }

    fn __repr__(&self) -> String {
        format!("RunConfig(K0_cm1={}, damping_cm1={})", self.inner.coupling.k0_cm1, self.inner.damping_cm1)
    }
}

/// Harmonic potential V(x) = origin + ½mω²(x − x_min)², atomic units.
#[pyclass(name = "HarmonicChannel", from_py_object)]
#[derive(Clone)]
struct PyHarmonicChannel {
    inner: HarmonicChannel,
}

#[pymethods]
impl PyHarmonicChannel {
    #[new]
    fn new(mass: f64, omega: f64, x_min: f64, origin: f64) -> PyResult<Self> {
        HarmonicChannel::new(mass, omega, x_min, origin).map(|inner| Self { inner }).map_err(value_error)
    }

    /// Build from amu, cm⁻¹, Å and cm⁻¹.
    #[staticmethod]
    fn from_spectroscopic(mass_amu: f64, omega_cm1: f64, x_min_angstrom: f64, origin_cm1: f64) -> PyResult<Self> {
        HarmonicChannel::from_spectroscopic(mass_amu, omega_cm1, x_min_angstrom, origin_cm1)
            .map(|inner| Self { inner })
            .map_err(value_error)
    }

    fn eigenvalue(&self, n: usize) -> f64 {
        self.inner.eigenvalue(n)
    }

    fn potential(&self, x: f64) -> f64 {
        self.inner.potential(x)
    }

    #[getter]
    fn mass(&self) -> f64 {
        self.inner.mass()
    }

    #[getter]
    fn omega(&self) -> f64 {
        self.inner.omega()
    }

    #[getter]
    fn x_min(&self) -> f64 {
        self.inner.x_min()
    }

    #[getter]
    fn origin(&self) -> f64 {
        self.inner.origin()
    }
}

/// Exact single-channel Green's function G⁰(x, x₀; z).
#[pyclass(name = "ChannelPropagator")]
struct PyChannelPropagator {
    inner: ChannelPropagator,
}

#[pymethods]
impl PyChannelPropagator {
    #[new]
    fn new(channel: PyHarmonicChannel) -> Self {
        Self { inner: ChannelPropagator::new(channel.inner) }
    }

    fn green(&self, x: f64, x0: f64, z: C64) -> PyResult<C64> {
        self.inner.green(x, x0, energy(z)?).map(|g| g.value).map_err(runtime_error)
    }

    /// ⟨bra|G⁰(z)|ket⟩ for states given by eigenfunction coefficients.
    fn matrix_element(&self, bra: Vec<f64>, ket: Vec<f64>, z: C64) -> PyResult<C64> {
        self.inner.matrix_element(&bra, &ket, energy(z)?).map(|g| g.value).map_err(runtime_error)
    }
}

/// Two channels coupled by delta sites, atomic units.
#[pyclass(name = "CoupledSystem")]
struct PyCoupledSystem {
    inner: CoupledSystem,
}

#[pymethods]
impl PyCoupledSystem {
    #[new]
    #[pyo3(signature = (channel1, channel2, positions, strengths, closure="full"))]
    fn new(
        channel1: PyHarmonicChannel,
        channel2: PyHarmonicChannel,
        positions: Vec<f64>,
        strengths: Vec<f64>,
        closure: &str,
    ) -> PyResult<Self> {
        let closure = match closure {
            "full" => SiteClosure::Full,
            "diagonal" => SiteClosure::Diagonal,
            other => return Err(value_error(format!("unknown closure `{other}` (expected full or diagonal)"))),
        };
        let coupling = DeltaCoupling::from_parts(&positions, &strengths).map_err(value_error)?;
        let inner = CoupledSystem::new(
            ChannelPropagator::new(channel1.inner),
            ChannelPropagator::new(channel2.inner),
            coupling,
        )
        .with_closure(closure);
        Ok(Self { inner })
    }

    /// Factorize at z; the result evaluates every block cheaply.
    fn at(&self, z: C64) -> PyResult<PyFactorizedSystem> {
        self.inner.factorize(energy(z)?).map(|inner| PyFactorizedSystem { inner }).map_err(runtime_error)
    }

    /// G_ab(x, x₀; z) with channel indices a, b ∈ {1, 2}.
    fn green(&self, a: usize, b: usize, x: f64, x0: f64, z: C64) -> PyResult<C64> {
        self.at(z)?.green(a, b, x, x0)
    }
}

#[pyclass(name = "FactorizedSystem")]
struct PyFactorizedSystem {
    inner: FactorizedSystem,
}

#[pymethods]
impl PyFactorizedSystem {
    fn green(&self, a: usize, b: usize, x: f64, x0: f64) -> PyResult<C64> {
        if !(1..=2).contains(&a) || !(1..=2).contains(&b) {
            return Err(value_error("channel indices must be 1 or 2"));
        }
        self.inner.kernel(a - 1, b - 1, x, x0).map_err(runtime_error)
    }

    fn g11(&self, x: f64, x0: f64) -> PyResult<C64> {
        self.green(1, 1, x, x0)
    }

    fn g12(&self, x: f64, x0: f64) -> PyResult<C64> {
        self.green(1, 2, x, x0)
    }

    fn g21(&self, x: f64, x0: f64) -> PyResult<C64> {
        self.green(2, 1, x, x0)
    }

    fn g22(&self, x: f64, x0: f64) -> PyResult<C64> {
        self.green(2, 2, x, x0)
    }

    fn matrix_element_g11(&self, bra: Vec<f64>, ket: Vec<f64>) -> PyResult<C64> {
        self.inner.matrix_element_g11(&bra, &ket).map_err(runtime_error)
    }

    /// Condition number of the site system for channel a.
    fn condition(&self, a: usize) -> PyResult<f64> {
        match a {
            1 | 2 => Ok(self.inner.condition(a - 1)),
            _ => Err(value_error("channel index must be 1 or 2")),
        }
    }
}

/// Absorption and Raman spectra for one config; energies in cm⁻¹.
#[pyclass(name = "Spectrometer")]
struct PySpectrometer {
    inner: Spectrometer,
}

fn point_dict<'py>(py: Python<'py>, p: &PointResult) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let d = pyo3::types::PyDict::new(py);
    d.set_item("energy_cm1", units::to_cm1(p.energy))?;
    d.set_item("status", p.status.tag())?;
    d.set_item("absorption_amplitude", p.absorption_amplitude)?;
    d.set_item("raman_amplitude", p.raman_amplitude)?;
    d.set_item("abs_coupled", p.abs_coupled())?;
    d.set_item("abs_uncoupled", p.abs_uncoupled())?;
    d.set_item("raman_coupled", p.raman_coupled())?;
    d.set_item("raman_uncoupled", p.raman_uncoupled())?;
    Ok(d)
}

#[pymethods]
impl PySpectrometer {
    #[new]
    fn new(config: PyRunConfig) -> PyResult<Self> {
        let spectroscopy = config.inner.spectroscopy().map_err(value_error)?;
        Spectrometer::new(spectroscopy).map(|inner| Self { inner }).map_err(value_error)
    }

    fn absorption(&self, energy_cm1: f64) -> PyResult<f64> {
        self.inner.absorption_intensity(units::cm1(energy_cm1)).map_err(runtime_error)
    }

    fn raman(&self, energy_cm1: f64) -> PyResult<f64> {
        self.inner.raman_intensity(units::cm1(energy_cm1)).map_err(runtime_error)
    }

    /// Amplitudes and intensities at one photon energy.
    fn point<'py>(&self, py: Python<'py>, energy_cm1: f64) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
        let p = self.inner.point(units::cm1(energy_cm1)).map_err(runtime_error)?;
        point_dict(py, &p)
    }

    #[getter]
    fn initial_coefficients(&self) -> Vec<f64> {
        self.inner.initial_coefficients().to_vec()
    }

    #[getter]
    fn final_coefficients(&self) -> Vec<f64> {
        self.inner.final_coefficients().to_vec()
    }

    #[pyo3(signature = (threads=None))]
    fn sweep(&self, py: Python<'_>, threads: Option<usize>) -> PyResult<PySpectrumResult> {
        py.detach(|| self.inner.sweep(threads)).map(|inner| PySpectrumResult { inner }).map_err(runtime_error)
    }
}

#[pyclass(name = "SpectrumResult")]
struct PySpectrumResult {
    inner: SpectrumResult,
}

#[pymethods]
impl PySpectrumResult {
    #[getter]
    fn energies_cm1(&self) -> Vec<f64> {
        self.inner.energies.iter().map(|&e| units::to_cm1(e)).collect()
    }

    #[getter]
    fn abs_coupled(&self) -> Vec<f64> {
        self.inner.abs_coupled.clone()
    }

    #[getter]
    fn abs_uncoupled(&self) -> Vec<f64> {
        self.inner.abs_uncoupled.clone()
    }

    #[getter]
    fn raman_coupled(&self) -> Vec<f64> {
        self.inner.raman_coupled.clone()
    }

    #[getter]
    fn raman_uncoupled(&self) -> Vec<f64> {
        self.inner.raman_uncoupled.clone()
    }

    #[getter]
    fn status(&self) -> Vec<&'static str> {
        self.inner.status.iter().map(|s| s.tag()).collect()
    }

    /// (D_A, D_R): integrated relative deviation of coupled from uncoupled.
    #[getter]
    fn deviation(&self) -> (f64, f64) {
        (self.inner.deviation.absorption, self.inner.deviation.raman)
    }

    #[getter]
    fn skipped(&self) -> usize {
        self.inner.skipped()
    }

    /// The CSV text `curve-crossing run` writes.
    fn to_csv(&self) -> String {
        format_csv(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.energies.len()
    }
}

/// Sweep a config's grid; shorthand for `Spectrometer(config).sweep(threads)`.
#[pyfunction]
#[pyo3(signature = (config, threads=None))]
fn sweep(py: Python<'_>, config: PyRunConfig, threads: Option<usize>) -> PyResult<PySpectrumResult> {
    PySpectrometer::new(config)?.sweep(py, threads)
}

/// Run the oracle checks; returns (passed, table).
#[pyfunction]
#[pyo3(signature = (config, strict=false))]
fn validate(py: Python<'_>, config: PyRunConfig, strict: bool) -> PyResult<(bool, String)> {
    let report = py.detach(|| run_validation(&config.inner, &ValidationPlan::default())).map_err(runtime_error)?;
    Ok((report.passed(strict), report.table(strict)))
}

#[pyfunction]
fn cm1(value: f64) -> f64 {
    units::cm1(value)
}

#[pyfunction]
fn angstrom(value: f64) -> f64 {
    units::angstrom(value)
}

#[pyfunction]
fn amu(value: f64) -> f64 {
    units::amu(value)
}

#[pyfunction]
fn to_cm1(value: f64) -> f64 {
    units::to_cm1(value)
}

#[pyfunction]
fn to_angstrom(value: f64) -> f64 {
    units::to_angstrom(value)
}

#[pymodule]
#[pyo3(name = "curve_crossing")]
fn curve_crossing_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRunConfig>()?;
    m.add_class::<PyHarmonicChannel>()?;
    m.add_class::<PyChannelPropagator>()?;
    m.add_class::<PyCoupledSystem>()?;
    m.add_class::<PyFactorizedSystem>()?;
    m.add_class::<PySpectrometer>()?;
    m.add_class::<PySpectrumResult>()?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(cm1, m)?)?;
    m.add_function(wrap_pyfunction!(angstrom, m)?)?;
    m.add_function(wrap_pyfunction!(amu, m)?)?;
    m.add_function(wrap_pyfunction!(to_cm1, m)?)?;
    m.add_function(wrap_pyfunction!(to_angstrom, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
