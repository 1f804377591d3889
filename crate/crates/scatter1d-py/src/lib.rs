//! Python module `scatter1d`.

use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use scatter1d::approx_engines::{self, InverseWindow, ReflectionSide};
use scatter1d::exact_solvers;
use scatter1d::inverse_design::{self, BlockOptions, DesignOptions, DesignSpec, GapPolicy};
use scatter1d::numeric_engines::{self, Solver};
use scatter1d::schema;
use scatter1d::spectral_scan::{self, ScanOptions};
use scatter1d::transfer_core::{self, DEFAULT_ZERO_TOL};
use scatter1d::{Mat2, ScatterError, C64};

create_exception!(scatter1d, ScatterFailure, PyValueError, "Base class for scatter1d errors.");
create_exception!(scatter1d, SpectralSingularityError, ScatterFailure, "Amplitudes diverge at this wavenumber.");
create_exception!(scatter1d, VerificationError, ScatterFailure, "A design failed its forward check.");

fn err(e: ScatterError) -> PyErr {
    match e {
        ScatterError::SpectralSingularity { .. } => SpectralSingularityError::new_err(e.to_string()),
        ScatterError::VerificationFailure(_) => VerificationError::new_err(e.to_string()),
        other => ScatterFailure::new_err(other.to_string()),
    }
}

fn solver(name: &str) -> PyResult<Solver> {
    name.parse().map_err(err)
}

/// A finite-range potential.
#[pyclass(name = "Potential", module = "scatter1d", frozen, from_py_object)]
#[derive(Clone)]
struct PyPotential(scatter1d::Potential);

#[pymethods]
impl PyPotential {
    #[staticmethod]
    fn zero() -> Self {
        PyPotential(scatter1d::Potential::zero())
    }

    #[staticmethod]
    #[pyo3(signature = (strength, location = 0.0))]
    fn delta(strength: C64, location: f64) -> PyResult<Self> {
        scatter1d::Potential::delta(strength, location).map(PyPotential).map_err(err)
    }

    /// Terms as `(strength, location)` pairs with strictly increasing locations.
    #[staticmethod]
    fn delta_comb(terms: Vec<(C64, f64)>) -> PyResult<Self> {
        scatter1d::Potential::delta_comb(terms).map(PyPotential).map_err(err)
    }

    #[staticmethod]
    fn barrier(height: C64, a_minus: f64, a_plus: f64) -> PyResult<Self> {
        scatter1d::Potential::barrier(height, a_minus, a_plus).map(PyPotential).map_err(err)
    }

    #[staticmethod]
    fn piecewise(breakpoints: Vec<f64>, values: Vec<C64>) -> PyResult<Self> {
        scatter1d::Potential::piecewise(breakpoints, values).map(PyPotential).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (strength, harmonic, length, offset = 0.0))]
    fn exp_grating(strength: C64, harmonic: u32, length: f64, offset: f64) -> PyResult<Self> {
        scatter1d::Potential::exp_grating(strength, harmonic, length, offset).map(PyPotential).map_err(err)
    }

    #[staticmethod]
    fn fourier_cell(length: f64, coefficients: Vec<(i32, C64)>) -> PyResult<Self> {
        scatter1d::Potential::fourier_cell(length, coefficients).map(PyPotential).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (k0, alpha, winding, shift = 0.0, conjugated = false))]
    fn smis(k0: f64, alpha: f64, winding: u32, shift: f64, conjugated: bool) -> PyResult<Self> {
        scatter1d::Potential::smis(k0, alpha, winding, shift, conjugated).map(PyPotential).map_err(err)
    }

    /// Uniform samples starting at `x0` with spacing `dx`, linearly interpolated.
    #[staticmethod]
    fn sampled(x0: f64, dx: f64, values: Vec<C64>) -> PyResult<Self> {
        scatter1d::potentials::Sampled::new(x0, dx, values)
            .map(|s| PyPotential(scatter1d::Potential::Sampled(s)))
            .map_err(err)
    }

    #[staticmethod]
    fn sum(terms: Vec<PyPotential>) -> Self {
        PyPotential(scatter1d::Potential::Sum(terms.into_iter().map(|p| p.0).collect()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        schema::potential_from_json(text).map(PyPotential).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        schema::potential_to_json(&self.0).map_err(err)
    }

    fn translated(&self, shift: f64) -> Self {
        PyPotential(self.0.clone().translated(shift))
    }

    fn time_reversed(&self) -> Self {
        PyPotential(self.0.clone().time_reversed())
    }

    /// Smooth part at `x`; delta terms are listed by `delta_terms`.
    fn __call__(&self, x: f64) -> C64 {
        self.0.evaluate(x)
    }

    fn delta_terms(&self) -> Vec<(C64, f64)> {
        self.0.delta_terms()
    }

    fn support(&self) -> (f64, f64) {
        self.0.support()
    }

    fn fourier_transform(&self, kappa: f64) -> PyResult<C64> {
        self.0.fourier_transform(kappa).map_err(err)
    }

    fn double_fourier(&self, k1: f64, k2: f64) -> PyResult<C64> {
        self.0.double_fourier(k1, k2).map_err(err)
    }

    fn is_real(&self) -> bool {
        self.0.is_real()
    }

    fn __repr__(&self) -> String {
        let (a, b) = self.0.support();
        format!("Potential(support=[{a}, {b}])")
    }
}

/// Reflection and transmission amplitudes at one wavenumber.
#[pyclass(name = "ScatteringData", module = "scatter1d", frozen, from_py_object)]
#[derive(Clone)]
struct PyScatteringData(transfer_core::ScatteringData);

#[pymethods]
impl PyScatteringData {
    #[new]
    fn new(r_left: C64, r_right: C64, t: C64, k: f64) -> Self {
        PyScatteringData(transfer_core::ScatteringData::new(r_left, r_right, t, k))
    }
    #[getter]
    fn r_left(&self) -> C64 {
        self.0.r_left
    }
    #[getter]
    fn r_right(&self) -> C64 {
        self.0.r_right
    }
    #[getter]
    fn t(&self) -> C64 {
        self.0.t
    }
    #[getter]
    fn k(&self) -> f64 {
        self.0.k
    }
    fn to_matrix(&self) -> PyResult<PyTransferMatrix> {
        transfer_core::matrix_from_amplitudes(&self.0).map(PyTransferMatrix).map_err(err)
    }
    /// Max absolute difference of the three amplitudes.
    fn distance(&self, other: &PyScatteringData) -> f64 {
        self.0.distance(&other.0)
    }
    fn __repr__(&self) -> String {
        format!("ScatteringData(r_left={}, r_right={}, t={}, k={})", self.0.r_left, self.0.r_right, self.0.t, self.0.k)
    }
}

/// A 2×2 transfer matrix at a fixed wavenumber.
#[pyclass(name = "TransferMatrix", module = "scatter1d", frozen, from_py_object)]
#[derive(Clone)]
struct PyTransferMatrix(transfer_core::TransferMatrix);

#[pymethods]
impl PyTransferMatrix {
    #[new]
    fn new(rows: [[C64; 2]; 2], k: f64) -> PyResult<Self> {
        transfer_core::TransferMatrix::new(Mat2(rows), k).map(PyTransferMatrix).map_err(err)
    }
    #[staticmethod]
    fn identity(k: f64) -> PyResult<Self> {
        transfer_core::TransferMatrix::identity(k).map(PyTransferMatrix).map_err(err)
    }
    #[getter]
    fn k(&self) -> f64 {
        self.0.k()
    }
    #[getter]
    fn m11(&self) -> C64 {
        self.0.m11()
    }
    #[getter]
    fn m12(&self) -> C64 {
        self.0.m12()
    }
    #[getter]
    fn m21(&self) -> C64 {
        self.0.m21()
    }
    #[getter]
    fn m22(&self) -> C64 {
        self.0.m22()
    }
    fn to_list(&self) -> [[C64; 2]; 2] {
        self.0.matrix().0
    }
    fn det(&self) -> C64 {
        self.0.det()
    }
    /// Raises `SpectralSingularityError` when `M22` vanishes.
    fn amplitudes(&self) -> PyResult<PyScatteringData> {
        transfer_core::amplitudes_from_matrix(&self.0).map(PyScatteringData).map_err(err)
    }
    /// `self` applied after `left` (spatially to its right).
    fn compose(&self, left: &PyTransferMatrix) -> PyResult<Self> {
        transfer_core::compose(&self.0, &left.0).map(PyTransferMatrix).map_err(err)
    }
    fn translated(&self, a: f64) -> Self {
        PyTransferMatrix(transfer_core::translate_matrix(&self.0, a))
    }
    fn time_reversed(&self) -> Self {
        PyTransferMatrix(transfer_core::time_reverse_matrix(&self.0))
    }
    #[pyo3(signature = (zero_tol = DEFAULT_ZERO_TOL))]
    fn classify(&self, zero_tol: f64) -> Vec<&'static str> {
        transfer_core::classify(&self.0, zero_tol).labels()
    }
    fn __repr__(&self) -> String {
        format!("TransferMatrix([[{}, {}], [{}, {}]], k={})", self.0.m11(), self.0.m12(), self.0.m21(), self.0.m22(), self.0.k())
    }
}

/// Transfer matrix with `solver` in {"auto", "exact", "dynamical"}.
#[pyfunction]
#[pyo3(signature = (potential, k, solver = "auto", tol = 1e-10))]
fn transfer_matrix(py: Python<'_>, potential: &PyPotential, k: f64, solver: &str, tol: f64) -> PyResult<PyTransferMatrix> {
    let s = self::solver(solver)?;
    let p = &potential.0;
    py.detach(|| numeric_engines::transfer_matrix(p, k, s, tol)).map(PyTransferMatrix).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (potential, k, tol = 1e-10))]
fn ls_amplitudes(py: Python<'_>, potential: &PyPotential, k: f64, tol: f64) -> PyResult<PyScatteringData> {
    let p = &potential.0;
    py.detach(|| numeric_engines::ls_amplitudes(p, k, tol)).map(PyScatteringData).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (potential, k, tol = 1e-10))]
fn s_curve_solve(py: Python<'_>, potential: &PyPotential, k: f64, tol: f64) -> PyResult<PyScatteringData> {
    let p = &potential.0;
    py.detach(|| numeric_engines::s_curve_solve(p, k, tol)).map(|(d, _)| PyScatteringData(d)).map_err(err)
}

#[pyfunction]
fn born_first(potential: &PyPotential, k: f64) -> PyResult<PyScatteringData> {
    approx_engines::born_first(&potential.0, k).map(PyScatteringData).map_err(err)
}

/// Dyson truncation of order 1 or 2: `(matrix, amplitudes)`.
#[pyfunction]
#[pyo3(signature = (potential, k, order = 2))]
fn dyson(potential: &PyPotential, k: f64, order: u8) -> PyResult<(PyTransferMatrix, PyScatteringData)> {
    let r = match order {
        1 => approx_engines::dyson_order1(&potential.0, k),
        2 => approx_engines::dyson_order2(&potential.0, k),
        _ => return Err(ScatterFailure::new_err(format!("order must be 1 or 2, got {order}"))),
    }
    .map_err(err)?;
    Ok((PyTransferMatrix(r.matrix), PyScatteringData(r.data)))
}

/// First-Born inversion of two-sided reflection samples `[(k, R), ...]`.
#[pyfunction]
#[pyo3(signature = (samples, side = "right", x_min = None, x_max = None, points = 4096))]
fn born_inverse(
    samples: Vec<(f64, C64)>,
    side: &str,
    x_min: Option<f64>,
    x_max: Option<f64>,
    points: usize,
) -> PyResult<PyPotential> {
    let side = match side {
        "left" => ReflectionSide::Left,
        "right" => ReflectionSide::Right,
        other => return Err(ScatterFailure::new_err(format!("side must be 'left' or 'right', got '{other}'"))),
    };
    let k_max = samples.iter().map(|s| s.0.abs()).fold(0.0, f64::max);
    let d = InverseWindow::default_for(k_max);
    let window = InverseWindow { x_min: x_min.unwrap_or(d.x_min), x_max: x_max.unwrap_or(d.x_max), points };
    approx_engines::born_inverse(&samples, side, window).map(PyPotential).map_err(err)
}

/// `L^n` for a unit-determinant 2×2 matrix.
#[pyfunction]
fn unimodular_power(rows: [[C64; 2]; 2], n: u64) -> PyResult<[[C64; 2]; 2]> {
    exact_solvers::unimodular_power(&Mat2(rows), n).map(|m| m.0).map_err(err)
}

/// Grid scan; returns `(k_grid, singular_points)` with each point as `(entry, k, residual, labels)`.
#[pyfunction]
#[pyo3(signature = (potential, k_min, k_max, points, solver = "auto", tol = 1e-8))]
fn scan(
    py: Python<'_>,
    potential: &PyPotential,
    k_min: f64,
    k_max: f64,
    points: usize,
    solver: &str,
    tol: f64,
) -> PyResult<(Vec<f64>, Vec<(String, f64, f64, Vec<&'static str>)>)> {
    let opts = ScanOptions { solver: self::solver(solver)?, tol, ..Default::default() };
    let p = &potential.0;
    let res = py.detach(|| spectral_scan::scan(p, k_min, k_max, points, opts)).map_err(err)?;
    let zeros = res
        .singular_points
        .iter()
        .map(|z| (format!("{:?}", z.entry), z.k, z.residual, z.classification.labels()))
        .collect();
    Ok((res.k_grid, zeros))
}

/// Single-mode design: `(potential, case, matrix_residual)`.
#[pyfunction]
#[pyo3(signature = (k0, r_left, r_right, t, winding = None, verify_tol = inverse_design::DEFAULT_VERIFY_TOL))]
fn design(
    py: Python<'_>,
    k0: f64,
    r_left: C64,
    r_right: C64,
    t: C64,
    winding: Option<u32>,
    verify_tol: f64,
) -> PyResult<(PyPotential, u8, f64)> {
    let spec = DesignSpec::new(k0, r_left, r_right, t).map_err(err)?;
    let opts = DesignOptions { block: BlockOptions { winding, verify_tol, ..Default::default() } };
    let d = py.detach(|| inverse_design::solve_single_mode(&spec, &GapPolicy::default(), opts)).map_err(err)?;
    Ok((PyPotential(d.potential), d.factorization.case, d.matrix_residual))
}

#[pymodule]
#[pyo3(name = "scatter1d")]
fn py_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPotential>()?;
    m.add_class::<PyTransferMatrix>()?;
    m.add_class::<PyScatteringData>()?;
    m.add("ScatterFailure", m.py().get_type::<ScatterFailure>())?;
    m.add("SpectralSingularityError", m.py().get_type::<SpectralSingularityError>())?;
    m.add("VerificationError", m.py().get_type::<VerificationError>())?;
    m.add_function(wrap_pyfunction!(transfer_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(ls_amplitudes, m)?)?;
    m.add_function(wrap_pyfunction!(s_curve_solve, m)?)?;
    m.add_function(wrap_pyfunction!(born_first, m)?)?;
    m.add_function(wrap_pyfunction!(dyson, m)?)?;
    m.add_function(wrap_pyfunction!(born_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(unimodular_power, m)?)?;
    m.add_function(wrap_pyfunction!(scan, m)?)?;
    m.add_function(wrap_pyfunction!(design, m)?)?;
    m.add("SCHEMA_VERSION", schema::SCHEMA_VERSION)?;
    Ok(())
}
