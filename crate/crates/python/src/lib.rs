//! Python bindings: vertex sets, operators, the functional calculus, square
//! functions and the experiment registry.

use num_complex::Complex64;
use pyo3::exceptions::{PyKeyError, PyValueError};
use pyo3::prelude::*;

use ritt_calculus::calculus::{contour_calculus, CalculusSettings, HoloFunction, Polynomial};
use ritt_calculus::geometry::{StolzDomain, UnimodularVertexSet};
use ritt_calculus::harness::generator::{generate_ritt_operator, GeneratorSpec};
use ritt_calculus::harness::{self, ExperimentConfig};
use ritt_calculus::linalg::{CMat, CVec};
use ritt_calculus::operator::{classify_ritt, power_family_bound, FiniteOperator};
use ritt_calculus::rademacher::{square_function, SquareFunctionSpec};

fn err(e: ritt_calculus::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_rows(m: &CMat) -> Vec<Vec<Complex64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn from_rows(rows: Vec<Vec<Complex64>>) -> PyResult<CMat> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("expected a nonempty square matrix"));
    }
    Ok(CMat::from_fn(n, n, |i, j| rows[i][j]))
}

/// Vertices ξ_1, ..., ξ_N on the unit circle, counterclockwise.
#[pyclass(name = "VertexSet", frozen)]
struct PyVertexSet {
    inner: UnimodularVertexSet,
}

#[pymethods]
impl PyVertexSet {
    #[new]
    fn new(vertices: Vec<Complex64>) -> PyResult<Self> {
        Ok(Self {
            inner: UnimodularVertexSet::new(vertices).map_err(err)?,
        })
    }

    #[staticmethod]
    fn roots_of_unity(n: usize) -> PyResult<Self> {
        if n == 0 {
            return Err(PyValueError::new_err("n must be positive"));
        }
        Ok(Self {
            inner: UnimodularVertexSet::roots_of_unity(n),
        })
    }

    #[getter]
    fn vertices(&self) -> Vec<Complex64> {
        self.inner.vertices().to_vec()
    }

    /// Whether every point lies in the open Stolz domain `E_r`.
    fn contains(&self, r: f64, z: Complex64) -> PyResult<bool> {
        Ok(StolzDomain::new(self.inner.clone(), r).map_err(err)?.contains(z))
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("VertexSet({:?})", self.inner.vertices())
    }
}

/// A square matrix acting on `l^p_n`.
#[pyclass(name = "Operator", frozen)]
struct PyOperator {
    inner: FiniteOperator,
}

#[pymethods]
impl PyOperator {
    #[new]
    #[pyo3(signature = (matrix, p = 2.0))]
    fn new(matrix: Vec<Vec<Complex64>>, p: f64) -> PyResult<Self> {
        Ok(Self {
            inner: FiniteOperator::new(from_rows(matrix)?, p).map_err(err)?,
        })
    }

    /// A seeded random Ritt_E operator with spectrum in `E_r`.
    #[staticmethod]
    #[pyo3(signature = (vertices, dimension, r = 0.6, seed = 1, condition_cap = 1.0, p = 2.0))]
    fn random(vertices: &PyVertexSet, dimension: usize, r: f64, seed: u64, condition_cap: f64, p: f64) -> PyResult<Self> {
        let spec = GeneratorSpec::new(vertices.inner.clone(), dimension, r, seed)
            .with_cap(condition_cap)
            .with_p(p);
        Ok(Self {
            inner: generate_ritt_operator(&spec).map_err(err)?.operator,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn p(&self) -> f64 {
        self.inner.ambient_p()
    }

    #[getter]
    fn matrix(&self) -> Vec<Vec<Complex64>> {
        to_rows(self.inner.entries())
    }

    fn eigenvalues(&self) -> Vec<Complex64> {
        self.inner.eigenvalues()
    }

    fn norm(&self) -> f64 {
        self.inner.operator_norm()
    }

    fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    /// `(is_ritt, type_estimate, constant)`.
    fn classify_ritt(&self, vertices: &PyVertexSet) -> (bool, f64, f64) {
        let c = classify_ritt(&self.inner, &vertices.inner);
        (c.is_ritt, c.type_estimate, c.constant)
    }

    /// `φ(T)` for a catalog function through the contour integral.
    #[pyo3(signature = (vertices, name, param = 1.5, s = 0.9, u = None))]
    fn apply(&self, vertices: &PyVertexSet, name: &str, param: f64, s: f64, u: Option<f64>) -> PyResult<Vec<Vec<Complex64>>> {
        let phi = HoloFunction::catalog(name, param, &vertices.inner, s).map_err(err)?;
        self.calculus(&phi, &vertices.inner, s, u)
    }

    /// `p(T)` by the contour integral; `coefficients` lowest degree first.
    #[pyo3(signature = (vertices, coefficients, s = 0.9, u = None))]
    fn apply_polynomial(
        &self,
        vertices: &PyVertexSet,
        coefficients: Vec<Complex64>,
        s: f64,
        u: Option<f64>,
    ) -> PyResult<Vec<Vec<Complex64>>> {
        let phi = HoloFunction::from_polynomial(Polynomial::new(coefficients), &vertices.inner, s);
        self.calculus(&phi, &vertices.inner, s, u)
    }

    /// `‖x‖_{T,α}` as `(value, std_error, terms, divergence_suspected)`.
    #[pyo3(signature = (vertices, x, alpha = 1.0))]
    fn square_function(&self, vertices: &PyVertexSet, x: Vec<Complex64>, alpha: f64) -> PyResult<(f64, f64, usize, bool)> {
        let x = CVec::from_vec(x);
        let sf = square_function(&self.inner, &vertices.inner, &SquareFunctionSpec::with_alpha(alpha), &x).map_err(err)?;
        Ok((sf.value.value, sf.value.std_error, sf.terms, sf.divergence_suspected))
    }

    /// `max n^α ‖(ρT)^{n-1} Π(I - conj(ξ_j) ρT)^α‖` over `n ≤ n_max`.
    #[pyo3(signature = (vertices, alpha, rhos, n_max = 1000))]
    fn power_family_bound(&self, vertices: &PyVertexSet, alpha: f64, rhos: Vec<f64>, n_max: usize) -> PyResult<f64> {
        Ok(power_family_bound(&self.inner, &vertices.inner, alpha, &rhos, n_max).map_err(err)?.value)
    }

    fn __repr__(&self) -> String {
        format!("Operator(dim={}, p={})", self.inner.dim(), self.inner.ambient_p())
    }
}

impl PyOperator {
    fn calculus(&self, phi: &HoloFunction, e: &UnimodularVertexSet, s: f64, u: Option<f64>) -> PyResult<Vec<Vec<Complex64>>> {
        let settings = CalculusSettings {
            s,
            u,
            ..CalculusSettings::default()
        };
        let u = settings.contour_radius(&self.inner, e).map_err(err)?;
        let m = contour_calculus(phi, &self.inner, e, u, settings.quadrature).map_err(err)?;
        Ok(to_rows(&m))
    }
}

#[pyfunction]
fn list_experiments() -> Vec<(&'static str, &'static str)> {
    harness::REGISTRY.iter().map(|e| (e.name, e.summary)).collect()
}

/// Runs an experiment with dotted overrides; returns `(passed, report_json)`.
#[pyfunction]
#[pyo3(signature = (name, overrides = Vec::new()))]
fn run_experiment(py: Python<'_>, name: &str, overrides: Vec<String>) -> PyResult<(bool, String)> {
    let exp = harness::find(name).ok_or_else(|| PyKeyError::new_err(format!("unknown experiment `{name}`")))?;
    let config = ExperimentConfig::assemble(&(exp.defaults)(), None, &overrides).map_err(err)?;
    let report = py.detach(|| harness::run_config(exp, &config)).map_err(err)?;
    Ok((report.passed(), report.to_json()))
}

#[pymodule]
#[pyo3(name = "ritt_calculus")]
fn ritt_calculus_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyVertexSet>()?;
    m.add_class::<PyOperator>()?;
    m.add_function(wrap_pyfunction!(list_experiments, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
