//! Python bindings. Rationals cross the boundary as `"p/q"` strings and
//! structured reports as plain dicts.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use k3orb_core::bundles;
use k3orb_core::catalog::{Catalog, Expectations};
use k3orb_core::graded::generator_data;
use k3orb_core::lattice::{self, DivisorClass, Profile, SearchBounds, SurfaceState};
use k3orb_core::orbchar;
use k3orb_core::pipeline::{self, PipelineOptions};
use k3orb_core::rational::{self, Rational};
use k3orb_core::seifert::{self, ParameterBounds, SeifertContext};
use k3orb_core::wps::{singularity_report, HypersurfaceSpec};
use k3orb_core::Error;

fn err(e: Error) -> PyErr {
    if e.is_input_error() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn to_py<T: serde::Serialize>(py: Python<'_>, t: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(t).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn parse_rational(s: &str) -> PyResult<Rational> {
    rational::parse(s).ok_or_else(|| PyValueError::new_err(format!("not a rational: {s}")))
}

fn parse_profile(s: &str) -> PyResult<Profile> {
    s.parse().map_err(err)
}

/// A K3 orbisurface after some blow-ups.
#[pyclass(name = "Surface", module = "k3orb")]
struct PySurface {
    state: SurfaceState,
}

#[pymethods]
impl PySurface {
    #[new]
    fn new(weights: [u64; 4], degree: u64) -> PyResult<Self> {
        let spec = HypersurfaceSpec::generic(weights, degree).map_err(err)?;
        let report = singularity_report(&spec).map_err(err)?;
        let g = generator_data(&spec, &report).map_err(err)?;
        let id = format!("P{weights:?}[{degree}]");
        let state = SurfaceState::from_report(&id, &report, g.degree, g.h_self).map_err(err)?;
        Ok(PySurface { state })
    }

    /// The surface of a catalog entry, chain applied.
    #[staticmethod]
    fn from_catalog(id: &str) -> PyResult<Self> {
        let cat = Catalog::embedded();
        let state = cat.get(id).and_then(|e| e.state()).map_err(err)?;
        Ok(PySurface { state })
    }

    fn blow_up(&self, label: &str) -> PyResult<Self> {
        let target = label.parse().map_err(err)?;
        let state = lattice::blow_up(&self.state, target).map_err(err)?;
        Ok(PySurface { state })
    }

    #[getter]
    fn singularities(&self) -> Vec<String> {
        self.state.labels()
    }

    #[getter]
    fn b2(&self) -> i64 {
        self.state.b2
    }

    #[getter]
    fn euler(&self) -> i64 {
        self.state.euler
    }

    #[getter]
    fn euler_orb(&self) -> String {
        rational::to_string(&orbchar::euler_orb(&self.state))
    }

    #[getter]
    fn rank(&self) -> usize {
        self.state.lattice.rank()
    }

    fn noether(&self) -> bool {
        orbchar::noether_check(&self.state)
    }

    fn self_intersection(&self, tuple: Vec<i64>) -> PyResult<String> {
        let q = DivisorClass::from_tuple(&tuple);
        let v = self.state.lattice.self_intersection(&q).map_err(err)?;
        Ok(rational::to_string(&v))
    }

    #[pyo3(signature = (tuple, target = "2", profile = "ample-only"))]
    fn verify_q(&self, py: Python<'_>, tuple: Vec<i64>, target: &str, profile: &str) -> PyResult<Py<PyAny>> {
        let q = DivisorClass::from_tuple(&tuple);
        let v = lattice::verify_q(&self.state.lattice, &q, &parse_rational(target)?, parse_profile(profile)?)
            .map_err(err)?;
        to_py(py, &v)
    }

    #[pyo3(signature = (target = "2", profile = "ample-only", limit = None, a0_max = 20, coeff_max = 64))]
    fn search_q(
        &self,
        target: &str,
        profile: &str,
        limit: Option<usize>,
        a0_max: u64,
        coeff_max: u64,
    ) -> PyResult<Vec<Vec<i64>>> {
        let bounds = SearchBounds { a0_max, coeff_max };
        lattice::search_q(&self.state.lattice, &parse_rational(target)?, parse_profile(profile)?, bounds, limit)
            .map_err(err)
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &self.state)
    }

    fn __repr__(&self) -> String {
        format!("Surface({}, e={})", self.state.labels().join(", "), self.state.euler)
    }
}

#[pyfunction]
fn analyze(py: Python<'_>, weights: [u64; 4], degree: u64) -> PyResult<Py<PyAny>> {
    let spec = HypersurfaceSpec::generic(weights, degree).map_err(err)?;
    to_py(py, &singularity_report(&spec).map_err(err)?)
}

#[pyfunction]
fn mu_local(m: u64, j: u64) -> PyResult<String> {
    Ok(rational::to_string(&orbchar::mu_local(m, j).map_err(err)?))
}

#[pyfunction]
fn mu_sing_trivial(singularities: Vec<u32>) -> PyResult<String> {
    Ok(rational::to_string(&orbchar::mu_sing_trivial(&singularities).map_err(err)?))
}

#[pyfunction]
fn derive_ab(n: i64, c: i64, m: i64) -> (i64, i64) {
    seifert::derive_ab(n, c, m)
}

/// Minimal Seifert parameters on the smallest lattice with one `A_n` pair block.
#[pyfunction]
#[pyo3(signature = (n, c, m_max = 64, k_max = 64))]
fn find_seifert(py: Python<'_>, n: u32, c: i64, m_max: i64, k_max: i64) -> PyResult<Py<PyAny>> {
    let ctx = SeifertContext::minimal(n, c).map_err(err)?;
    let cert = seifert::find_parameters(&ctx, c, ParameterBounds { m_max, k_max }).map_err(err)?;
    to_py(py, &cert)
}

#[pyfunction]
#[pyo3(signature = (a = 40, b = 3))]
fn orbifold_certificate(py: Python<'_>, a: i64, b: i64) -> PyResult<Py<PyAny>> {
    to_py(py, &bundles::orbifold_serre_x30(a, b).map_err(err)?)
}

#[pyfunction]
#[pyo3(name = "pipeline", signature = (id, profile = "ample-only"))]
fn run_pipeline(py: Python<'_>, id: &str, profile: &str) -> PyResult<Py<PyAny>> {
    let cat = Catalog::embedded();
    let opts = PipelineOptions {
        profile: parse_profile(profile)?,
        ..PipelineOptions::default()
    };
    let entry = cat.get(id).map_err(err)?;
    to_py(py, &pipeline::pipeline(entry, &Expectations::embedded(), &opts).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (which = None))]
fn verify_tables(py: Python<'_>, which: Option<u8>) -> PyResult<Py<PyAny>> {
    let summary = pipeline::verify_tables(
        &Catalog::embedded(),
        &Expectations::embedded(),
        which,
        &PipelineOptions::default(),
    )
    .map_err(err)?;
    to_py(py, &summary)
}

#[pyfunction]
fn catalog_ids() -> Vec<String> {
    Catalog::embedded().entries.into_iter().map(|e| e.id).collect()
}

#[pymodule]
fn k3orb(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySurface>()?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(mu_local, m)?)?;
    m.add_function(wrap_pyfunction!(mu_sing_trivial, m)?)?;
    m.add_function(wrap_pyfunction!(derive_ab, m)?)?;
    m.add_function(wrap_pyfunction!(find_seifert, m)?)?;
    m.add_function(wrap_pyfunction!(orbifold_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(verify_tables, m)?)?;
    m.add_function(wrap_pyfunction!(catalog_ids, m)?)?;
    Ok(())
}
