//! Python bindings. Exact quantities cross the boundary as
//! `fractions.Fraction`; reports as plain dicts.

use std::collections::BTreeMap;

use baker_fr::fluctuation::{self, Start};
use baker_fr::maps::PerturbationStrip;
use baker_fr::scalar::{format_rational, parse_rational};
use baker_fr::transfer::{invariant_density, project_unstable};
use baker_fr::{multibaker, observables, periodic, Family, Rational};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

type Fractions<'py> = Vec<Bound<'py, PyAny>>;

fn err(e: baker_fr::Error) -> PyErr {
    match e {
        baker_fr::Error::Parse(_) | baker_fr::Error::InvalidParameter(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn fraction<'py>(py: Python<'py>, r: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((format_rational(r),))
}

/// Accepts `"1/8"`, an int, or anything whose `str()` is a rational.
fn rational(obj: &Bound<'_, PyAny>) -> PyResult<Rational> {
    parse_rational(&obj.str()?.to_string()).map_err(err)
}

fn to_python<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn start(name: &str) -> PyResult<Start> {
    match name {
        "stationary" => Ok(Start::Stationary),
        "uniform" => Ok(Start::Uniform),
        other => Err(PyValueError::new_err(format!("unknown start `{other}`"))),
    }
}

/// A map family at a fixed parameter `l`.
#[pyclass(frozen, module = "baker_fr")]
struct Model {
    inner: baker_fr::Model,
}

#[pymethods]
impl Model {
    #[new]
    fn new(family: &str, l: &Bound<'_, PyAny>) -> PyResult<Self> {
        let family: Family = family.parse().map_err(err)?;
        let l = rational(l)?;
        let inner = match family {
            Family::Composite => baker_fr::Model::composite(&l, &PerturbationStrip::default_for(&l)),
            f => baker_fr::Model::new(f, &l),
        }
        .map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.inner.family().as_str()
    }

    #[getter]
    fn l<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, self.inner.l())
    }

    /// `(breakpoints, values)` of the invariant density on `[0, 1]`.
    fn invariant_density<'py>(&self, py: Python<'py>) -> PyResult<(Fractions<'py>, Fractions<'py>)> {
        let rho = project_unstable(self.inner.map())
            .and_then(|m| invariant_density(&m))
            .map_err(err)?;
        let conv = |xs: &[Rational]| xs.iter().map(|x| fraction(py, x)).collect::<PyResult<Vec<_>>>();
        Ok((conv(rho.breakpoints())?, conv(rho.values())?))
    }

    fn region_measures<'py>(&self, py: Python<'py>) -> PyResult<BTreeMap<String, Bound<'py, PyAny>>> {
        let chain = self.inner.chain();
        chain
            .states
            .iter()
            .zip(&chain.mu)
            .map(|(r, m)| Ok((r.to_string(), fraction(py, m)?)))
            .collect()
    }

    /// Steady-state `⟨Λ⟩` as a float.
    fn mean_lambda(&self) -> f64 {
        self.inner.mean_lambda().value()
    }

    #[pyo3(signature = (n, start = "stationary"))]
    fn exact_distribution<'py>(
        &self,
        py: Python<'py>,
        n: usize,
        start: &str,
    ) -> PyResult<BTreeMap<i64, Bound<'py, PyAny>>> {
        let d = fluctuation::exact_distribution(&self.inner, n, self::start(start)?).map_err(err)?;
        d.probabilities()
            .iter()
            .map(|(g, p)| Ok((*g, fraction(py, p)?)))
            .collect()
    }

    fn fr_report<'py>(&self, py: Python<'py>, n: usize) -> PyResult<Bound<'py, PyAny>> {
        let d = fluctuation::exact_distribution(&self.inner, n, Start::Stationary).map_err(err)?;
        to_python(py, &fluctuation::fr_report(&self.inner, &d).map_err(err)?)
    }

    #[pyo3(signature = (n, ensemble, transient = 100, seed = 0))]
    fn monte_carlo(
        &self,
        py: Python<'_>,
        n: usize,
        ensemble: usize,
        transient: usize,
        seed: u64,
    ) -> PyResult<BTreeMap<i64, u64>> {
        let mc = py
            .detach(|| fluctuation::monte_carlo_distribution(&self.inner, n, ensemble, transient, seed))
            .map_err(err)?;
        Ok(mc.counts().clone())
    }

    /// `g` along the orbit of `(x, y)` for `n` steps.
    fn contraction_count(&self, x: &Bound<'_, PyAny>, y: &Bound<'_, PyAny>, n: usize) -> PyResult<i64> {
        let p = baker_fr::maps::PhasePoint::new(rational(x)?, rational(y)?);
        Ok(observables::average_contraction(&self.inner, &p, n).map_err(err)?.g)
    }

    fn upo_distribution<'py>(&self, py: Python<'py>, n: usize) -> PyResult<BTreeMap<i64, Bound<'py, PyAny>>> {
        let d = periodic::upo_distribution(&self.inner, n).map_err(err)?;
        d.probabilities()
            .iter()
            .map(|(g, p)| Ok((*g, fraction(py, p)?)))
            .collect()
    }

    #[pyo3(signature = (particles, steps, transient = 100, seed = 0))]
    fn simulate_current<'py>(
        &self,
        py: Python<'py>,
        particles: usize,
        steps: usize,
        transient: usize,
        seed: u64,
    ) -> PyResult<Bound<'py, PyAny>> {
        let est = py
            .detach(|| multibaker::simulate_current(&self.inner, particles, steps, transient, seed))
            .map_err(err)?;
        to_python(py, &est)
    }

    fn __repr__(&self) -> String {
        format!(
            "Model('{}', '{}')",
            self.inner.family(),
            format_rational(self.inner.l())
        )
    }
}

/// Exact drift `Ψ` of the multibaker chain.
#[pyfunction]
fn analytic_current<'py>(py: Python<'py>, l: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    fraction(py, &multibaker::analytic_current(&rational(l)?).map_err(err)?)
}

#[pymodule(name = "baker_fr")]
fn init(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(analytic_current, m)?)?;
    Ok(())
}
