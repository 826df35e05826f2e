//! Python bindings: algebra instances, graph sums, potentials, normal forms
//! and the strata checks.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use chgraph::chalg::{self, check_axioms};
use chgraph::genexp::{self, GraphSum};
use chgraph::rational;
use chgraph::rewrite;
use chgraph::verify::{self, bp_relation, DEFAULT_STRATA};

fn err(e: chgraph::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A finite-dimensional algebra with its operators and integral.
#[pyclass(name = "AlgebraInstance")]
#[derive(Clone)]
struct PyAlgebra(chalg::AlgebraInstance);

#[pymethods]
impl PyAlgebra {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        chalg::AlgebraInstance::parse(text).map(PyAlgebra).map_err(err)
    }

    #[staticmethod]
    fn trivial() -> Self {
        PyAlgebra(chalg::trivial_instance())
    }

    #[staticmethod]
    fn minimal_quadruple() -> Self {
        PyAlgebra(chalg::minimal_quadruple_instance())
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    /// `(all axioms pass, rendered report)`.
    fn check(&self) -> PyResult<(bool, String)> {
        let r = check_axioms(&self.0).map_err(err)?;
        Ok((r.all_pass(), r.render()))
    }
}

/// Formal rational combination of canonical graphs.
#[pyclass(name = "GraphSum")]
#[derive(Clone)]
struct PyGraphSum(GraphSum);

#[pymethods]
impl PyGraphSum {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        GraphSum::parse(text).map(PyGraphSum).map_err(err)
    }

    /// `(coefficient, compact key)` pairs in key order.
    fn terms(&self) -> Vec<(String, String)> {
        self.0.terms().map(|(k, c)| (rational::fmt(c), k.compact())).collect()
    }

    fn to_text(&self) -> String {
        self.0.to_text()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __eq__(&self, o: &Self) -> bool {
        self.0 == o.0
    }

    fn __repr__(&self) -> String {
        format!("GraphSum({} terms)", self.0.len())
    }
}

#[pyfunction]
fn potential(genus: usize, max_leaves: usize) -> PyResult<PyGraphSum> {
    genexp::potential(genus, max_leaves).map(PyGraphSum).map_err(err)
}

#[pyfunction]
fn potential_descendant(max_leaves: usize) -> PyResult<PyGraphSum> {
    genexp::potential_descendant(max_leaves).map(PyGraphSum).map_err(err)
}

#[pyfunction]
fn normalize(s: &PyGraphSum) -> PyResult<PyGraphSum> {
    rewrite::normalize(&s.0).map(PyGraphSum).map_err(err)
}

/// Symbolic check of the bundled (or given) strata relation: residual
/// size, plain final graphs, graphs still carrying `Q` or `Π₀`, and the
/// coefficient table as tab-separated text.
#[pyfunction]
#[pyo3(signature = (strata=None))]
fn verify_bp_symbolic(strata: Option<&str>) -> PyResult<(usize, usize, usize, String)> {
    let rel = bp_relation(strata.unwrap_or(DEFAULT_STRATA)).map_err(err)?;
    let r = verify::verify_bp_symbolic(&rel).map_err(err)?;
    Ok((r.residual.len(), r.final_support(), r.table.marked_columns(), r.table.to_tsv(&Default::default(), false)))
}

/// Whether the truncated series residual vanishes on `alg`.
#[pyfunction]
#[pyo3(signature = (alg, degree=6, strata=None))]
fn verify_bp_numeric(alg: &PyAlgebra, degree: usize, strata: Option<&str>) -> PyResult<bool> {
    let rel = bp_relation(strata.unwrap_or(DEFAULT_STRATA)).map_err(err)?;
    verify::verify_bp_numeric(&alg.0, &rel, degree).map(|r| r.passed()).map_err(err)
}

#[pymodule]
fn chgraph_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAlgebra>()?;
    m.add_class::<PyGraphSum>()?;
    m.add_function(wrap_pyfunction!(potential, m)?)?;
    m.add_function(wrap_pyfunction!(potential_descendant, m)?)?;
    m.add_function(wrap_pyfunction!(normalize, m)?)?;
    m.add_function(wrap_pyfunction!(verify_bp_symbolic, m)?)?;
    m.add_function(wrap_pyfunction!(verify_bp_numeric, m)?)?;
    Ok(())
}
