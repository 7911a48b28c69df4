//! Python bindings: subgroups of `Z_{m^k}^n`, normal forms, the gcd
//! combiner, HSP solves, group structure, and the command-line front end.

use clap::Parser;
use num_bigint::BigInt;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;

use hspkit::gcd::combine_many;
use hspkit::groups::{
    abelian_factor_decomposition, build_polycyclic_series, derived_series, group_order, GroupFile, SeriesOutcome,
    Session,
};
use hspkit::hsp::{build_coset_oracle, Engine, SolveReport, Solver};
use hspkit::lattice::{hermite_normal_form, smith_normal_form, IntMatrix, SubgroupRep};
use hspkit::state::{Exact, Float, MeasureMode, Sampler};

fn err(e: hspkit::Error) -> PyErr {
    match e {
        hspkit::Error::Promise(_) | hspkit::Error::Group(_) => PyRuntimeError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn to_python<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    PyModule::import(py, "json")?.call_method1("loads", (v.to_string(),))
}

fn mode(seed: Option<u64>) -> MeasureMode {
    seed.map_or(MeasureMode::Deterministic, MeasureMode::Seeded)
}

fn engine(name: &str) -> PyResult<Engine> {
    match name {
        "auto" => Ok(Engine::Auto),
        "circuit" => Ok(Engine::Circuit),
        "lumped" => Ok(Engine::Lumped),
        _ => Err(PyValueError::new_err(format!("unknown engine `{name}`"))),
    }
}

/// A subgroup of `Z_{m^k}^n`, held by the Hermite form of its lattice.
#[pyclass(name = "Subgroup", module = "hspkit_py", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PySubgroup {
    inner: SubgroupRep,
}

#[pymethods]
impl PySubgroup {
    #[new]
    #[pyo3(signature = (m, n, generators, k = 1))]
    fn new(m: u64, n: usize, generators: Vec<Vec<BigInt>>, k: u32) -> PyResult<Self> {
        Ok(PySubgroup { inner: SubgroupRep::from_generators(&generators, m, k, n).map_err(err)? })
    }

    #[getter]
    fn m(&self) -> u64 {
        self.inner.m()
    }

    #[getter]
    fn k(&self) -> u32 {
        self.inner.k()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn order(&self) -> BigInt {
        self.inner.order()
    }

    /// Rows of the Hermite form of the lattice.
    fn hnf(&self) -> Vec<Vec<BigInt>> {
        self.inner.hnf().to_rows()
    }

    fn generators(&self) -> Vec<Vec<BigInt>> {
        self.inner.generators()
    }

    fn contains(&self, x: Vec<BigInt>) -> PyResult<bool> {
        self.inner.contains(&x).map_err(err)
    }

    fn perp(&self) -> PyResult<Self> {
        Ok(PySubgroup { inner: self.inner.perp().map_err(err)? })
    }

    fn __repr__(&self) -> String {
        format!(
            "Subgroup(m={}, k={}, n={}, order={})",
            self.inner.m(),
            self.inner.k(),
            self.inner.n(),
            self.inner.order()
        )
    }
}

/// `{"h", "u", "rank"}` with `h = M u` in Hermite form; `rows` are the
/// rows of `M`.
#[pyfunction]
fn hnf<'py>(py: Python<'py>, rows: Vec<Vec<BigInt>>) -> PyResult<Bound<'py, PyAny>> {
    let m = IntMatrix::from_rows(&rows).map_err(err)?;
    let h = hermite_normal_form(&m);
    to_python(py, &serde_json::json!({"h": h.h, "u": h.u, "rank": h.rank}))
}

/// `{"s", "l", "r", "diagonal"}` with `s = l M r`.
#[pyfunction]
fn snf<'py>(py: Python<'py>, rows: Vec<Vec<BigInt>>) -> PyResult<Bound<'py, PyAny>> {
    let m = IntMatrix::from_rows(&rows).map_err(err)?;
    let s = smith_normal_form(&m);
    let diag: Vec<String> = s.diagonal().iter().map(|d| d.to_string()).collect();
    to_python(py, &serde_json::json!({"s": s.s, "l": s.l, "r": s.r, "diagonal": diag}))
}

/// Coefficients `u_1..u_{s-1}` with `gcd(sum u_i z_i + z_s, m) = gcd(z, m)`.
#[pyfunction]
fn gcd_combine(zs: Vec<u64>, m: u64) -> PyResult<Vec<u64>> {
    if zs.is_empty() || m == 0 {
        return Err(PyValueError::new_err("need at least one value and m >= 1"));
    }
    Ok(combine_many(&zs, m))
}

/// Solves the coset-oracle instance hiding `subgroup`; returns the report
/// as a dict.
#[pyfunction]
#[pyo3(signature = (subgroup, seed = None, engine_name = "auto", backend = "exact"))]
fn solve_hsp<'py>(
    py: Python<'py>,
    subgroup: &PySubgroup,
    seed: Option<u64>,
    engine_name: &str,
    backend: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let oracle = build_coset_oracle(&subgroup.inner);
    let (e, md) = (engine(engine_name)?, mode(seed));
    let solution = match backend {
        "exact" => {
            let mut s = Solver::<Exact>::new(e, Sampler::new(md));
            let h = s.solve(&oracle).map_err(err)?;
            s.finish(h)
        }
        "float" => {
            let mut s = Solver::<Float>::new(e, Sampler::new(md));
            let h = s.solve(&oracle).map_err(err)?;
            s.finish(h)
        }
        _ => return Err(PyValueError::new_err(format!("unknown backend `{backend}`"))),
    };
    to_python(py, &serde_json::to_value(SolveReport::new(&solution)).unwrap())
}

/// Order, series, derived series and `G/G'` of a group given as the JSON
/// text of a group file.
#[pyfunction]
#[pyo3(signature = (group_json, seed = None))]
fn group_structure<'py>(py: Python<'py>, group_json: &str, seed: Option<u64>) -> PyResult<Bound<'py, PyAny>> {
    let file = GroupFile::from_json(group_json).map_err(err)?;
    let group = file.spec.build().map_err(err)?;
    let mut s = Session::new(group.clone(), file.m).with_mode(mode(seed));
    let gens = group.generators().to_vec();
    let series = match build_polycyclic_series(&mut s, &gens).map_err(err)? {
        SeriesOutcome::Series(series) => series,
        SeriesOutcome::BadOrder { element } => {
            return to_python(py, &serde_json::json!({"status": "bad_order", "element": element}))
        }
        SeriesOutcome::NotSolvable { replacements } => {
            return to_python(py, &serde_json::json!({"status": "not_solvable", "replacements": replacements}))
        }
    };
    let derived = derived_series(&mut s, &gens).map_err(err)?;
    let quotient = abelian_factor_decomposition(&mut s, &derived[1].generators).map_err(err)?;
    let v = serde_json::json!({
        "status": "solvable",
        "order": group_order(&series) as u64,
        "series": {"elements": series.elements, "orders": series.orders},
        "derived_orders": derived.iter().map(|t| group_order(&t.series) as u64).collect::<Vec<_>>(),
        "abelianization": quotient.factors,
        "stats": s.stats,
    });
    to_python(py, &v)
}

/// Runs the command-line front end; returns `(exit status, report)`.
#[pyfunction]
fn run_cli<'py>(py: Python<'py>, args: Vec<String>) -> PyResult<(i32, Bound<'py, PyAny>)> {
    let cli = hspkit_cli::commands::Cli::try_parse_from(std::iter::once("hspkit".to_string()).chain(args))
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let report = hspkit_cli::commands::run(&cli);
    Ok((report.code, to_python(py, &report.json)?))
}

#[pymodule]
fn hspkit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySubgroup>()?;
    m.add_function(wrap_pyfunction!(hnf, m)?)?;
    m.add_function(wrap_pyfunction!(snf, m)?)?;
    m.add_function(wrap_pyfunction!(gcd_combine, m)?)?;
    m.add_function(wrap_pyfunction!(solve_hsp, m)?)?;
    m.add_function(wrap_pyfunction!(group_structure, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
