//! Python bindings. Rationals travel as `"p/q"` strings, field elements as
//! ints, and structured reports as JSON strings.

use std::collections::HashMap;

use pyo3::exceptions::{PyLookupError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use multirepair::tradeoff::{self, parse_rational, SystemParams};
use multirepair::workbench::{self, BuildSpec, CodeInstance, Descriptor, Family, Sample};
use multirepair::{Elem, Error, Field};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NotFound { .. } => PyLookupError::new_err(e.to_string()),
        Error::SingularCoupling { .. } | Error::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn params(file_size: &str, n: usize, k: usize, d: usize, e: usize) -> PyResult<SystemParams> {
    SystemParams::new(parse_rational(file_size).map_err(to_py)?, n, k, d, e).map_err(to_py)
}

fn field(m: u32, modulus: Option<u32>) -> PyResult<Field> {
    match modulus {
        Some(p) => Field::new(m, p),
        None => Field::with_default_modulus(m),
    }
    .map_err(to_py)
}

fn elems(f: &Field, v: &[u32]) -> PyResult<Vec<Elem>> {
    v.iter().map(|&x| f.elem(x)).collect::<Result<_, _>>().map_err(to_py)
}

fn ints(v: &[Elem]) -> Vec<u32> {
    v.iter().map(|x| x.0 as u32).collect()
}

/// Breakpoints `(gamma, alpha, segment)` sorted by `gamma`.
#[pyfunction]
fn tradeoff_curve(file_size: &str, n: usize, k: usize, d: usize, e: usize) -> PyResult<Vec<(String, String, usize)>> {
    let p = params(file_size, n, k, d, e)?;
    Ok(tradeoff::tradeoff_curve(&p).into_iter().map(|c| (c.gamma.to_string(), c.alpha.to_string(), c.segment)).collect())
}

#[pyfunction]
fn alpha_star(file_size: &str, n: usize, k: usize, d: usize, e: usize, gamma: &str) -> PyResult<String> {
    let p = params(file_size, n, k, d, e)?;
    let g = parse_rational(gamma).map_err(to_py)?;
    Ok(tradeoff::alpha_star(&p, &g).map_err(to_py)?.to_string())
}

#[pyfunction]
fn gamma_star(file_size: &str, n: usize, k: usize, d: usize, e: usize, alpha: &str) -> PyResult<String> {
    let p = params(file_size, n, k, d, e)?;
    let a = parse_rational(alpha).map_err(to_py)?;
    Ok(tradeoff::gamma_star(&p, &a).map_err(to_py)?.to_string())
}

/// `((alpha, gamma), on_tradeoff)` for the cooperative minimum-bandwidth point.
#[pyfunction]
fn mbcr_check(file_size: &str, n: usize, k: usize, d: usize, e: usize) -> PyResult<((String, String), bool)> {
    let (pt, on) = tradeoff::mbcr_check(&params(file_size, n, k, d, e)?);
    Ok(((pt.alpha.to_string(), pt.gamma.to_string()), on))
}

/// Comparison report as JSON.
#[pyfunction]
fn compare_strategies(file_size: &str, n: usize, k: usize, d: usize, e: usize) -> PyResult<String> {
    let c = workbench::comparison_export(&params(file_size, n, k, d, e)?).map_err(to_py)?;
    Ok(serde_json::to_string(&c).expect("serializable"))
}

/// Search result (descriptor and trial count) as JSON.
#[pyfunction]
#[pyo3(signature = (family, n, k, e_max, m, modulus=None, budget=100, seed=0))]
#[allow(clippy::too_many_arguments)]
fn search_assignment(family: &str, n: usize, k: usize, e_max: usize, m: u32, modulus: Option<u32>, budget: usize, seed: u64) -> PyResult<String> {
    let fam: Family = family.parse().map_err(to_py)?;
    let r = workbench::search_assignment(fam, &field(m, modulus)?, n, k, e_max, budget, seed).map_err(to_py)?;
    Ok(serde_json::to_string(&r).expect("serializable"))
}

#[pyclass(frozen)]
struct Code {
    inner: CodeInstance,
}

#[pymethods]
impl Code {
    #[staticmethod]
    #[pyo3(signature = (family, n, k, m, modulus=None, d=None, d_max=None, e=None))]
    #[allow(clippy::too_many_arguments)]
    fn build(family: &str, n: usize, k: usize, m: u32, modulus: Option<u32>, d: Option<usize>, d_max: Option<usize>, e: Option<usize>) -> PyResult<Self> {
        let spec = BuildSpec { family: family.parse().map_err(to_py)?, n, k, d, d_max, e };
        Ok(Code { inner: CodeInstance::build(field(m, modulus)?, &spec).map_err(to_py)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let d: Descriptor = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(Code { inner: CodeInstance::from_descriptor(&d).map_err(to_py)? })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner.descriptor()).expect("serializable")
    }

    #[getter]
    fn family(&self) -> String {
        self.inner.family().to_string()
    }
    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }
    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }
    #[getter]
    fn message_len(&self) -> usize {
        self.inner.message_len()
    }

    fn random_message(&self, seed: u64) -> Vec<u32> {
        ints(&workbench::random_message(self.inner.field(), self.inner.message_len(), &mut workbench::pattern_rng(seed, 0)))
    }

    fn encode(&self, message: Vec<u32>) -> PyResult<Vec<Vec<u32>>> {
        let m = elems(self.inner.field(), &message)?;
        Ok(self.inner.encode(&m).map_err(to_py)?.iter().map(|w| ints(w)).collect())
    }

    fn reconstruct(&self, nodes: Vec<usize>, contents: Vec<Vec<u32>>) -> PyResult<Vec<u32>> {
        let f = self.inner.field();
        let cs = contents.iter().map(|c| elems(f, c)).collect::<PyResult<Vec<_>>>()?;
        Ok(ints(&self.inner.reconstruct(&nodes, &cs).map_err(to_py)?))
    }

    /// Returns the regenerated contents (in `failed` order) and the total
    /// number of symbols downloaded.
    #[pyo3(signature = (failed, shards, helpers=None))]
    fn repair(&self, failed: Vec<usize>, shards: HashMap<usize, Vec<u32>>, helpers: Option<Vec<usize>>) -> PyResult<(Vec<Vec<u32>>, usize)> {
        let f = self.inner.field();
        let mut have = HashMap::new();
        for (node, s) in shards {
            have.insert(node, elems(f, &s)?);
        }
        let helpers = match helpers {
            Some(h) => h,
            None => self.inner.default_helpers(&failed).map_err(to_py)?,
        };
        if let Some(h) = helpers.iter().find(|h| !have.contains_key(h)) {
            return Err(PyValueError::new_err(format!("no shard for helper {h}")));
        }
        let out = self.inner.repair(&failed, Some(&helpers), &|h| have[&h].clone()).map_err(to_py)?;
        Ok((out.contents.iter().map(|w| ints(w)).collect(), out.transcript.total))
    }

    /// Sweep report as JSON.
    #[pyo3(signature = (e, seed=0, sample=None))]
    fn sweep(&self, py: Python<'_>, e: usize, seed: u64, sample: Option<usize>) -> PyResult<String> {
        let s = sample.map_or(Sample::All, Sample::Random);
        let r = py.detach(|| workbench::run_sweep(&self.inner, e, s, seed)).map_err(to_py)?;
        Ok(serde_json::to_string(&r).expect("serializable"))
    }
}

#[pymodule]
fn multirepair_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(tradeoff_curve, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_star, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_star, m)?)?;
    m.add_function(wrap_pyfunction!(mbcr_check, m)?)?;
    m.add_function(wrap_pyfunction!(compare_strategies, m)?)?;
    m.add_function(wrap_pyfunction!(search_assignment, m)?)?;
    m.add_class::<Code>()?;
    Ok(())
}
