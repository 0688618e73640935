//! Python bindings: molecules, templates, tree search, direct route
//! reconstruction, metrics and tokenizers. Routes cross the boundary as
//! JSON strings in the route wire format.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use retroplan::chem::{canonicalize as canon, Molecule};
use retroplan::dataset::{filter_reaction as filter_rxn, ReactionRecord};
use retroplan::direct::{rank_direct_routes, reconstruct_routes as reconstruct, DirectRoute, TemplateSequence};
use retroplan::evalmetrics::{route_cost as cost, tree_edit_distance as ted, RouteTree};
use retroplan::policy::{build_table_policy, TablePolicy as CoreTable};
use retroplan::search::{extract_routes, run_search_with, SearchConfig as CoreConfig, StockSet};
use retroplan::template::{extract_template_from_smiles, RetroTemplate, TemplateLibrary};
use retroplan::tokenizer::{bpe_decode, bpe_encode, bpe_train, BpeModel as CoreBpe};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_route(json: &str) -> PyResult<RouteTree> {
    serde_json::from_str(json).map_err(value_err)
}

fn stock_of(smiles: &[String]) -> PyResult<StockSet> {
    StockSet::from_smiles(smiles.iter().map(String::as_str)).map_err(value_err)
}

#[pyfunction]
fn canonicalize(smiles: &str) -> PyResult<String> {
    canon(smiles).map_err(value_err)
}

#[pyclass(name = "Molecule", frozen)]
struct PyMolecule {
    inner: Molecule,
}

#[pymethods]
impl PyMolecule {
    #[new]
    fn new(smiles: &str) -> PyResult<Self> {
        Ok(PyMolecule { inner: Molecule::parse(smiles).map_err(value_err)? })
    }

    #[getter]
    fn canonical_smiles(&self) -> String {
        self.inner.canonical_smiles().to_string()
    }

    #[getter]
    fn num_atoms(&self) -> usize {
        self.inner.num_atoms()
    }

    fn molecular_weight(&self) -> f64 {
        self.inner.molecular_weight()
    }

    /// Indices of the set bits.
    #[pyo3(signature = (radius = 2, nbits = 2048))]
    fn morgan_fingerprint(&self, radius: usize, nbits: usize) -> Vec<usize> {
        self.inner.morgan_fingerprint(radius, nbits).on_bits()
    }

    fn __repr__(&self) -> String {
        format!("Molecule({:?})", self.inner.canonical_smiles())
    }
}

#[pyclass(name = "Template", frozen)]
struct PyTemplate {
    inner: RetroTemplate,
}

#[pymethods]
impl PyTemplate {
    #[new]
    fn new(smarts: &str) -> PyResult<Self> {
        Ok(PyTemplate { inner: RetroTemplate::parse(smarts).map_err(value_err)? })
    }

    #[getter]
    fn smarts(&self) -> String {
        self.inner.canonical_smarts().to_string()
    }

    #[getter]
    fn hash(&self) -> String {
        self.inner.hash()
    }

    /// One sorted reactant list per match site.
    fn apply(&self, smiles: &str) -> PyResult<Vec<Vec<String>>> {
        let m = Molecule::parse(smiles).map_err(value_err)?;
        Ok(self.inner.apply(&m).iter().map(|s| s.smiles()).collect())
    }

    fn __repr__(&self) -> String {
        format!("Template({:?})", self.inner.canonical_smarts())
    }
}

#[pyfunction]
#[pyo3(signature = (rxn_smiles, radius = 1))]
fn extract_template(rxn_smiles: &str, radius: usize) -> PyResult<PyTemplate> {
    Ok(PyTemplate { inner: extract_template_from_smiles(rxn_smiles, radius).map_err(value_err)? })
}

#[pyclass(name = "SearchConfig", get_all, set_all, skip_from_py_object)]
#[derive(Clone)]
struct PySearchConfig {
    c_pucb: f64,
    temperature: f64,
    expansions: usize,
    max_iterations: usize,
    time_limit_s: f64,
    q_init: f64,
}

impl From<&PySearchConfig> for CoreConfig {
    fn from(c: &PySearchConfig) -> CoreConfig {
        CoreConfig {
            c_pucb: c.c_pucb,
            temperature: c.temperature,
            expansions: c.expansions,
            max_iterations: c.max_iterations,
            time_limit_s: c.time_limit_s,
            q_init: c.q_init,
        }
    }
}

#[pymethods]
impl PySearchConfig {
    #[new]
    #[pyo3(signature = (**kwargs))]
    fn new(kwargs: Option<&Bound<'_, pyo3::types::PyDict>>) -> PyResult<Self> {
        let d = CoreConfig::default();
        let mut c = PySearchConfig {
            c_pucb: d.c_pucb,
            temperature: d.temperature,
            expansions: d.expansions,
            max_iterations: d.max_iterations,
            time_limit_s: d.time_limit_s,
            q_init: d.q_init,
        };
        if let Some(kw) = kwargs {
            for (k, v) in kw.iter() {
                let key: String = k.extract()?;
                match key.as_str() {
                    "c_pucb" => c.c_pucb = v.extract()?,
                    "temperature" => c.temperature = v.extract()?,
                    "expansions" => c.expansions = v.extract()?,
                    "max_iterations" => c.max_iterations = v.extract()?,
                    "time_limit_s" => c.time_limit_s = v.extract()?,
                    "q_init" => c.q_init = v.extract()?,
                    other => return Err(PyValueError::new_err(format!("unknown search setting {other:?}"))),
                }
            }
        }
        CoreConfig::from(&c).validate().map_err(value_err)?;
        Ok(c)
    }

    fn __repr__(&self) -> String {
        format!(
            "SearchConfig(c_pucb={}, temperature={}, expansions={}, max_iterations={}, time_limit_s={}, q_init={})",
            self.c_pucb, self.temperature, self.expansions, self.max_iterations, self.time_limit_s, self.q_init
        )
    }
}

/// Lookup-table policy built from mapped reaction SMILES.
#[pyclass(name = "TablePolicy", frozen)]
struct PyTablePolicy {
    inner: CoreTable,
}

#[pymethods]
impl PyTablePolicy {
    #[new]
    #[pyo3(signature = (reactions, radius = 1))]
    fn new(reactions: Vec<String>, radius: usize) -> PyResult<Self> {
        let mut obs = Vec::new();
        for (i, rxn) in reactions.iter().enumerate() {
            let mut r = ReactionRecord::parse(&i.to_string(), None, rxn).map_err(value_err)?;
            r.extract(radius).map_err(value_err)?;
            obs.push(r);
        }
        let pairs = obs.iter().map(|r| (r.product(), r.template.as_ref().unwrap()));
        Ok(PyTablePolicy { inner: build_table_policy(pairs).map_err(value_err)? })
    }

    #[getter]
    fn num_templates(&self) -> usize {
        self.inner.num_templates()
    }
}

#[pyclass(name = "SearchResult", frozen)]
struct PySearchResult {
    #[pyo3(get)]
    solved: bool,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    nodes: usize,
    #[pyo3(get)]
    first_solution_iter: Option<usize>,
    routes: Vec<String>,
}

#[pymethods]
impl PySearchResult {
    /// Route JSON strings, cheapest first.
    fn routes(&self) -> Vec<String> {
        self.routes.clone()
    }
}

#[pyfunction]
#[pyo3(signature = (target, policy, stock, config = None, library = None, max_routes = 10))]
fn run_search(
    py: Python<'_>,
    target: &str,
    policy: &PyTablePolicy,
    stock: Vec<String>,
    config: Option<PyRef<'_, PySearchConfig>>,
    library: Option<Vec<String>>,
    max_routes: usize,
) -> PyResult<PySearchResult> {
    let target = Molecule::parse(target).map_err(value_err)?;
    let stock = stock_of(&stock)?;
    let cfg = config.map(|c| CoreConfig::from(&*c)).unwrap_or_default();
    let library = library
        .map(|ts| -> PyResult<TemplateLibrary> {
            let parsed = ts.iter().map(|s| RetroTemplate::parse(s).map_err(value_err)).collect::<PyResult<Vec<_>>>()?;
            Ok(TemplateLibrary::from_templates(&parsed))
        })
        .transpose()?;
    let result = py
        .detach(|| run_search_with(&target, &policy.inner, &stock, &cfg, library.as_ref()))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(PySearchResult {
        solved: result.solved(),
        iterations: result.stats.iterations,
        nodes: result.stats.nodes,
        first_solution_iter: result.stats.first_solution_iter,
        routes: extract_routes(&result, max_routes).iter().map(RouteTree::to_json).collect(),
    })
}

#[pyfunction]
fn puct_score(q: f64, prior: f64, parent_visits: u64, visits: u64, c_pucb: f64) -> f64 {
    retroplan::search::puct_score(q, prior, parent_visits, visits, c_pucb)
}

#[pyfunction]
fn q_update(q: f64, visits: u64, reward: f64) -> (f64, u64) {
    retroplan::search::q_update(q, visits, reward)
}

/// Terminal routes of the molecule-set graph for one template sequence.
#[pyfunction]
#[pyo3(signature = (target, templates, stock = None))]
fn reconstruct_routes(target: &str, templates: Vec<String>, stock: Option<Vec<String>>) -> PyResult<Vec<String>> {
    let target = Molecule::parse(target).map_err(value_err)?;
    let stock = stock.map(|s| stock_of(&s)).transpose()?;
    let seq = TemplateSequence::from_smarts(&templates, 0.0, None);
    Ok(reconstruct(&target, &seq, stock.as_ref()).terminal_routes().iter().map(RouteTree::to_json).collect())
}

/// Orders (route JSON, log-probability) pairs: solved, then shorter, then
/// likelier.
#[pyfunction]
fn rank_routes(routes: Vec<(String, f64)>) -> PyResult<Vec<(String, f64)>> {
    let items = routes
        .into_iter()
        .map(|(json, log_prob)| Ok(DirectRoute { route: parse_route(&json)?, log_prob, condition: None }))
        .collect::<PyResult<Vec<_>>>()?;
    Ok(rank_direct_routes(items).into_iter().map(|r| (r.route.to_json(), r.log_prob)).collect())
}

#[pyfunction]
#[pyo3(signature = (route, eps = 1.0, yld = 0.8))]
fn route_cost(route: &str, eps: f64, yld: f64) -> PyResult<f64> {
    if !(yld > 0.0 && yld <= 1.0) {
        return Err(PyValueError::new_err("yield must lie in (0, 1]"));
    }
    Ok(cost(&parse_route(route)?, eps, yld))
}

#[pyfunction]
fn tree_edit_distance(a: &str, b: &str) -> PyResult<usize> {
    Ok(ted(&parse_route(a)?, &parse_route(b)?))
}

/// (accepted, names of failed rules).
#[pyfunction]
fn filter_reaction(rxn_smiles: &str) -> PyResult<(bool, Vec<String>)> {
    let r = ReactionRecord::parse("py", None, rxn_smiles).map_err(value_err)?;
    let (ok, _, report) = filter_rxn(&r);
    let names = report
        .failed()
        .into_iter()
        .map(|f| serde_json::to_value(f).unwrap().as_str().unwrap().to_string())
        .collect();
    Ok((ok, names))
}

#[pyclass(name = "BpeModel", frozen)]
struct PyBpe {
    inner: CoreBpe,
}

#[pymethods]
impl PyBpe {
    #[new]
    fn new(corpus: Vec<String>, target_vocab: usize) -> PyResult<Self> {
        Ok(PyBpe { inner: bpe_train(&corpus, target_vocab).map_err(value_err)? })
    }

    #[getter]
    fn vocab_size(&self) -> usize {
        self.inner.vocab_size()
    }

    #[getter]
    fn merges(&self) -> Vec<(String, String)> {
        self.inner.merges.clone()
    }

    fn encode(&self, s: &str) -> Vec<u32> {
        bpe_encode(&self.inner, s)
    }

    fn decode(&self, ids: Vec<u32>) -> PyResult<String> {
        bpe_decode(&self.inner, &ids).map_err(value_err)
    }
}

#[pymodule]
fn retroplan_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMolecule>()?;
    m.add_class::<PyTemplate>()?;
    m.add_class::<PySearchConfig>()?;
    m.add_class::<PyTablePolicy>()?;
    m.add_class::<PySearchResult>()?;
    m.add_class::<PyBpe>()?;
    m.add_function(wrap_pyfunction!(canonicalize, m)?)?;
    m.add_function(wrap_pyfunction!(extract_template, m)?)?;
    m.add_function(wrap_pyfunction!(run_search, m)?)?;
    m.add_function(wrap_pyfunction!(puct_score, m)?)?;
    m.add_function(wrap_pyfunction!(q_update, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct_routes, m)?)?;
    m.add_function(wrap_pyfunction!(rank_routes, m)?)?;
    m.add_function(wrap_pyfunction!(route_cost, m)?)?;
    m.add_function(wrap_pyfunction!(tree_edit_distance, m)?)?;
    m.add_function(wrap_pyfunction!(filter_reaction, m)?)?;
    Ok(())
}
