//! Python bindings. Structured results come back as plain dicts and lists.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde::Serialize;

use gci_core::corpus::{load_corpus, load_embeddings, EmbeddingTable};
use gci_core::discovery::{self, DiscoveryConfig};
use gci_core::effects::{self, RefuterMode};
use gci_core::factors::{self, BackgroundKnowledge, FactorVocabulary};
use gci_core::graphs::{self, DotGraph, WeightMode};
use gci_core::pipeline::{self, PipelineConfig};
use gci_core::{decision, synth};

create_exception!(gci, GciError, PyException);

fn err(e: gci_core::GciError) -> PyErr {
    GciError::new_err(e.to_string())
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<PyObject> {
    let text = serde_json::to_string(value).map_err(|e| GciError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn knowledge(forbidden: Vec<(String, String)>) -> BackgroundKnowledge {
    BackgroundKnowledge {
        forbidden: forbidden.into_iter().collect(),
    }
}

fn weight_mode(mode: &str) -> PyResult<WeightMode> {
    match mode {
        "softmax" => Ok(WeightMode::Softmax),
        "raw" => Ok(WeightMode::Raw),
        other => Err(GciError::new_err(format!("unknown weight mode {other:?}"))),
    }
}

/// Binary factor table; charge columns are named `Y:<charge>`.
#[pyclass(module = "gci")]
#[derive(Clone)]
struct FactorTable(factors::FactorTable);

#[pymethods]
impl FactorTable {
    #[new]
    fn new(names: Vec<String>, columns: Vec<Vec<u8>>) -> PyResult<Self> {
        factors::FactorTable::from_columns(names, columns)
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn read_csv(path: PathBuf) -> PyResult<Self> {
        factors::FactorTable::read_csv(path).map(Self).map_err(err)
    }

    fn write_csv(&self, path: PathBuf) -> PyResult<()> {
        self.0.write_csv(path).map_err(err)
    }

    #[getter]
    fn names(&self) -> Vec<String> {
        self.0.names().to_vec()
    }

    #[getter]
    fn n_rows(&self) -> usize {
        self.0.n_rows()
    }

    fn column(&self, name: &str) -> PyResult<Vec<u8>> {
        let v = self.0.index_of(name).map_err(err)?;
        Ok(self.0.column(v).to_vec())
    }

    fn __len__(&self) -> usize {
        self.0.n_rows()
    }

    fn __repr__(&self) -> String {
        format!("FactorTable({} rows, {:?})", self.0.n_rows(), self.0.names())
    }
}

impl FactorTable {
    fn var(&self, name: &str) -> PyResult<usize> {
        self.0.index_of(name).map_err(err)
    }
}

/// Partial ancestral graph with its separating sets.
#[pyclass(module = "gci")]
struct Pag {
    pag: discovery::Pag,
    sepsets: discovery::SepsetMap,
}

#[pymethods]
impl Pag {
    #[getter]
    fn nodes(&self) -> Vec<String> {
        self.pag.nodes().to_vec()
    }

    /// `(a, b, mark_a, mark_b)` with marks "tail", "arrow" or "circle".
    fn edges(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_py(py, &self.pag.to_json().edges)
    }

    fn sepsets(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_py(py, &self.sepsets.to_json(self.pag.nodes()))
    }

    fn to_dot(&self) -> String {
        graphs::export_dot(DotGraph::Pag(&self.pag))
    }

    fn __repr__(&self) -> String {
        format!("Pag({} nodes, {} edges)", self.pag.n_nodes(), self.pag.n_edges())
    }
}

/// Sampled DAGs with their BIC-derived weights.
#[pyclass(module = "gci")]
struct WeightedDagSet(graphs::WeightedDagSet);

#[pymethods]
impl WeightedDagSet {
    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        graphs::WeightedDagSet::read(path).map(Self).map_err(err)
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        self.0.write(path).map_err(err)
    }

    #[getter]
    fn nodes(&self) -> Vec<String> {
        self.0.nodes.clone()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.0.weights.clone()
    }

    #[getter]
    fn raw_bic(&self) -> Vec<f64> {
        self.0.raw_bic.clone()
    }

    /// Directed edges of graph `i` as `(from, to)` names.
    fn edges(&self, i: usize) -> PyResult<Vec<(String, String)>> {
        let dag = self
            .0
            .dags
            .get(i)
            .ok_or_else(|| GciError::new_err(format!("index {i} out of range")))?;
        Ok(dag.to_named().edges.into_iter().map(|[a, b]| (a, b)).collect())
    }

    fn to_dot(&self, i: usize) -> PyResult<String> {
        let dag = self
            .0
            .dags
            .get(i)
            .ok_or_else(|| GciError::new_err(format!("index {i} out of range")))?;
        Ok(graphs::export_dot(DotGraph::Dag(dag)))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

/// Aggregated causal strengths, factors by charge columns.
#[pyclass(module = "gci")]
struct StrengthMatrix(effects::StrengthMatrix);

#[pymethods]
impl StrengthMatrix {
    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        effects::StrengthMatrix::read_json(path).map(Self).map_err(err)
    }

    #[getter]
    fn factors(&self) -> Vec<String> {
        self.0.factors.clone()
    }

    #[getter]
    fn outcomes(&self) -> Vec<String> {
        self.0.outcomes.clone()
    }

    fn get(&self, factor: &str, outcome: &str) -> f64 {
        self.0.get(factor, outcome)
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<PyObject> {
        to_py(py, &self.0)
    }
}

/// G² conditional independence test of `x` and `y` given `s`.
#[pyfunction]
#[pyo3(signature = (table, x, y, s = vec![], alpha = 0.05))]
fn ci_test(py: Python<'_>, table: &FactorTable, x: &str, y: &str, s: Vec<String>, alpha: f64) -> PyResult<PyObject> {
    let cfg = DiscoveryConfig {
        alpha,
        ..Default::default()
    };
    let s: Vec<usize> = s.iter().map(|n| table.var(n)).collect::<PyResult<_>>()?;
    let r = discovery::ci_test(&table.0, table.var(x)?, table.var(y)?, &s, &cfg).map_err(err)?;
    let mut d = BTreeMap::new();
    d.insert("statistic", r.statistic);
    d.insert("df", r.df as f64);
    d.insert("p_value", r.p_value);
    let out = to_py(py, &d)?;
    let dict = out.bind(py);
    dict.set_item("independent", r.independent)?;
    dict.set_item("uninformative", r.uninformative)?;
    Ok(out)
}

/// Learns a PAG. `forbidden` lists directed edges `(from, to)` that may not
/// appear.
#[pyfunction]
#[pyo3(signature = (table, forbidden = vec![], alpha = 0.05, max_cond = 3, use_score_init = true))]
fn discover(
    table: &FactorTable,
    forbidden: Vec<(String, String)>,
    alpha: f64,
    max_cond: usize,
    use_score_init: bool,
) -> PyResult<Pag> {
    let cfg = DiscoveryConfig {
        alpha,
        max_cond,
        use_score_init,
        ..Default::default()
    };
    let d = discovery::discover(&table.0, &knowledge(forbidden), &cfg).map_err(err)?;
    Ok(Pag {
        pag: d.pag,
        sepsets: d.sepsets,
    })
}

/// Samples `q` DAGs from the PAG and weights them on `table`.
#[pyfunction]
#[pyo3(signature = (pag, table, q = 5, seed = 0, forbidden = vec![], mode = "softmax"))]
fn sample_dags(
    pag: &Pag,
    table: &FactorTable,
    q: usize,
    seed: u64,
    forbidden: Vec<(String, String)>,
    mode: &str,
) -> PyResult<WeightedDagSet> {
    let dags = graphs::sample_dags(&pag.pag, q, &knowledge(forbidden), seed);
    graphs::weight_graphs(dags, &table.0, weight_mode(mode)?, seed)
        .map(WeightedDagSet)
        .map_err(err)
}

/// Matched estimate of the effect of `treatment` on `outcome` adjusting for
/// `confounders`.
#[pyfunction]
#[pyo3(signature = (table, treatment, outcome, confounders = vec![]))]
fn estimate_ate(table: &FactorTable, treatment: &str, outcome: &str, confounders: Vec<String>) -> PyResult<f64> {
    let z: Vec<usize> = confounders.iter().map(|n| table.var(n)).collect::<PyResult<_>>()?;
    effects::estimate_ate(&table.0, table.var(treatment)?, table.var(outcome)?, &z)
        .map(|s| s.psi_hat)
        .map_err(err)
}

/// Per-edge strengths over every graph, aggregated by graph weight.
#[pyfunction]
fn estimate_strengths(dags: &WeightedDagSet, table: &FactorTable) -> PyResult<StrengthMatrix> {
    let outcomes: Vec<String> = table.0.outcome_vars().map(|v| table.0.name(v).to_owned()).collect();
    let all = effects::estimate_all(&dags.0, &table.0, &outcomes, false, &Default::default()).map_err(err)?;
    effects::aggregate_strengths(&all, &dags.0, &outcomes)
        .map(StrengthMatrix)
        .map_err(err)
}

/// Runs a refuter: "random_confounder", "placebo_treatment" or "data_subset".
#[pyfunction]
#[pyo3(signature = (table, treatment, outcome, confounders, mode, repeats = 10, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn refute(
    py: Python<'_>,
    table: &FactorTable,
    treatment: &str,
    outcome: &str,
    confounders: Vec<String>,
    mode: &str,
    repeats: usize,
    seed: u64,
) -> PyResult<PyObject> {
    let mode: RefuterMode = serde_json::from_value(serde_json::Value::String(mode.to_owned()))
        .map_err(|_| GciError::new_err(format!("unknown refuter {mode:?}")))?;
    let z: Vec<usize> = confounders.iter().map(|n| table.var(n)).collect::<PyResult<_>>()?;
    let r = effects::refute(
        &table.0,
        table.var(treatment)?,
        table.var(outcome)?,
        &z,
        mode,
        repeats,
        seed,
    )
    .map_err(err)?;
    to_py(py, &r)
}

/// Weighted causal chains over `present` factors ending at a cause of `charge`.
#[pyfunction]
#[pyo3(signature = (dags, present, charge, max_len = 4))]
fn extract_chains(
    py: Python<'_>,
    dags: &WeightedDagSet,
    present: Vec<String>,
    charge: &str,
    max_len: usize,
) -> PyResult<PyObject> {
    to_py(py, &decision::extract_chains(&dags.0, &present, charge, max_len))
}

/// Attention targets for `tokens`; `groups` lists each factor's member words,
/// the first word being its id.
#[pyfunction]
fn attention_targets(
    tokens: Vec<String>,
    groups: Vec<Vec<String>>,
    strengths: &StrengthMatrix,
    gold: &str,
) -> PyResult<Vec<f64>> {
    let vocab = FactorVocabulary::from_groups(groups).map_err(err)?;
    Ok(decision::attention_targets(&tokens, &vocab, &strengths.0, gold))
}

#[pyfunction]
fn fairness_metrics(
    py: Python<'_>,
    predictions: Vec<String>,
    labels: Vec<String>,
    groups: Vec<String>,
    positive_charge: &str,
) -> PyResult<PyObject> {
    let r = decision::fairness_metrics(&predictions, &labels, &groups, positive_charge).map_err(err)?;
    to_py(py, &r)
}

/// Samples a built-in scenario. Returns the observed table and the ground
/// truth record.
#[pyfunction]
#[pyo3(signature = (scenario, n, seed = 0))]
fn synth_generate(py: Python<'_>, scenario: &str, n: usize, seed: u64) -> PyResult<(FactorTable, PyObject)> {
    let spec = synth::scenarios::by_name(scenario)
        .ok_or_else(|| GciError::new_err(format!("unknown scenario {scenario:?}")))?;
    let out = synth::synth_generate(&spec, n, seed).map_err(err)?;
    Ok((FactorTable(out.table), to_py(py, &out.truth)?))
}

#[pyfunction]
fn scenarios() -> Vec<&'static str> {
    synth::scenarios::NAMES.to_vec()
}

/// Runs every stage into `out` and returns the held-out metrics. `config` is
/// a dict of pipeline settings; missing keys take their defaults.
#[pyfunction]
#[pyo3(signature = (corpus, charges, out, embeddings = None, config = None, seed = None))]
fn run_pipeline(
    py: Python<'_>,
    corpus: PathBuf,
    charges: PathBuf,
    out: PathBuf,
    embeddings: Option<PathBuf>,
    config: Option<&Bound<'_, PyAny>>,
    seed: Option<u64>,
) -> PyResult<PyObject> {
    let mut cfg = match config {
        Some(c) => {
            let text: String = py.import("json")?.call_method1("dumps", (c,))?.extract()?;
            serde_json::from_str::<PipelineConfig>(&text).map_err(|e| GciError::new_err(e.to_string()))?
        }
        None => PipelineConfig::default(),
    };
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    let c = load_corpus(&corpus, &charges).map_err(err)?;
    let emb = match &embeddings {
        Some(p) => load_embeddings(p).map_err(err)?,
        None => EmbeddingTable::empty(1),
    };
    let inputs = [Some(&corpus), Some(&charges), embeddings.as_ref()]
        .into_iter()
        .flatten()
        .map(|p| p.display().to_string())
        .collect();
    py.allow_threads(|| pipeline::run_pipeline_on(&c, &emb, &cfg, inputs, &out))
        .map_err(err)?;
    let m: pipeline::Metrics = pipeline::read_json(out.join(pipeline::METRICS)).map_err(err)?;
    to_py(py, &m)
}

#[pymodule]
fn gci(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("GciError", m.py().get_type::<GciError>())?;
    m.add_class::<FactorTable>()?;
    m.add_class::<Pag>()?;
    m.add_class::<WeightedDagSet>()?;
    m.add_class::<StrengthMatrix>()?;
    m.add_function(wrap_pyfunction!(ci_test, m)?)?;
    m.add_function(wrap_pyfunction!(discover, m)?)?;
    m.add_function(wrap_pyfunction!(sample_dags, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_ate, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_strengths, m)?)?;
    m.add_function(wrap_pyfunction!(refute, m)?)?;
    m.add_function(wrap_pyfunction!(extract_chains, m)?)?;
    m.add_function(wrap_pyfunction!(attention_targets, m)?)?;
    m.add_function(wrap_pyfunction!(fairness_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(synth_generate, m)?)?;
    m.add_function(wrap_pyfunction!(scenarios, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    Ok(())
}
