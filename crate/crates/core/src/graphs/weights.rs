use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dag, DagEdges};
use crate::discovery::local_bic;
use crate::error::{GciError, Result};
use crate::factors::FactorTable;

/// How BIC values turn into graph weights.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// `w_q ∝ exp(BIC_q − max BIC)`, normalized.
    #[default]
    Softmax,
    /// `w_q = BIC_q`, unnormalized.
    Raw,
}

/// Sampled graphs with their scores and weights, all in sampling order.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDagSet {
    pub seed: u64,
    pub nodes: Vec<String>,
    pub dags: Vec<Dag>,
    pub raw_bic: Vec<f64>,
    pub weights: Vec<f64>,
    pub mode: WeightMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedDagSetJson {
    pub seed: u64,
    #[serde(rename = "Q")]
    pub q: usize,
    pub nodes: Vec<String>,
    pub dags: Vec<DagEdges>,
    pub raw_bic: Vec<f64>,
    pub weights: Vec<f64>,
    #[serde(default)]
    pub mode: WeightMode,
}

/// Sum of local BIC terms, matching dag nodes to table columns by name.
pub fn graph_bic(dag: &Dag, table: &FactorTable) -> Result<f64> {
    let cols: Vec<usize> = dag.nodes().iter().map(|n| table.index_of(n)).collect::<Result<_>>()?;
    Ok((0..dag.n_nodes())
        .map(|v| {
            let parents: Vec<usize> = dag.parents(v).into_iter().map(|p| cols[p]).collect();
            local_bic(table, cols[v], &parents)
        })
        .sum())
}

pub fn weights_from_bic(bic: &[f64], mode: WeightMode) -> Vec<f64> {
    match mode {
        WeightMode::Raw => bic.to_vec(),
        WeightMode::Softmax => {
            let max = bic.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = bic.iter().map(|b| (b - max).exp()).collect();
            let z: f64 = e.iter().sum();
            e.into_iter().map(|x| x / z).collect()
        }
    }
}

pub fn weight_graphs(dags: Vec<Dag>, table: &FactorTable, mode: WeightMode, seed: u64) -> Result<WeightedDagSet> {
    let first = dags.first().ok_or_else(|| GciError::invalid("no graphs to weight"))?;
    let nodes = first.nodes().to_vec();
    if dags.iter().any(|d| d.nodes() != nodes.as_slice()) {
        return Err(GciError::invalid("graphs disagree on their node set"));
    }
    let raw_bic = dags.iter().map(|d| graph_bic(d, table)).collect::<Result<Vec<_>>>()?;
    let weights = weights_from_bic(&raw_bic, mode);
    Ok(WeightedDagSet {
        seed,
        nodes,
        dags,
        raw_bic,
        weights,
        mode,
    })
}

impl WeightedDagSet {
    pub fn len(&self) -> usize {
        self.dags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dags.is_empty()
    }

    pub fn to_json(&self) -> WeightedDagSetJson {
        WeightedDagSetJson {
            seed: self.seed,
            q: self.dags.len(),
            nodes: self.nodes.clone(),
            dags: self.dags.iter().map(Dag::to_named).collect(),
            raw_bic: self.raw_bic.clone(),
            weights: self.weights.clone(),
            mode: self.mode,
        }
    }

    pub fn from_json(json: &WeightedDagSetJson) -> Result<Self> {
        let n = json.dags.len();
        if n == 0 || json.q != n || json.raw_bic.len() != n || json.weights.len() != n {
            return Err(GciError::invalid("graph set lengths disagree"));
        }
        let dags = json
            .dags
            .iter()
            .map(|d| Dag::from_named(&json.nodes, d))
            .collect::<Result<Vec<_>>>()?;
        Ok(WeightedDagSet {
            seed: json.seed,
            nodes: json.nodes.clone(),
            dags,
            raw_bic: json.raw_bic.clone(),
            weights: json.weights.clone(),
            mode: json.mode,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(&self.to_json())?;
        std::fs::write(path, text + "\n").map_err(|e| GciError::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| GciError::io(path, e))?;
        Self::from_json(&serde_json::from_str(&text)?)
    }
}
