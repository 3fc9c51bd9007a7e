use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::factors::charge_column;
use crate::graphs::WeightedDagSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalChain {
    pub path: Vec<String>,
    pub terminal_charge: String,
    pub weight: f64,
}

/// Directed paths over present factors that end at a parent of the charge
/// node, with at most `max_len` nodes. A path found in several graphs
/// carries the sum of their weights. Sorted by weight, heaviest first, then
/// by path.
pub fn extract_chains(set: &WeightedDagSet, present: &[String], charge: &str, max_len: usize) -> Vec<CausalChain> {
    let node = charge_column(charge);
    let Some(y) = set.nodes.iter().position(|n| *n == node) else {
        return vec![];
    };
    let allowed: Vec<bool> = set.nodes.iter().map(|n| present.contains(n)).collect();
    let mut acc: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
    for (dag, &w) in set.dags.iter().zip(&set.weights) {
        for p in dag.parents(y) {
            for path in dag.paths_ending_at(p, max_len, &|v| allowed[v]) {
                *acc.entry(path).or_insert(0.0) += w;
            }
        }
    }
    let mut chains: Vec<CausalChain> = acc
        .into_iter()
        .map(|(path, weight)| CausalChain {
            path: path.into_iter().map(|v| set.nodes[v].clone()).collect(),
            terminal_charge: charge.to_owned(),
            weight,
        })
        .collect();
    chains.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.path.cmp(&b.path)));
    chains
}
