use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{charge_column, FactorVocabulary};
use crate::corpus::Corpus;
use crate::error::{GciError, Result};

/// Pairwise first-occurrence ordering counts between factors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecedenceStats {
    pub factors: Vec<String>,
    /// `co_count[a][b]`: documents containing both factors.
    pub co_count: Vec<Vec<usize>>,
    /// `after_count[a][b]`: documents where `a` first occurs strictly after `b`.
    pub after_count: Vec<Vec<usize>>,
}

impl PrecedenceStats {
    pub fn co(&self, a: usize, b: usize) -> usize {
        self.co_count[a][b]
    }

    pub fn after(&self, a: usize, b: usize) -> usize {
        self.after_count[a][b]
    }
}

pub fn temporal_precedence(corpus: &Corpus, vocab: &FactorVocabulary) -> PrecedenceStats {
    let q = vocab.len();
    let mut co_count = vec![vec![0usize; q]; q];
    let mut after_count = vec![vec![0usize; q]; q];
    for doc in corpus.documents() {
        let mut first: Vec<Option<usize>> = vec![None; q];
        for (i, t) in doc.tokens.iter().enumerate() {
            if let Some(f) = vocab.factor_of(t) {
                first[f].get_or_insert(i);
            }
        }
        let present: Vec<(usize, usize)> = first
            .iter()
            .enumerate()
            .filter_map(|(f, p)| p.map(|p| (f, p)))
            .collect();
        for &(a, pa) in &present {
            for &(b, pb) in &present {
                if a == b {
                    continue;
                }
                co_count[a][b] += 1;
                if pa > pb {
                    after_count[a][b] += 1;
                }
            }
        }
    }
    PrecedenceStats {
        factors: vocab.ids(),
        co_count,
        after_count,
    }
}

/// Directed edges that may not appear in any learned graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackgroundKnowledge {
    pub forbidden: BTreeSet<(String, String)>,
}

impl BackgroundKnowledge {
    pub fn is_forbidden(&self, from: &str, to: &str) -> bool {
        self.forbidden.contains(&(from.to_owned(), to.to_owned()))
    }

    pub fn forbid(&mut self, from: &str, to: &str) {
        self.forbidden.insert((from.to_owned(), to.to_owned()));
    }

    /// Forbids every edge out of each listed variable.
    pub fn forbid_outgoing(&mut self, sources: &[String], all: &[String]) {
        for s in sources {
            for v in all {
                if v != s {
                    self.forbid(s, v);
                }
            }
        }
    }
}

/// Charge nodes may not cause anything; factor `a` may not cause `b` when
/// `a` is narrated after `b` in at least `threshold` of their (at least
/// `min_co`) co-occurrences.
pub fn background_knowledge(
    stats: &PrecedenceStats,
    charges: &[String],
    threshold: f64,
    min_co: usize,
) -> Result<BackgroundKnowledge> {
    if !(threshold > 0.5 && threshold <= 1.0) {
        return Err(GciError::invalid(format!(
            "temporal threshold must lie in (0.5, 1], got {threshold}"
        )));
    }
    let mut bk = BackgroundKnowledge::default();
    let charge_vars: Vec<String> = charges.iter().map(|c| charge_column(c)).collect();
    let mut all = stats.factors.clone();
    all.extend(charge_vars.iter().cloned());
    bk.forbid_outgoing(&charge_vars, &all);
    let q = stats.factors.len();
    for a in 0..q {
        for b in 0..q {
            if a == b {
                continue;
            }
            let co = stats.co(a, b);
            if co >= min_co.max(1) && stats.after(a, b) as f64 >= threshold * co as f64 {
                bk.forbid(&stats.factors[a], &stats.factors[b]);
            }
        }
    }
    Ok(bk)
}
