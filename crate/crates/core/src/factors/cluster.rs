use std::collections::{BTreeMap, BTreeSet};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::KeywordScore;
use crate::corpus::EmbeddingTable;
use crate::error::{GciError, Result};
use crate::rng;

const RESTARTS: u64 = 10;
const MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub id: String,
    pub members: BTreeSet<String>,
    /// Highest-importance member word.
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorVocabulary {
    pub factors: Vec<Factor>,
    pub word_to_factor: BTreeMap<String, usize>,
}

impl FactorVocabulary {
    /// Builds the vocabulary from member groups; the first word of each
    /// group is its label and id.
    pub fn from_groups(groups: Vec<Vec<String>>) -> Result<Self> {
        let mut factors = Vec::with_capacity(groups.len());
        let mut word_to_factor = BTreeMap::new();
        for (i, g) in groups.into_iter().enumerate() {
            let label = g
                .first()
                .cloned()
                .ok_or_else(|| GciError::invalid("empty factor group"))?;
            for w in &g {
                if word_to_factor.insert(w.clone(), i).is_some() {
                    return Err(GciError::invalid(format!("word {w:?} in two factors")));
                }
            }
            factors.push(Factor {
                id: label.clone(),
                members: g.into_iter().collect(),
                label,
            });
        }
        Ok(FactorVocabulary {
            factors,
            word_to_factor,
        })
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.factors.iter().map(|f| f.id.clone()).collect()
    }

    pub fn factor_of(&self, word: &str) -> Option<usize> {
        self.word_to_factor.get(word).copied()
    }
}

/// Clusters keywords into at most `q` factors.
///
/// Embeddable words are L2-normalized and grouped with k-means (k-means++
/// seeding, 10 restarts, at most 100 Lloyd iterations, lowest within-cluster
/// sum of squares kept). Out-of-vocabulary words become singleton factors.
/// The cluster count is `min(#embeddable, max(1, q - #oov))`; if the total
/// still exceeds `q`, the singletons with the lowest importance are dropped.
pub fn cluster_keywords(
    keywords: &[KeywordScore],
    embeddings: &EmbeddingTable,
    q: usize,
    seed: u64,
) -> Result<FactorVocabulary> {
    if q < 1 {
        return Err(GciError::invalid("q must be at least 1"));
    }
    // importance of a word = max over the charges that selected it
    let mut importance: BTreeMap<&str, f64> = BTreeMap::new();
    for k in keywords {
        let e = importance.entry(k.word.as_str()).or_insert(f64::NEG_INFINITY);
        *e = e.max(k.importance);
    }
    if importance.is_empty() {
        return Err(GciError::invalid("no keywords to cluster"));
    }

    let mut embedded: Vec<(&str, Vec<f64>)> = Vec::new();
    let mut oov: Vec<&str> = Vec::new();
    for &w in importance.keys() {
        match embeddings.get(w) {
            Some(v) => embedded.push((w, normalize(v))),
            None => oov.push(w),
        }
    }

    let mut groups: Vec<Vec<&str>> = Vec::new();
    if !embedded.is_empty() {
        let k = embedded.len().min(q.saturating_sub(oov.len()).max(1));
        let points: Vec<&[f64]> = embedded.iter().map(|(_, v)| v.as_slice()).collect();
        let assignment = kmeans(&points, k, seed);
        let mut by_cluster: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
        for (i, c) in assignment.into_iter().enumerate() {
            by_cluster.entry(c).or_default().push(embedded[i].0);
        }
        groups.extend(by_cluster.into_values());
    }
    groups.extend(oov.iter().map(|w| vec![*w]));

    let max_imp = |g: &[&str]| g.iter().map(|w| importance[w]).fold(f64::NEG_INFINITY, f64::max);
    if groups.len() > q {
        let mut singletons: Vec<usize> = (0..groups.len()).filter(|&i| groups[i].len() == 1).collect();
        singletons.sort_by(|&a, &b| {
            max_imp(&groups[a])
                .total_cmp(&max_imp(&groups[b]))
                .then_with(|| groups[b][0].cmp(groups[a][0]))
        });
        let excess = groups.len() - q;
        let drop: BTreeSet<usize> = singletons.into_iter().take(excess).collect();
        groups = groups
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !drop.contains(i))
            .map(|(_, g)| g)
            .collect();
    }

    // Each group is labeled by its most important word; factors ordered by
    // that importance, descending.
    let mut labeled: Vec<(f64, Vec<String>)> = groups
        .into_iter()
        .map(|mut g| {
            g.sort_by(|a, b| importance[b].total_cmp(&importance[a]).then_with(|| a.cmp(b)));
            (max_imp(&g), g.into_iter().map(str::to_owned).collect())
        })
        .collect();
    labeled.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1[0].cmp(&b.1[0])));
    FactorVocabulary::from_groups(labeled.into_iter().map(|(_, g)| g).collect())
}

fn normalize(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter().map(|x| x / n).collect()
    } else {
        v.to_vec()
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Best-of-restarts k-means; returns the cluster index of every point.
pub(crate) fn kmeans(points: &[&[f64]], k: usize, seed: u64) -> Vec<usize> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    for restart in 0..RESTARTS {
        let (wcss, assignment) = kmeans_once(points, k, seed, restart);
        if best.as_ref().is_none_or(|(b, _)| wcss < *b) {
            best = Some((wcss, assignment));
        }
    }
    best.map(|(_, a)| a).unwrap_or_default()
}

fn kmeans_once(points: &[&[f64]], k: usize, seed: u64, restart: u64) -> (f64, Vec<usize>) {
    let mut rng = rng::stream(seed, restart);
    let n = points.len();
    let k = k.min(n).max(1);

    // k-means++ seeding
    let mut centers: Vec<Vec<f64>> = vec![points[rng.gen_range(0..n)].to_vec()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total <= 0.0 {
            // all remaining points coincide with a center
            rng.gen_range(0..n)
        } else {
            let mut r = rng.gen::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if r < d {
                    pick = i;
                    break;
                }
                r -= d;
            }
            pick
        };
        centers.push(points[next].to_vec());
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, centers.last().unwrap()));
        }
    }

    let mut assignment = vec![0usize; n];
    for iter in 0..MAX_ITER {
        let mut changed = iter == 0;
        for (i, p) in points.iter().enumerate() {
            let c = nearest(p, &centers);
            if c != assignment[i] {
                changed = true;
                assignment[i] = c;
            }
        }
        if !changed {
            break;
        }
        let dim = points[0].len();
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &c) in points.iter().zip(&assignment) {
            counts[c] += 1;
            for (s, x) in sums[c].iter_mut().zip(p.iter()) {
                *s += x;
            }
        }
        for c in 0..k {
            // empty clusters keep their previous center
            if counts[c] > 0 {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }
    let wcss = points
        .iter()
        .zip(&assignment)
        .map(|(p, &c)| sq_dist(p, &centers[c]))
        .sum();
    (wcss, assignment)
}

fn nearest(p: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(p, center);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}
