use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{GciError, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub max_depth: usize,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 100,
            max_depth: 8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TreeNode {
    Leaf {
        charge: usize,
    },
    /// `x[feature] <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub charges: Vec<String>,
    pub n_features: usize,
    pub n_trees: usize,
    pub max_depth: usize,
    pub seed: u64,
    pub trees: Vec<Tree>,
}

fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn majority(counts: &[usize]) -> usize {
    // first maximum: ties go to the earlier charge
    let mut best = 0;
    for (c, &v) in counts.iter().enumerate() {
        if v > counts[best] {
            best = c;
        }
    }
    best
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    n_try: usize,
    max_depth: usize,
    nodes: Vec<TreeNode>,
}

impl Builder<'_> {
    fn grow(&mut self, rows: Vec<usize>, depth: usize, rng: &mut rng::Rng) -> usize {
        let mut counts = vec![0; self.n_classes];
        for &r in &rows {
            counts[self.y[r]] += 1;
        }
        let id = self.nodes.len();
        self.nodes.push(TreeNode::Leaf {
            charge: majority(&counts),
        });
        if depth >= self.max_depth || counts.iter().filter(|&&c| c > 0).count() <= 1 {
            return id;
        }
        let n_features = self.x[0].len();
        let mut features = sample(rng, n_features, self.n_try.min(n_features)).into_vec();
        features.sort_unstable();
        let Some((feature, threshold)) = self.best_split(&rows, &features, &counts) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows.into_iter().partition(|&i| self.x[i][feature] <= threshold);
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[id] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }

    /// Lowest weighted Gini split among `features`, if any separates rows.
    fn best_split(&self, rows: &[usize], features: &[usize], total: &[usize]) -> Option<(usize, f64)> {
        let n = rows.len();
        let mut best: Option<(f64, usize, f64)> = None;
        for &f in features {
            let mut sorted: Vec<(f64, usize)> = rows.iter().map(|&r| (self.x[r][f], self.y[r])).collect();
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left = vec![0; self.n_classes];
            for k in 0..n - 1 {
                left[sorted[k].1] += 1;
                if sorted[k].0 == sorted[k + 1].0 {
                    continue;
                }
                let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
                let nl = k + 1;
                let imp = (nl as f64 * gini(&left, nl) + (n - nl) as f64 * gini(&right, n - nl)) / n as f64;
                if best.is_none_or(|b| imp < b.0) {
                    best = Some((imp, f, (sorted[k].0 + sorted[k + 1].0) / 2.0));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

/// Random forest over score vectors: bootstrap rows per tree, `⌈√M⌉`
/// candidate features per split, Gini impurity, depth cap.
pub fn train_forest(x: &[Vec<f64>], labels: &[usize], charges: Vec<String>, cfg: &ForestConfig) -> Result<ForestModel> {
    let m = charges.len();
    if m < 2 {
        return Err(GciError::invalid("need at least two charges"));
    }
    if x.len() != labels.len() || x.is_empty() {
        return Err(GciError::invalid(
            "scores and labels must be non-empty and of equal length",
        ));
    }
    let n_features = x[0].len();
    if n_features == 0 || x.iter().any(|r| r.len() != n_features) {
        return Err(GciError::invalid("score vectors must share a non-zero length"));
    }
    if labels.iter().any(|&l| l >= m) {
        return Err(GciError::invalid("label outside the charge list"));
    }
    for (c, name) in charges.iter().enumerate() {
        if !labels.contains(&c) {
            return Err(GciError::invalid(format!("no training example for charge {name:?}")));
        }
    }
    if cfg.n_trees == 0 {
        return Err(GciError::invalid("n_trees must be at least 1"));
    }
    let n_try = (n_features as f64).sqrt().ceil() as usize;
    let n = x.len();
    let trees = (0..cfg.n_trees)
        .map(|t| {
            let mut rng = rng::stream(cfg.seed, t as u64);
            let rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            let mut b = Builder {
                x,
                y: labels,
                n_classes: m,
                n_try,
                max_depth: cfg.max_depth,
                nodes: Vec::new(),
            };
            b.grow(rows, 0, &mut rng);
            Tree { nodes: b.nodes }
        })
        .collect();
    Ok(ForestModel {
        charges,
        n_features,
        n_trees: cfg.n_trees,
        max_depth: cfg.max_depth,
        seed: cfg.seed,
        trees,
    })
}

impl Tree {
    pub fn predict(&self, x: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { charge } => return *charge,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => i = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(t: &Tree, i: usize) -> usize {
            match &t.nodes[i] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + go(t, *left).max(go(t, *right)),
            }
        }
        go(self, 0)
    }
}

impl ForestModel {
    /// Majority vote; ties go to the charge listed first.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.n_features {
            return Err(GciError::invalid(format!(
                "score vector has {} entries, model expects {}",
                x.len(),
                self.n_features
            )));
        }
        let mut votes = vec![0; self.charges.len()];
        for t in &self.trees {
            votes[t.predict(x)] += 1;
        }
        Ok(majority(&votes))
    }

    /// The same forest with every threshold multiplied by `c`.
    pub fn scaled(&self, c: f64) -> ForestModel {
        let mut m = self.clone();
        for t in &mut m.trees {
            for n in &mut t.nodes {
                if let TreeNode::Split { threshold, .. } = n {
                    *threshold *= c;
                }
            }
        }
        m
    }
}
