use serde::{Deserialize, Serialize};

use super::propensity::{fit_propensity, sigmoid};
use crate::error::{GciError, Result};
use crate::factors::FactorTable;
use crate::graphs::{Dag, WeightedDagSet};

/// Per-graph matching estimate for one treatment → outcome edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeStrength {
    pub treatment: String,
    pub outcome: String,
    pub graph_index: usize,
    pub confounders: Vec<String>,
    pub psi_hat: f64,
    pub n_matched: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MatchConfig {
    /// Largest allowed propensity gap; rows without a partner this close
    /// contribute nothing.
    pub caliper: Option<f64>,
}

/// Parents of `t` in `dag` other than `y`.
pub fn confounder_set(dag: &Dag, t: usize, y: usize) -> Result<Vec<usize>> {
    if !dag.has_edge(t, y) {
        return Err(GciError::invalid(format!(
            "{} -> {} is not an edge of the graph",
            dag.nodes()[t],
            dag.nodes()[y]
        )));
    }
    Ok(dag.parents(t).into_iter().filter(|&p| p != y).collect())
}

/// Gap between propensities `sigmoid(a)` and `sigmoid(b)`, evaluated on
/// the side of the curve where the subtraction is accurate. Symmetric under
/// `(a, b) -> (-a, -b)`.
fn gap(a: f64, b: f64) -> f64 {
    if a + b > 0.0 {
        (sigmoid(-a) - sigmoid(-b)).abs()
    } else {
        (sigmoid(a) - sigmoid(b)).abs()
    }
}

/// Opposite-group index: distinct linear predictors in increasing order,
/// each with the lowest row index attaining it and the outcome counts of
/// all rows sharing it.
struct Pool {
    etas: Vec<f64>,
    rows: Vec<usize>,
    ones: Vec<u32>,
    counts: Vec<u32>,
}

impl Pool {
    fn new(mut members: Vec<(f64, usize, u8)>) -> Self {
        members.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let mut pool = Pool {
            etas: Vec::new(),
            rows: Vec::new(),
            ones: Vec::new(),
            counts: Vec::new(),
        };
        for (e, r, y) in members {
            if pool.etas.last() != Some(&e) {
                pool.etas.push(e);
                pool.rows.push(r);
                pool.ones.push(0);
                pool.counts.push(0);
            }
            *pool.ones.last_mut().unwrap() += u32::from(y);
            *pool.counts.last_mut().unwrap() += 1;
        }
        pool
    }

    /// Nearest distinct propensity as `(entry, gap)`; equal gaps go to the
    /// entry with the lower row index.
    fn nearest(&self, eta: f64) -> (usize, f64) {
        let k = self.etas.partition_point(|&e| e < eta);
        let mut best: Option<(f64, usize)> = None;
        for c in [k.checked_sub(1), Some(k)].into_iter().flatten() {
            if c < self.etas.len() {
                let d = gap(eta, self.etas[c]);
                best = match best {
                    Some((bd, bc)) if bd < d || (bd == d && self.rows[bc] < self.rows[c]) => Some((bd, bc)),
                    _ => Some((d, c)),
                };
            }
        }
        let (d, c) = best.expect("pool is non-empty");
        (c, d)
    }

    /// Mean outcome of the rows sharing entry `c`.
    fn outcome(&self, c: usize) -> f64 {
        f64::from(self.ones[c]) / f64::from(self.counts[c])
    }
}

/// Propensity score matching estimate of the effect of `t` on `y`.
///
/// Every row is matched to the opposite-treatment rows with the closest
/// propensity (with replacement), and the signed outcome differences are
/// averaged over all rows. Opposite rows sharing that exact propensity count
/// as one partner with their mean outcome; between two distinct propensities
/// at equal distance the one holding the lower row index wins.
pub fn estimate_ate(table: &FactorTable, t: usize, y: usize, z: &[usize]) -> Result<EdgeStrength> {
    estimate_ate_with(table, t, y, z, &MatchConfig::default())
}

pub fn estimate_ate_with(
    table: &FactorTable,
    t: usize,
    y: usize,
    z: &[usize],
    cfg: &MatchConfig,
) -> Result<EdgeStrength> {
    let undefined = |reason: &str| GciError::UndefinedStrength {
        treatment: table.name(t).to_owned(),
        outcome: table.name(y).to_owned(),
        reason: reason.to_owned(),
    };
    if t == y || z.contains(&y) {
        return Err(GciError::invalid("outcome cannot be treatment or confounder"));
    }
    let tcol = table.column(t);
    let ycol = table.column(y);
    let n = tcol.len();
    if n == 0 {
        return Err(undefined("no rows"));
    }
    let treated = tcol.iter().filter(|&&v| v == 1).count();
    if treated == 0 || treated == n {
        return Err(undefined("a treatment group is empty"));
    }
    let model = fit_propensity(table, t, z)?;
    let zcols: Vec<&[u8]> = z.iter().map(|&v| table.column(v)).collect();
    let mut zrow = vec![0u8; z.len()];
    let eta: Vec<f64> = (0..n)
        .map(|i| {
            for (k, c) in zcols.iter().enumerate() {
                zrow[k] = c[i];
            }
            model.eta(&zrow)
        })
        .collect();
    let pool = |g: u8| Pool::new((0..n).filter(|&i| tcol[i] == g).map(|i| (eta[i], i, ycol[i])).collect());
    let pools = [pool(0), pool(1)];

    let mut sum = 0.0;
    let mut matched = 0;
    for i in 0..n {
        let opposite = &pools[usize::from(1 - tcol[i])];
        let (c, d) = opposite.nearest(eta[i]);
        if cfg.caliper.is_some_and(|cal| d > cal) {
            continue;
        }
        matched += 1;
        let diff = f64::from(ycol[i]) - opposite.outcome(c);
        sum += if tcol[i] == 1 { diff } else { -diff };
    }
    Ok(EdgeStrength {
        treatment: table.name(t).to_owned(),
        outcome: table.name(y).to_owned(),
        graph_index: 0,
        confounders: model.confounders,
        psi_hat: sum / n as f64,
        n_matched: matched,
    })
}

/// Estimates every edge into an outcome (or every edge when `all_edges`)
/// in every graph. Edges that cannot be estimated get strength 0.
pub fn estimate_all(
    set: &WeightedDagSet,
    table: &FactorTable,
    outcomes: &[String],
    all_edges: bool,
    cfg: &MatchConfig,
) -> Result<Vec<EdgeStrength>> {
    let cols: Vec<usize> = set.nodes.iter().map(|n| table.index_of(n)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (g, dag) in set.dags.iter().enumerate() {
        for &(a, b) in dag.edges() {
            if !all_edges && !outcomes.contains(&set.nodes[b]) {
                continue;
            }
            let z: Vec<usize> = confounder_set(dag, a, b)?.into_iter().map(|v| cols[v]).collect();
            let mut s = match estimate_ate_with(table, cols[a], cols[b], &z, cfg) {
                Ok(s) => s,
                Err(e) => {
                    log::warn!("graph {g}: {e}; recording strength 0");
                    EdgeStrength {
                        treatment: set.nodes[a].clone(),
                        outcome: set.nodes[b].clone(),
                        graph_index: g,
                        confounders: z.iter().map(|&v| table.name(v).to_owned()).collect(),
                        psi_hat: 0.0,
                        n_matched: 0,
                    }
                }
            };
            s.graph_index = g;
            out.push(s);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    fn table(cols: Vec<Vec<u8>>) -> FactorTable {
        let names = (0..cols.len()).map(|i| format!("v{i}")).collect();
        FactorTable::from_columns(names, cols).unwrap()
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn confounder_sets() {
        let d = Dag::from_edges(names(&["T", "Y"]), [(0, 1)]);
        assert!(confounder_set(&d, 0, 1).unwrap().is_empty());
        let d = Dag::from_edges(names(&["C", "T", "Y"]), [(0, 1), (0, 2), (1, 2)]);
        assert_eq!(confounder_set(&d, 1, 2).unwrap(), vec![0]);
        assert!(confounder_set(&d, 2, 1).is_err());
    }

    /// Backdoor check by brute force: every path from T to Y that starts
    /// with an edge into T is blocked by Z, where blocking is evaluated on
    /// the path's colliders and non-colliders.
    fn backdoor_ok(d: &Dag, t: usize, y: usize, z: &[usize]) -> bool {
        let n = d.n_nodes();
        let desc_or_self = |v: usize, set: &[usize]| set.iter().any(|&s| s == v || d.reaches(v, s));
        let mut stack = vec![vec![t]];
        while let Some(path) = stack.pop() {
            let last = *path.last().unwrap();
            if last == y && path.len() > 1 {
                // backdoor paths start with an edge into t
                if !d.has_edge(path[1], path[0]) {
                    continue;
                }
                let open = (1..path.len() - 1).all(|k| {
                    let (p, m, q) = (path[k - 1], path[k], path[k + 1]);
                    let collider = d.has_edge(p, m) && d.has_edge(q, m);
                    if collider {
                        desc_or_self(m, z)
                    } else {
                        !z.contains(&m)
                    }
                });
                if open {
                    return false;
                }
                continue;
            }
            for v in 0..n {
                if d.adjacent(last, v) && !path.contains(&v) {
                    let mut p = path.clone();
                    p.push(v);
                    stack.push(p);
                }
            }
        }
        true
    }

    #[test]
    fn descendant_is_excluded_and_backdoor_holds() {
        let d = Dag::from_edges(names(&["A", "T", "Y", "B"]), [(0, 1), (1, 2), (2, 3)]);
        let z = confounder_set(&d, 1, 2).unwrap();
        assert_eq!(z, vec![0]);
        assert!(backdoor_ok(&d, 1, 2, &z));
        let d = Dag::from_edges(names(&["C", "T", "Y"]), [(0, 1), (0, 2), (1, 2)]);
        assert!(backdoor_ok(&d, 1, 2, &[0]));
        assert!(!backdoor_ok(&d, 1, 2, &[]));
    }

    #[test]
    fn identical_outcome_gives_one() {
        let t: Vec<u8> = (0..100).map(|i| u8::from(i % 3 == 0)).collect();
        let s = estimate_ate(&table(vec![t.clone(), t]), 0, 1, &[]).unwrap();
        assert_eq!(s.psi_hat, 1.0);
        assert_eq!(s.n_matched, 100);
    }

    #[test]
    fn independent_outcome_is_near_zero() {
        let mut rng = crate::rng::stream(8, 0);
        let t: Vec<u8> = (0..5000).map(|_| u8::from(rng.gen_bool(0.5))).collect();
        let y: Vec<u8> = (0..5000).map(|_| u8::from(rng.gen_bool(0.5))).collect();
        let s = estimate_ate(&table(vec![t, y]), 0, 1, &[]).unwrap();
        assert!(s.psi_hat.abs() <= 0.05);
    }

    #[test]
    fn empty_arm_is_undefined() {
        let e = estimate_ate(&table(vec![vec![1; 10], vec![0; 10]]), 0, 1, &[]).unwrap_err();
        assert!(matches!(e, GciError::UndefinedStrength { .. }));
    }

    #[test]
    fn nearest_entry_and_tie_rules() {
        let p = Pool::new(vec![(0.0, 7, 1), (1.0, 3, 0), (0.0, 2, 0), (-1.0, 0, 1)]);
        let (c, _) = p.nearest(0.0);
        assert_eq!(p.rows[c], 2);
        assert_eq!(p.outcome(c), 0.5);
        // closer to 1 than to 0 on the probability scale
        assert_eq!(p.rows[p.nearest(0.5).0], 3);
        // equidistant from -1 and 1: lower row index wins
        let q = Pool::new(vec![(-1.0, 4, 0), (1.0, 1, 0)]);
        assert_eq!(q.rows[q.nearest(0.0).0], 1);
    }

    #[test]
    fn constant_propensity_gives_difference_of_means() {
        let mut rng = crate::rng::stream(9, 0);
        let t: Vec<u8> = (0..300).map(|_| u8::from(rng.gen_bool(0.4))).collect();
        let y: Vec<u8> = t
            .iter()
            .map(|&v| u8::from(rng.gen_bool(0.3 + 0.2 * f64::from(v))))
            .collect();
        let mean = |g: u8| {
            let ys: Vec<f64> = (0..300).filter(|&i| t[i] == g).map(|i| f64::from(y[i])).collect();
            ys.iter().sum::<f64>() / ys.len() as f64
        };
        let s = estimate_ate(&table(vec![t.clone(), y.clone()]), 0, 1, &[]).unwrap();
        assert!((s.psi_hat - (mean(1) - mean(0))).abs() < 1e-12);
    }

    #[test]
    fn estimate_all_skips_non_outcomes_and_degrades() {
        let t: Vec<u8> = (0..50).map(|i| u8::from(i % 2 == 0)).collect();
        let tab = FactorTable::from_columns(names(&["A", "T", "Y"]), vec![vec![1; 50], t.clone(), t]).unwrap();
        let dags = vec![Dag::from_edges(tab.names().to_vec(), [(0, 2), (1, 2), (0, 1)])];
        let set = crate::graphs::weight_graphs(dags, &tab, crate::graphs::WeightMode::Softmax, 0).unwrap();
        let out = estimate_all(&set, &tab, &names(&["Y"]), false, &MatchConfig::default()).unwrap();
        assert_eq!(out.len(), 2);
        // A is constant: strength 0
        assert_eq!(out[0].treatment, "A");
        assert_eq!(out[0].psi_hat, 0.0);
        // T has confounder A, which is constant; the marginal still fits
        assert_eq!(out[1].treatment, "T");
        assert_eq!(out[1].confounders, vec!["A"]);
        assert_eq!(out[1].psi_hat, 1.0);
        let none = Dag::new(tab.names().to_vec());
        let set = crate::graphs::weight_graphs(vec![none], &tab, crate::graphs::WeightMode::Softmax, 0).unwrap();
        assert!(estimate_all(&set, &tab, &names(&["Y"]), false, &MatchConfig::default())
            .unwrap()
            .is_empty());
    }
}
