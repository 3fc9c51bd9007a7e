use std::cmp::Ordering;
use std::collections::HashMap;

use super::local_bic;
use crate::factors::{BackgroundKnowledge, FactorTable};
use crate::graphs::Dag;

const MAX_PARENTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Move {
    Add,
    Delete,
    Reverse,
}

struct ScoreCache<'a> {
    table: &'a FactorTable,
    cache: HashMap<(usize, Vec<usize>), f64>,
}

impl ScoreCache<'_> {
    fn local(&mut self, node: usize, parents: &[usize]) -> f64 {
        let mut key = parents.to_vec();
        key.sort_unstable();
        if let Some(&s) = self.cache.get(&(node, key.clone())) {
            return s;
        }
        let s = local_bic(self.table, node, &key);
        self.cache.insert((node, key), s);
        s
    }
}

/// Greedy hill-climbing over DAGs on total BIC.
///
/// Each step applies the single addition, deletion or reversal with the
/// largest positive gain that keeps the graph acyclic and respects `bk`.
/// Gains within a relative 1e-9 of the best are ties, broken by the
/// lexicographic order of (from, to, move) by variable name.
pub fn greedy_init(table: &FactorTable, bk: &BackgroundKnowledge) -> Dag {
    let n = table.n_vars();
    let names = table.names().to_vec();
    let mut dag = Dag::new(names.clone());
    let mut cache = ScoreCache {
        table,
        cache: HashMap::new(),
    };
    let forbidden: Vec<Vec<bool>> = (0..n)
        .map(|a| (0..n).map(|b| bk.is_forbidden(&names[a], &names[b])).collect())
        .collect();

    loop {
        let reach = reachability(&dag);
        let parents: Vec<Vec<usize>> = (0..n).map(|v| dag.parents(v)).collect();
        let base: Vec<f64> = (0..n).map(|v| cache.local(v, &parents[v])).collect();
        let mut candidates: Vec<(f64, usize, usize, Move)> = Vec::new();
        for u in 0..n {
            for v in 0..n {
                if u == v {
                    continue;
                }
                if dag.has_edge(u, v) {
                    let without: Vec<usize> = parents[v].iter().copied().filter(|&p| p != u).collect();
                    let del = cache.local(v, &without) - base[v];
                    candidates.push((del, u, v, Move::Delete));
                    // reversal is acyclic iff no other path u ~> v exists
                    let other_path = dag.children(u).into_iter().any(|c| c != v && reach[c][v]);
                    if !forbidden[v][u] && !other_path && parents[u].len() < MAX_PARENTS {
                        let mut with = parents[u].clone();
                        with.push(v);
                        let gain = del + cache.local(u, &with) - base[u];
                        candidates.push((gain, u, v, Move::Reverse));
                    }
                } else if !dag.has_edge(v, u) && !forbidden[u][v] && !reach[v][u] && parents[v].len() < MAX_PARENTS {
                    let mut with = parents[v].clone();
                    with.push(u);
                    let gain = cache.local(v, &with) - base[v];
                    candidates.push((gain, u, v, Move::Add));
                }
            }
        }
        let best = candidates.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
        let tol = 1e-9 * best.abs().max(1.0);
        if best.is_nan() || best <= tol {
            break;
        }
        let chosen = candidates
            .iter()
            .filter(|c| c.0 >= best - tol)
            .min_by(|a, b| {
                names[a.1]
                    .cmp(&names[b.1])
                    .then_with(|| names[a.2].cmp(&names[b.2]))
                    .then_with(|| a.3.cmp(&b.3))
                    .then(Ordering::Equal)
            })
            .copied()
            .unwrap();
        let (_, u, v, mv) = chosen;
        match mv {
            Move::Add => dag.add_edge(u, v),
            Move::Delete => {
                dag.remove_edge(u, v);
            }
            Move::Reverse => {
                dag.remove_edge(u, v);
                dag.add_edge(v, u);
            }
        }
    }
    dag
}

/// `reach[a][b]`: a directed path of length >= 1 leads from a to b.
fn reachability(dag: &Dag) -> Vec<Vec<bool>> {
    let n = dag.n_nodes();
    let ch = dag.child_lists();
    let mut reach = vec![vec![false; n]; n];
    for (s, row) in reach.iter_mut().enumerate() {
        let mut stack: Vec<usize> = ch[s].clone();
        while let Some(u) = stack.pop() {
            if !row[u] {
                row[u] = true;
                stack.extend(ch[u].iter().copied());
            }
        }
    }
    reach
}
