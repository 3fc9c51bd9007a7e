use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{GciError, Result};
use crate::factors::BackgroundKnowledge;

/// Directed graph over named nodes. Node indices match the variable order of
/// the table the graph was learned from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    nodes: Vec<String>,
    edges: BTreeSet<(usize, usize)>,
}

/// Serialized form: edges as `[from, to]` name pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DagEdges {
    pub edges: Vec<[String; 2]>,
}

impl Dag {
    pub fn new(nodes: Vec<String>) -> Self {
        Dag {
            nodes,
            edges: BTreeSet::new(),
        }
    }

    pub fn from_edges(nodes: Vec<String>, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut d = Dag::new(nodes);
        for (a, b) in edges {
            d.add_edge(a, b);
        }
        d
    }

    pub fn from_named(nodes: &[String], edges: &DagEdges) -> Result<Self> {
        let idx = |n: &str| {
            nodes
                .iter()
                .position(|x| x == n)
                .ok_or_else(|| GciError::UnknownVariable(n.to_owned()))
        };
        let mut d = Dag::new(nodes.to_vec());
        for [a, b] in &edges.edges {
            d.add_edge(idx(a)?, idx(b)?);
        }
        Ok(d)
    }

    pub fn to_named(&self) -> DagEdges {
        DagEdges {
            edges: self
                .edges
                .iter()
                .map(|&(a, b)| [self.nodes[a].clone(), self.nodes[b].clone()])
                .collect(),
        }
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn add_edge(&mut self, from: usize, to: usize) {
        assert!(from != to, "self loop");
        self.edges.insert((from, to));
    }

    pub fn remove_edge(&mut self, from: usize, to: usize) -> bool {
        self.edges.remove(&(from, to))
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains(&(from, to))
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.has_edge(a, b) || self.has_edge(b, a)
    }

    pub fn parents(&self, v: usize) -> Vec<usize> {
        self.edges.iter().filter(|e| e.1 == v).map(|e| e.0).collect()
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        self.edges.range((v, 0)..(v + 1, 0)).map(|e| e.1).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    /// Whether a directed path leads from `from` to `to` (length >= 1).
    pub fn reaches(&self, from: usize, to: usize) -> bool {
        let children = self.child_lists();
        let mut seen = vec![false; self.nodes.len()];
        let mut queue: VecDeque<usize> = children[from].iter().copied().collect();
        while let Some(u) = queue.pop_front() {
            if u == to {
                return true;
            }
            if !std::mem::replace(&mut seen[u], true) {
                queue.extend(children[u].iter().copied());
            }
        }
        false
    }

    pub(crate) fn child_lists(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.nodes.len()];
        for &(a, b) in &self.edges {
            ch[a].push(b);
        }
        ch
    }

    pub fn is_acyclic(&self) -> bool {
        self.find_cycle().is_none()
    }

    /// Some directed cycle as a node sequence (first node not repeated).
    pub fn find_cycle(&self) -> Option<Vec<usize>> {
        let ch = self.child_lists();
        let n = self.nodes.len();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; n];
        let mut parent = vec![usize::MAX; n];
        for root in 0..n {
            if state[root] != 0 {
                continue;
            }
            let mut stack = vec![(root, 0usize)];
            state[root] = 1;
            while let Some(&mut (u, ref mut i)) = stack.last_mut() {
                if *i < ch[u].len() {
                    let v = ch[u][*i];
                    *i += 1;
                    match state[v] {
                        0 => {
                            state[v] = 1;
                            parent[v] = u;
                            stack.push((v, 0));
                        }
                        1 => {
                            let mut cycle = vec![u];
                            let mut w = u;
                            while w != v {
                                w = parent[w];
                                cycle.push(w);
                            }
                            cycle.reverse();
                            return Some(cycle);
                        }
                        _ => {}
                    }
                } else {
                    state[u] = 2;
                    stack.pop();
                }
            }
        }
        None
    }

    pub fn respects(&self, bk: &BackgroundKnowledge) -> bool {
        self.edges
            .iter()
            .all(|&(a, b)| !bk.is_forbidden(&self.nodes[a], &self.nodes[b]))
    }

    /// All simple directed paths of at most `max_nodes` nodes that end at
    /// `end` and use only nodes accepted by `allowed`.
    pub fn paths_ending_at(&self, end: usize, max_nodes: usize, allowed: &dyn Fn(usize) -> bool) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        if max_nodes == 0 || !allowed(end) {
            return out;
        }
        let mut path = vec![end];
        self.extend_backwards(&mut path, max_nodes, allowed, &mut out);
        out
    }

    fn extend_backwards(
        &self,
        path: &mut Vec<usize>,
        max_nodes: usize,
        allowed: &dyn Fn(usize) -> bool,
        out: &mut Vec<Vec<usize>>,
    ) {
        out.push(path.iter().rev().copied().collect());
        if path.len() == max_nodes {
            return;
        }
        let head = *path.last().unwrap();
        for p in self.parents(head) {
            if allowed(p) && !path.contains(&p) {
                path.push(p);
                self.extend_backwards(path, max_nodes, allowed, out);
                path.pop();
            }
        }
    }
}
