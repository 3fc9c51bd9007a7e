use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{GciError, Result};

/// Endpoint mark of a PAG edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mark {
    Tail,
    Arrow,
    Circle,
}

/// The four edge kinds a PAG may contain, read from `a` to `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    /// a → b
    Directed,
    /// a ← b
    DirectedBack,
    /// a ↔ b
    Bidirected,
    /// a ○→ b
    PartiallyDirected,
    /// a ←○ b
    PartiallyDirectedBack,
    /// a ○–○ b
    Nondirected,
}

/// Partial ancestral graph. Each unordered pair carries at most one edge,
/// stored under `(a, b)` with `a < b` as `(mark at a, mark at b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pag {
    nodes: Vec<String>,
    edges: BTreeMap<(usize, usize), (Mark, Mark)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PagEdgeJson {
    pub a: String,
    pub b: String,
    pub mark_a: Mark,
    pub mark_b: Mark,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PagJson {
    pub nodes: Vec<String>,
    pub edges: Vec<PagEdgeJson>,
}

impl Pag {
    pub fn new(nodes: Vec<String>) -> Self {
        Pag {
            nodes,
            edges: BTreeMap::new(),
        }
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    /// Edges as `(a, b, mark at a, mark at b)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, Mark, Mark)> + '_ {
        self.edges.iter().map(|(&(a, b), &(ma, mb))| (a, b, ma, mb))
    }

    pub fn add_edge(&mut self, a: usize, b: usize, mark_a: Mark, mark_b: Mark) {
        assert!(a != b, "self loop");
        if a < b {
            self.edges.insert((a, b), (mark_a, mark_b));
        } else {
            self.edges.insert((b, a), (mark_b, mark_a));
        }
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) {
        self.edges.remove(&(a.min(b), a.max(b)));
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.edges.contains_key(&(a.min(b), a.max(b)))
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&u| u != v && self.adjacent(u, v))
            .collect()
    }

    /// Mark at `at` on the edge between `other` and `at`.
    pub fn mark(&self, other: usize, at: usize) -> Option<Mark> {
        if other < at {
            self.edges.get(&(other, at)).map(|m| m.1)
        } else {
            self.edges.get(&(at, other)).map(|m| m.0)
        }
    }

    pub(crate) fn set_mark(&mut self, other: usize, at: usize, mark: Mark) {
        if other < at {
            if let Some(m) = self.edges.get_mut(&(other, at)) {
                m.1 = mark;
            }
        } else if let Some(m) = self.edges.get_mut(&(at, other)) {
            m.0 = mark;
        }
    }

    pub fn kind(&self, a: usize, b: usize) -> Option<EdgeKind> {
        let ma = self.mark(b, a)?;
        let mb = self.mark(a, b)?;
        edge_kind(ma, mb)
    }

    /// a → b
    pub fn is_directed(&self, a: usize, b: usize) -> bool {
        self.kind(a, b) == Some(EdgeKind::Directed)
    }

    /// Every edge is one of →, ↔, ○→ or ○–○ (in either orientation).
    pub fn has_valid_marks(&self) -> bool {
        self.edges.values().all(|&(a, b)| edge_kind(a, b).is_some())
    }

    pub fn to_json(&self) -> PagJson {
        PagJson {
            nodes: self.nodes.clone(),
            edges: self
                .edges
                .iter()
                .map(|(&(a, b), &(ma, mb))| PagEdgeJson {
                    a: self.nodes[a].clone(),
                    b: self.nodes[b].clone(),
                    mark_a: ma,
                    mark_b: mb,
                })
                .collect(),
        }
    }

    pub fn from_json(json: &PagJson) -> Result<Self> {
        let mut pag = Pag::new(json.nodes.clone());
        let idx = |n: &str| {
            json.nodes
                .iter()
                .position(|x| x == n)
                .ok_or_else(|| GciError::UnknownVariable(n.to_owned()))
        };
        let mut seen = BTreeSet::new();
        for e in &json.edges {
            let (a, b) = (idx(&e.a)?, idx(&e.b)?);
            if a == b || !seen.insert((a.min(b), a.max(b))) {
                return Err(GciError::invalid(format!("bad edge {}-{}", e.a, e.b)));
            }
            if edge_kind(e.mark_a, e.mark_b).is_none() {
                return Err(GciError::invalid(format!(
                    "edge {}-{} has marks outside the four PAG kinds",
                    e.a, e.b
                )));
            }
            pag.add_edge(a, b, e.mark_a, e.mark_b);
        }
        Ok(pag)
    }
}

fn edge_kind(at_a: Mark, at_b: Mark) -> Option<EdgeKind> {
    use Mark::*;
    match (at_a, at_b) {
        (Tail, Arrow) => Some(EdgeKind::Directed),
        (Arrow, Tail) => Some(EdgeKind::DirectedBack),
        (Arrow, Arrow) => Some(EdgeKind::Bidirected),
        (Circle, Arrow) => Some(EdgeKind::PartiallyDirected),
        (Arrow, Circle) => Some(EdgeKind::PartiallyDirectedBack),
        (Circle, Circle) => Some(EdgeKind::Nondirected),
        _ => None,
    }
}

/// Conditioning sets that separated each removed pair, keyed `(min, max)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SepsetMap {
    sets: BTreeMap<(usize, usize), Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SepsetJson {
    pub a: String,
    pub b: String,
    pub sepset: Vec<String>,
}

impl SepsetMap {
    pub fn insert(&mut self, a: usize, b: usize, set: Vec<usize>) {
        self.sets.insert((a.min(b), a.max(b)), set);
    }

    pub fn get(&self, a: usize, b: usize) -> Option<&[usize]> {
        self.sets.get(&(a.min(b), a.max(b))).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.sets.keys().copied()
    }

    pub fn to_json(&self, nodes: &[String]) -> Vec<SepsetJson> {
        self.sets
            .iter()
            .map(|(&(a, b), s)| SepsetJson {
                a: nodes[a].clone(),
                b: nodes[b].clone(),
                sepset: s.iter().map(|&v| nodes[v].clone()).collect(),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marks_and_kinds() {
        let mut p = Pag::new(vec!["A".into(), "B".into(), "C".into()]);
        p.add_edge(2, 0, Mark::Circle, Mark::Arrow); // C o-> A
        assert_eq!(p.mark(2, 0), Some(Mark::Arrow));
        assert_eq!(p.mark(0, 2), Some(Mark::Circle));
        assert_eq!(p.kind(2, 0), Some(EdgeKind::PartiallyDirected));
        assert_eq!(p.kind(0, 2), Some(EdgeKind::PartiallyDirectedBack));
        p.set_mark(0, 2, Mark::Tail);
        assert!(p.is_directed(2, 0));
        assert!(p.has_valid_marks());
        p.add_edge(0, 1, Mark::Tail, Mark::Tail);
        assert!(!p.has_valid_marks());
    }

    #[test]
    fn json_roundtrip_and_rejection() {
        let mut p = Pag::new(vec!["A".into(), "B".into()]);
        p.add_edge(0, 1, Mark::Arrow, Mark::Arrow);
        let j = p.to_json();
        assert_eq!(Pag::from_json(&j).unwrap(), p);
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.contains("\"mark_a\":\"arrow\""));
        let mut bad = j.clone();
        bad.edges[0].mark_a = Mark::Tail;
        bad.edges[0].mark_b = Mark::Circle;
        assert!(Pag::from_json(&bad).is_err());
    }
}
