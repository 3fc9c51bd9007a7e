use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::Dag;
use crate::discovery::{Mark, Pag};

/// Something [`export_dot`] can render.
#[derive(Debug, Clone, Copy)]
pub enum DotGraph<'a> {
    Pag(&'a Pag),
    Dag(&'a Dag),
    /// A DAG with edge labels keyed by `(from, to)` names.
    Annotated(&'a Dag, &'a BTreeMap<(String, String), String>),
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn arrow(m: Mark) -> &'static str {
    match m {
        Mark::Tail => "none",
        Mark::Arrow => "normal",
        Mark::Circle => "odot",
    }
}

/// DOT text for a graph. PAG edges use `dir=both` and show both endpoint
/// marks: tail as `none`, arrow as `normal`, circle as `odot`.
pub fn export_dot(graph: DotGraph<'_>) -> String {
    let nodes = match graph {
        DotGraph::Pag(p) => p.nodes(),
        DotGraph::Dag(d) | DotGraph::Annotated(d, _) => d.nodes(),
    };
    let mut out = String::from("digraph g {\n");
    for n in nodes {
        let _ = writeln!(out, "  {};", quote(n));
    }
    match graph {
        DotGraph::Pag(p) => {
            for (a, b, ma, mb) in p.edges() {
                let _ = writeln!(
                    out,
                    "  {} -> {} [dir=both, arrowtail={}, arrowhead={}];",
                    quote(&nodes[a]),
                    quote(&nodes[b]),
                    arrow(ma),
                    arrow(mb)
                );
            }
        }
        DotGraph::Dag(d) => {
            for &(a, b) in d.edges() {
                let _ = writeln!(
                    out,
                    "  {} -> {} [arrowhead=normal];",
                    quote(&nodes[a]),
                    quote(&nodes[b])
                );
            }
        }
        DotGraph::Annotated(d, labels) => {
            for &(a, b) in d.edges() {
                let _ = write!(out, "  {} -> {} [arrowhead=normal", quote(&nodes[a]), quote(&nodes[b]));
                if let Some(l) = labels.get(&(nodes[a].clone(), nodes[b].clone())) {
                    let _ = write!(out, ", label={}", quote(l));
                }
                out.push_str("];\n");
            }
        }
    }
    out.push_str("}\n");
    out
}
