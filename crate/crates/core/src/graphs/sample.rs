use rand::Rng as _;

use super::Dag;
use crate::discovery::{EdgeKind, Pag};
use crate::factors::BackgroundKnowledge;
use crate::rng;

const MAX_RESAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Origin {
    // ordered by removal priority when breaking cycles
    Directed,
    PartiallyDirected,
    Nondirected,
}

/// Draws `q` DAGs from a PAG. Graph `i` uses its own stream `(seed, i)`.
///
/// Per edge: → is kept, ↔ dropped, ○→ kept with probability 1/2, and ○–○
/// becomes →, ← or nothing with probability 1/3 each (orientations that bk
/// forbids get probability 0 and the rest are renormalized). A cyclic draw
/// is redrawn up to 100 times; after that each remaining cycle loses its
/// lexicographically last ○–○-derived edge (falling back to ○→-derived,
/// then any edge).
pub fn sample_dags(pag: &Pag, q: usize, bk: &BackgroundKnowledge, seed: u64) -> Vec<Dag> {
    (0..q)
        .map(|i| sample_one(pag, bk, &mut rng::stream(seed, i as u64)))
        .collect()
}

fn sample_one(pag: &Pag, bk: &BackgroundKnowledge, rng: &mut rng::Rng) -> Dag {
    let mut edges = draw(pag, bk, rng);
    for _ in 0..MAX_RESAMPLES {
        if to_dag(pag, &edges).is_acyclic() {
            return to_dag(pag, &edges);
        }
        edges = draw(pag, bk, rng);
    }
    let mut dag = to_dag(pag, &edges);
    while let Some(cycle) = dag.find_cycle() {
        let on_cycle = |&&(a, b, _): &&(usize, usize, Origin)| {
            (0..cycle.len()).any(|i| cycle[i] == a && cycle[(i + 1) % cycle.len()] == b)
        };
        let names = pag.nodes();
        let victim = *edges
            .iter()
            .filter(on_cycle)
            .max_by(|x, y| {
                x.2.cmp(&y.2)
                    .then_with(|| names[x.0].cmp(&names[y.0]))
                    .then_with(|| names[x.1].cmp(&names[y.1]))
            })
            .expect("cycle edges come from the draw");
        log::debug!("breaking cycle at {} -> {}", names[victim.0], names[victim.1]);
        edges.retain(|e| *e != victim);
        dag.remove_edge(victim.0, victim.1);
    }
    dag
}

fn to_dag(pag: &Pag, edges: &[(usize, usize, Origin)]) -> Dag {
    Dag::from_edges(pag.nodes().to_vec(), edges.iter().map(|&(a, b, _)| (a, b)))
}

fn draw(pag: &Pag, bk: &BackgroundKnowledge, rng: &mut rng::Rng) -> Vec<(usize, usize, Origin)> {
    let names = pag.nodes();
    let allowed = |a: usize, b: usize| !bk.is_forbidden(&names[a], &names[b]);
    let mut out = Vec::new();
    for (a, b, _, _) in pag.edges() {
        let Some(kind) = pag.kind(a, b) else { continue };
        // normalize to (from, to) for the one-sided kinds
        let (from, to, origin) = match kind {
            EdgeKind::Bidirected => continue,
            EdgeKind::Directed => (a, b, Origin::Directed),
            EdgeKind::DirectedBack => (b, a, Origin::Directed),
            EdgeKind::PartiallyDirected => (a, b, Origin::PartiallyDirected),
            EdgeKind::PartiallyDirectedBack => (b, a, Origin::PartiallyDirected),
            EdgeKind::Nondirected => {
                let mut options: Vec<Option<(usize, usize)>> = vec![None];
                if allowed(a, b) {
                    options.insert(0, Some((a, b)));
                }
                if allowed(b, a) {
                    options.insert(options.len() - 1, Some((b, a)));
                }
                if let Some((f, t)) = options[rng.gen_range(0..options.len())] {
                    out.push((f, t, Origin::Nondirected));
                }
                continue;
            }
        };
        if !allowed(from, to) {
            log::warn!(
                "dropping {} -> {}: forbidden by background knowledge",
                names[from],
                names[to]
            );
            continue;
        }
        match origin {
            Origin::Directed => out.push((from, to, origin)),
            _ => {
                if rng.gen_bool(0.5) {
                    out.push((from, to, origin));
                }
            }
        }
    }
    out
}
