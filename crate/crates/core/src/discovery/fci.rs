use std::collections::{BTreeSet, HashMap, VecDeque};

use log::warn;

use super::{ci_test, DiscoveryConfig, Mark, Pag, SepsetMap};
use crate::error::Result;
use crate::factors::{BackgroundKnowledge, FactorTable};
use crate::graphs::Dag;

/// Prunes the skeleton of `init` with conditional-independence tests, then
/// orients it: unshielded colliders, background knowledge, FCI rules R1-R4.
///
/// Unshielded triples whose endpoints were never adjacent in `init` are
/// colliders iff they are colliders in `init`; for pairs removed here the
/// recorded sepset decides.
pub fn build_pag(
    init: &Dag,
    table: &FactorTable,
    bk: &BackgroundKnowledge,
    cfg: &DiscoveryConfig,
) -> Result<(Pag, SepsetMap)> {
    cfg.validate()?;
    let n = table.n_vars();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for &(a, b) in init.edges() {
        adj[a].insert(b);
        adj[b].insert(a);
    }
    let mut sepsets = SepsetMap::default();
    adjacency_phase(table, cfg, &mut adj, &mut sepsets)?;

    let mut pag = Pag::new(table.names().to_vec());
    for (a, nb) in adj.iter().enumerate() {
        for &b in nb.range(a + 1..) {
            pag.add_edge(a, b, Mark::Circle, Mark::Circle);
        }
    }

    let mut orienter = Orienter {
        pag,
        locked: BTreeSet::new(),
        sepsets: &sepsets,
        extra_sepsets: HashMap::new(),
        table,
        cfg,
    };
    orienter.apply_background(bk);
    orienter.orient_colliders(init);
    orienter.apply_rules();
    debug_assert!(orienter.pag.has_valid_marks());
    Ok((orienter.pag, sepsets))
}

/// Removes edges whose endpoints test independent given some subset (of size
/// 0..=max_cond) of either endpoint's adjacencies. Candidate sets come from
/// the adjacencies at the start of each depth, so the result does not depend
/// on the order pairs are visited in.
fn adjacency_phase(
    table: &FactorTable,
    cfg: &DiscoveryConfig,
    adj: &mut [BTreeSet<usize>],
    sepsets: &mut SepsetMap,
) -> Result<()> {
    let n = adj.len();
    for depth in 0..=cfg.max_cond {
        let snapshot: Vec<BTreeSet<usize>> = adj.to_vec();
        let mut testable = false;
        for x in 0..n {
            for y in snapshot[x].range(x + 1..).copied().collect::<Vec<_>>() {
                'pair: for (a, b) in [(x, y), (y, x)] {
                    let cands: Vec<usize> = snapshot[a].iter().copied().filter(|&v| v != b).collect();
                    if cands.len() < depth {
                        continue;
                    }
                    testable = true;
                    for s in combinations(&cands, depth) {
                        let r = ci_test(table, x, y, &s, cfg)?;
                        if r.independent {
                            adj[x].remove(&y);
                            adj[y].remove(&x);
                            sepsets.insert(x, y, s);
                            break 'pair;
                        }
                    }
                }
            }
        }
        if !testable {
            break;
        }
    }
    Ok(())
}

/// All `k`-subsets of `items` in lexicographic order.
pub(crate) fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut cur, &mut out);
    out
}

struct Orienter<'a> {
    pag: Pag,
    /// `(other, at)` endpoints fixed to arrowheads by background knowledge.
    locked: BTreeSet<(usize, usize)>,
    sepsets: &'a SepsetMap,
    extra_sepsets: HashMap<(usize, usize), Option<Vec<usize>>>,
    table: &'a FactorTable,
    cfg: &'a DiscoveryConfig,
}

impl Orienter<'_> {
    fn mark(&self, other: usize, at: usize) -> Option<Mark> {
        self.pag.mark(other, at)
    }

    /// Sets a mark unless background knowledge pins that endpoint to an
    /// arrowhead. Returns whether the graph changed.
    fn set(&mut self, other: usize, at: usize, mark: Mark) -> bool {
        if self.mark(other, at) == Some(mark) {
            return false;
        }
        if self.locked.contains(&(other, at)) {
            warn!(
                "orientation of {} at {} conflicts with background knowledge; keeping arrowhead",
                self.pag.nodes()[other],
                self.pag.nodes()[at]
            );
            return false;
        }
        self.pag.set_mark(other, at, mark);
        true
    }

    /// A forbidden direction a → b puts an arrowhead at a: a is not an
    /// ancestor of b.
    fn apply_background(&mut self, bk: &BackgroundKnowledge) {
        let edges: Vec<(usize, usize)> = self.pag.edges().map(|(a, b, _, _)| (a, b)).collect();
        for (a, b) in edges {
            for (from, to) in [(a, b), (b, a)] {
                if bk.is_forbidden(&self.pag.nodes()[from], &self.pag.nodes()[to]) {
                    self.pag.set_mark(to, from, Mark::Arrow);
                    self.locked.insert((to, from));
                }
            }
        }
    }

    fn orient_colliders(&mut self, init: &Dag) {
        let n = self.pag.n_nodes();
        for z in 0..n {
            let nb = self.pag.neighbors(z);
            for (i, &x) in nb.iter().enumerate() {
                for &y in &nb[i + 1..] {
                    if self.pag.adjacent(x, y) {
                        continue;
                    }
                    let collider = if init.has_edge(x, z) && init.has_edge(y, z) && !init.adjacent(x, y) {
                        true
                    } else if let Some(s) = self.sepsets.get(x, y) {
                        !s.contains(&z)
                    } else {
                        false
                    };
                    if collider {
                        self.set(x, z, Mark::Arrow);
                        self.set(y, z, Mark::Arrow);
                    }
                }
            }
        }
    }

    fn apply_rules(&mut self) {
        loop {
            let mut changed = false;
            changed |= self.rule1();
            changed |= self.rule2();
            changed |= self.rule3();
            changed |= self.rule4();
            if !changed {
                break;
            }
        }
    }

    /// α *→ β o–* γ, α and γ non-adjacent ⇒ β → γ.
    fn rule1(&mut self) -> bool {
        let mut changed = false;
        for b in 0..self.pag.n_nodes() {
            for a in self.pag.neighbors(b) {
                if self.mark(a, b) != Some(Mark::Arrow) {
                    continue;
                }
                for c in self.pag.neighbors(b) {
                    if c == a || self.pag.adjacent(a, c) || self.mark(c, b) != Some(Mark::Circle) {
                        continue;
                    }
                    changed |= self.set(c, b, Mark::Tail);
                    changed |= self.set(b, c, Mark::Arrow);
                }
            }
        }
        changed
    }

    /// α → β *→ γ or α *→ β → γ, with α *–o γ ⇒ α *→ γ.
    fn rule2(&mut self) -> bool {
        let mut changed = false;
        let n = self.pag.n_nodes();
        for a in 0..n {
            for c in self.pag.neighbors(a) {
                if self.mark(a, c) != Some(Mark::Circle) {
                    continue;
                }
                let found = self.pag.neighbors(a).into_iter().any(|b| {
                    b != c
                        && self.pag.adjacent(b, c)
                        && ((self.pag.is_directed(a, b) && self.mark(b, c) == Some(Mark::Arrow))
                            || (self.mark(a, b) == Some(Mark::Arrow) && self.pag.is_directed(b, c)))
                });
                if found {
                    changed |= self.set(a, c, Mark::Arrow);
                }
            }
        }
        changed
    }

    /// α *→ β ←* γ, α *–o θ o–* γ, α and γ non-adjacent, θ *–o β ⇒ θ *→ β.
    fn rule3(&mut self) -> bool {
        let mut changed = false;
        for b in 0..self.pag.n_nodes() {
            let nb = self.pag.neighbors(b);
            for &t in &nb {
                if self.mark(t, b) != Some(Mark::Circle) {
                    continue;
                }
                'pairs: for (i, &a) in nb.iter().enumerate() {
                    for &c in &nb[i + 1..] {
                        if a == t
                            || c == t
                            || self.pag.adjacent(a, c)
                            || self.mark(a, b) != Some(Mark::Arrow)
                            || self.mark(c, b) != Some(Mark::Arrow)
                            || self.mark(a, t) != Some(Mark::Circle)
                            || self.mark(c, t) != Some(Mark::Circle)
                        {
                            continue;
                        }
                        changed |= self.set(t, b, Mark::Arrow);
                        break 'pairs;
                    }
                }
            }
        }
        changed
    }

    /// Discriminating path ⟨θ, …, α, β, γ⟩ for β with β o–* γ: β → γ if β
    /// separates θ and γ, otherwise α ↔ β ↔ γ.
    fn rule4(&mut self) -> bool {
        let mut changed = false;
        let n = self.pag.n_nodes();
        for b in 0..n {
            for c in self.pag.neighbors(b) {
                if self.mark(c, b) != Some(Mark::Circle) {
                    continue;
                }
                for a in self.pag.neighbors(b) {
                    if a == c || !self.pag.is_directed(a, c) || self.mark(b, a) != Some(Mark::Arrow) {
                        continue;
                    }
                    if let Some(theta) = self.discriminating_endpoint(a, b, c) {
                        let sep = self.sepset_for(theta, c);
                        match sep {
                            Some(s) if s.contains(&b) => {
                                changed |= self.set(c, b, Mark::Tail);
                                changed |= self.set(b, c, Mark::Arrow);
                            }
                            Some(_) => {
                                changed |= self.set(a, b, Mark::Arrow);
                                changed |= self.set(c, b, Mark::Arrow);
                                changed |= self.set(b, c, Mark::Arrow);
                            }
                            None => {}
                        }
                        if self.mark(c, b) != Some(Mark::Circle) {
                            break;
                        }
                    }
                }
            }
        }
        changed
    }

    /// Searches backwards from α for θ such that ⟨θ, …, α, β, γ⟩ is a
    /// discriminating path: every node strictly between θ and β is a collider
    /// on the path and a parent of γ, and θ is not adjacent to γ.
    fn discriminating_endpoint(&self, a: usize, b: usize, c: usize) -> Option<usize> {
        let mut visited: BTreeSet<usize> = [a, b, c].into();
        let mut queue = VecDeque::from([a]);
        while let Some(t) = queue.pop_front() {
            for d in self.pag.neighbors(t) {
                if visited.contains(&d) || self.mark(d, t) != Some(Mark::Arrow) {
                    continue;
                }
                if !self.pag.adjacent(d, c) {
                    return Some(d);
                }
                if self.pag.is_directed(d, c) && self.mark(t, d) == Some(Mark::Arrow) {
                    visited.insert(d);
                    queue.push_back(d);
                }
            }
        }
        None
    }

    /// Recorded sepset, or one found on demand among subsets of either
    /// node's current adjacencies.
    fn sepset_for(&mut self, x: usize, y: usize) -> Option<Vec<usize>> {
        if let Some(s) = self.sepsets.get(x, y) {
            return Some(s.to_vec());
        }
        let key = (x.min(y), x.max(y));
        if let Some(cached) = self.extra_sepsets.get(&key) {
            return cached.clone();
        }
        let mut found = None;
        'search: for depth in 0..=self.cfg.max_cond {
            for (u, w) in [(x, y), (y, x)] {
                let cands: Vec<usize> = self.pag.neighbors(u).into_iter().filter(|&v| v != w).collect();
                for s in combinations(&cands, depth) {
                    if let Ok(r) = ci_test(self.table, x, y, &s, self.cfg) {
                        if r.independent {
                            found = Some(s);
                            break 'search;
                        }
                    }
                }
            }
        }
        self.extra_sepsets.insert(key, found.clone());
        found
    }
}
