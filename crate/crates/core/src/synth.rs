//! Binary structural causal models with exact ground truth, used to test the
//! pipeline against known effects and structures.
//!
//! A spec lists variables in any order; each has parents and a conditional
//! probability table `cpt[k] = P(v = 1 | parents)` where bit `i` of `k` is the
//! value of the `i`-th parent. Latent variables are sampled but dropped from
//! the emitted data. Variables with keywords can be rendered as token
//! streams, and a binary label variable turns rows into labeled documents.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document, EmbeddingTable, Split};
use crate::error::{GciError, Result};
use crate::factors::{FactorTable, FactorVocabulary};
use crate::rng;

const MAX_ENUMERATION: usize = 22;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScmVariable {
    pub name: String,
    #[serde(default)]
    pub parents: Vec<String>,
    pub cpt: Vec<f64>,
    #[serde(default)]
    pub latent: bool,
    /// Words emitted when the variable is 1 in a rendered document; the first
    /// one names the factor.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub keywords: Vec<String>,
}

/// Maps a binary variable onto two charges: `charges[value]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSpec {
    pub variable: String,
    pub charges: [String; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScmSpec {
    pub variables: Vec<ScmVariable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<LabelSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeAte {
    pub treatment: String,
    pub outcome: String,
    pub ate: f64,
}

/// Observed pair sharing a latent parent with no edge between them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfoundedPair {
    pub a: String,
    pub b: String,
    pub latent: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub observed: Vec<String>,
    pub latent: Vec<String>,
    pub edges: Vec<[String; 2]>,
    pub ate: Vec<EdgeAte>,
    pub confounded_pairs: Vec<ConfoundedPair>,
}

impl GroundTruth {
    pub fn ate_of(&self, treatment: &str, outcome: &str) -> Option<f64> {
        self.ate
            .iter()
            .find(|e| e.treatment == treatment && e.outcome == outcome)
            .map(|e| e.ate)
    }
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    /// Observed variables only, in spec order.
    pub table: FactorTable,
    pub truth: GroundTruth,
}

/// Validated spec with resolved parent indices and a topological order.
struct Compiled<'a> {
    spec: &'a ScmSpec,
    parents: Vec<Vec<usize>>,
    order: Vec<usize>,
}

impl ScmSpec {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        self.compile().map(|_| ())
    }

    fn compile(&self) -> Result<Compiled<'_>> {
        let mut names = BTreeSet::new();
        for v in &self.variables {
            if !names.insert(v.name.as_str()) {
                return Err(GciError::invalid(format!("duplicate variable {:?}", v.name)));
            }
        }
        let mut parents = Vec::with_capacity(self.variables.len());
        for v in &self.variables {
            let ps: Vec<usize> = v
                .parents
                .iter()
                .map(|p| self.index_of(p).ok_or_else(|| GciError::UnknownVariable(p.clone())))
                .collect::<Result<_>>()?;
            if ps.len() > 16 {
                return Err(GciError::invalid(format!("{:?} has too many parents", v.name)));
            }
            if v.cpt.len() != 1 << ps.len() {
                return Err(GciError::invalid(format!(
                    "{:?}: cpt needs {} entries, has {}",
                    v.name,
                    1usize << ps.len(),
                    v.cpt.len()
                )));
            }
            if v.cpt.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(GciError::invalid(format!("{:?}: probability outside [0, 1]", v.name)));
            }
            parents.push(ps);
        }
        // Kahn's algorithm, ties by spec position
        let n = self.variables.len();
        let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
        let mut order = Vec::with_capacity(n);
        let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for (c, ps) in parents.iter().enumerate() {
                for &p in ps {
                    if p == v {
                        indeg[c] -= 1;
                        if indeg[c] == 0 {
                            ready.insert(c);
                        }
                    }
                }
            }
        }
        if order.len() != n {
            return Err(GciError::invalid("scm graph has a cycle"));
        }
        if let Some(l) = &self.label {
            let i = self
                .index_of(&l.variable)
                .ok_or_else(|| GciError::UnknownVariable(l.variable.clone()))?;
            if self.variables[i].latent {
                return Err(GciError::invalid("label variable cannot be latent"));
            }
        }
        Ok(Compiled {
            spec: self,
            parents,
            order,
        })
    }
}

impl Compiled<'_> {
    fn prob_one(&self, v: usize, values: &[u8]) -> f64 {
        let k = self.parents[v]
            .iter()
            .enumerate()
            .fold(0usize, |acc, (b, &p)| acc | (usize::from(values[p]) << b));
        self.spec.variables[v].cpt[k]
    }

    /// One joint draw; `fixed` overrides a variable's mechanism.
    fn draw(&self, rng: &mut rng::Rng, fixed: Option<(usize, u8)>) -> Vec<u8> {
        let mut values = vec![0u8; self.order.len()];
        for &v in &self.order {
            values[v] = match fixed {
                Some((f, val)) if f == v => val,
                _ => u8::from(rng.gen::<f64>() < self.prob_one(v, &values)),
            };
        }
        values
    }

    fn ancestors(&self, v: usize) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut stack = self.parents[v].clone();
        while let Some(u) = stack.pop() {
            if out.insert(u) {
                stack.extend(self.parents[u].iter().copied());
            }
        }
        out
    }

    /// Sum over all joint assignments of `vars` (closed under parents except
    /// for `fixed`) of `weight(values) * P(assignment)`.
    fn enumerate(
        &self,
        vars: &BTreeSet<usize>,
        fixed: Option<(usize, u8)>,
        mut weight: impl FnMut(&[u8]) -> f64,
    ) -> Result<f64> {
        let free: Vec<usize> = self
            .order
            .iter()
            .copied()
            .filter(|v| vars.contains(v) && fixed.is_none_or(|(f, _)| f != *v))
            .collect();
        if free.len() > MAX_ENUMERATION {
            return Err(GciError::invalid("too many ancestors for exact enumeration"));
        }
        let mut total = 0.0;
        let mut values = vec![0u8; self.order.len()];
        if let Some((f, val)) = fixed {
            values[f] = val;
        }
        for code in 0u64..(1u64 << free.len()) {
            let mut p = 1.0;
            for (bit, &v) in free.iter().enumerate() {
                values[v] = ((code >> bit) & 1) as u8;
                let p1 = self.prob_one(v, &values);
                p *= if values[v] == 1 { p1 } else { 1.0 - p1 };
                if p == 0.0 {
                    break;
                }
            }
            if p > 0.0 {
                total += p * weight(&values);
            }
        }
        Ok(total)
    }
}

/// `E[Y | do(T=1)] - E[Y | do(T=0)]` by exact enumeration.
pub fn exact_ate(spec: &ScmSpec, treatment: &str, outcome: &str) -> Result<f64> {
    let c = spec.compile()?;
    let t = spec
        .index_of(treatment)
        .ok_or_else(|| GciError::UnknownVariable(treatment.into()))?;
    let y = spec
        .index_of(outcome)
        .ok_or_else(|| GciError::UnknownVariable(outcome.into()))?;
    let mut vars = c.ancestors(y);
    vars.insert(y);
    if !vars.contains(&t) {
        return Ok(0.0);
    }
    // the mutilated model: T's mechanism replaced by a constant
    let e1 = c.enumerate(&vars, Some((t, 1)), |vals| f64::from(vals[y]))?;
    let e0 = c.enumerate(&vars, Some((t, 0)), |vals| f64::from(vals[y]))?;
    Ok(e1 - e0)
}

/// Observational `E[Y | T=1] - E[Y | T=0]` by exact enumeration.
pub fn exact_naive_difference(spec: &ScmSpec, treatment: &str, outcome: &str) -> Result<f64> {
    let c = spec.compile()?;
    let t = spec
        .index_of(treatment)
        .ok_or_else(|| GciError::UnknownVariable(treatment.into()))?;
    let y = spec
        .index_of(outcome)
        .ok_or_else(|| GciError::UnknownVariable(outcome.into()))?;
    let mut vars = c.ancestors(y);
    vars.extend(c.ancestors(t));
    vars.insert(y);
    vars.insert(t);
    let p_t1 = c.enumerate(&vars, None, |v| f64::from(v[t]))?;
    let p_y1_t1 = c.enumerate(&vars, None, |v| f64::from(v[t] * v[y]))?;
    let p_y1_t0 = c.enumerate(&vars, None, |v| f64::from((1 - v[t]) * v[y]))?;
    if p_t1 <= 0.0 || p_t1 >= 1.0 {
        return Err(GciError::invalid("treatment has no variation"));
    }
    Ok(p_y1_t1 / p_t1 - p_y1_t0 / (1.0 - p_t1))
}

/// Interventional difference estimated by simulating `n` draws under each
/// of `do(T=1)` and `do(T=0)`.
pub fn monte_carlo_ate(spec: &ScmSpec, treatment: &str, outcome: &str, n: usize, seed: u64) -> Result<f64> {
    let c = spec.compile()?;
    let t = spec
        .index_of(treatment)
        .ok_or_else(|| GciError::UnknownVariable(treatment.into()))?;
    let y = spec
        .index_of(outcome)
        .ok_or_else(|| GciError::UnknownVariable(outcome.into()))?;
    let mut r1 = rng::stream(seed, 1);
    let mut r0 = rng::stream(seed, 0);
    let mut s1 = 0usize;
    let mut s0 = 0usize;
    for _ in 0..n {
        s1 += usize::from(c.draw(&mut r1, Some((t, 1)))[y]);
        s0 += usize::from(c.draw(&mut r0, Some((t, 0)))[y]);
    }
    Ok((s1 as f64 - s0 as f64) / n as f64)
}

/// Ancestral sampling of `n` rows plus the ground-truth record.
pub fn synth_generate(spec: &ScmSpec, n: usize, seed: u64) -> Result<SynthOutput> {
    let (rows, truth) = sample_rows(spec, n, seed)?;
    let observed: Vec<usize> = (0..spec.variables.len())
        .filter(|&v| !spec.variables[v].latent)
        .collect();
    let columns = observed.iter().map(|&v| rows.iter().map(|r| r[v]).collect()).collect();
    let names = observed.iter().map(|&v| spec.variables[v].name.clone()).collect();
    Ok(SynthOutput {
        table: FactorTable::from_columns(names, columns)?,
        truth,
    })
}

fn sample_rows(spec: &ScmSpec, n: usize, seed: u64) -> Result<(Vec<Vec<u8>>, GroundTruth)> {
    let c = spec.compile()?;
    let mut rng = rng::stream(seed, 0);
    let rows = (0..n).map(|_| c.draw(&mut rng, None)).collect();
    Ok((rows, ground_truth(spec, &c)?))
}

fn ground_truth(spec: &ScmSpec, c: &Compiled<'_>) -> Result<GroundTruth> {
    let vars = &spec.variables;
    let mut edges = Vec::new();
    let mut ate = Vec::new();
    for (v, ps) in c.parents.iter().enumerate() {
        for &p in ps {
            edges.push([vars[p].name.clone(), vars[v].name.clone()]);
            ate.push(EdgeAte {
                treatment: vars[p].name.clone(),
                outcome: vars[v].name.clone(),
                ate: exact_ate(spec, &vars[p].name, &vars[v].name)?,
            });
        }
    }
    let mut confounded_pairs = Vec::new();
    for (l, lv) in vars.iter().enumerate() {
        if !lv.latent {
            continue;
        }
        let children: Vec<usize> = (0..vars.len())
            .filter(|&v| c.parents[v].contains(&l) && !vars[v].latent)
            .collect();
        for (i, &a) in children.iter().enumerate() {
            for &b in &children[i + 1..] {
                if !c.parents[a].contains(&b) && !c.parents[b].contains(&a) {
                    confounded_pairs.push(ConfoundedPair {
                        a: vars[a].name.clone(),
                        b: vars[b].name.clone(),
                        latent: lv.name.clone(),
                    });
                }
            }
        }
    }
    Ok(GroundTruth {
        observed: vars.iter().filter(|v| !v.latent).map(|v| v.name.clone()).collect(),
        latent: vars.iter().filter(|v| v.latent).map(|v| v.name.clone()).collect(),
        edges,
        ate,
        confounded_pairs,
    })
}

/// Settings for rendering SCM draws as documents.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderConfig {
    pub train_fraction: f64,
    /// Filler tokens drawn per document from a pool of `filler_pool` words.
    pub filler_per_doc: usize,
    pub filler_pool: usize,
    /// Words present in every document.
    pub common_words: Vec<String>,
    /// Group names assigned uniformly at random, if non-empty.
    pub groups: Vec<String>,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            train_fraction: 0.7,
            filler_per_doc: 6,
            filler_pool: 150,
            common_words: vec!["the".into(), "defendant".into(), "case".into()],
            groups: vec![],
        }
    }
}

#[derive(Debug, Clone)]
pub struct RenderedCorpus {
    pub corpus: Corpus,
    pub truth: GroundTruth,
    /// Factor variable values per document (observed keyword variables).
    pub table: FactorTable,
}

/// Samples `n` rows and renders each as a document. Keyword variables that
/// are 1 emit one of their keywords, in topological order with filler
/// tokens interleaved; the label variable picks the charge.
pub fn render_corpus(spec: &ScmSpec, n: usize, seed: u64, cfg: &RenderConfig) -> Result<RenderedCorpus> {
    let label = spec
        .label
        .as_ref()
        .ok_or_else(|| GciError::invalid("rendering needs a label variable"))?;
    let c = spec.compile()?;
    let label_var = spec.index_of(&label.variable).unwrap();
    let (rows, truth) = sample_rows(spec, n, seed)?;
    let mut rng = rng::stream(seed, 1);
    let keyword_vars: Vec<usize> = c
        .order
        .iter()
        .copied()
        .filter(|&v| !spec.variables[v].keywords.is_empty() && !spec.variables[v].latent)
        .collect();
    let mut docs = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        let mut tokens: Vec<String> = Vec::new();
        tokens.push(cfg.common_words.first().cloned().unwrap_or_else(|| "the".into()));
        let mut fillers: Vec<String> = (0..cfg.filler_per_doc)
            .map(|_| format!("w{}", rng.gen_range(0..cfg.filler_pool.max(1))))
            .collect();
        fillers.extend(cfg.common_words.iter().skip(1).cloned());
        fillers.shuffle(&mut rng);
        let mut fill = fillers.into_iter();
        for &v in &keyword_vars {
            if let Some(f) = fill.next() {
                tokens.push(f);
            }
            if row[v] == 1 {
                let kws = &spec.variables[v].keywords;
                tokens.push(kws[rng.gen_range(0..kws.len())].clone());
            }
        }
        tokens.extend(fill);
        let split = if rng.gen::<f64>() < cfg.train_fraction {
            Split::Train
        } else {
            Split::Test
        };
        let group = if cfg.groups.is_empty() {
            None
        } else {
            Some(cfg.groups[rng.gen_range(0..cfg.groups.len())].clone())
        };
        docs.push(Document {
            id: format!("d{i:05}"),
            tokens,
            charge: Some(label.charges[usize::from(row[label_var])].clone()),
            group,
            split,
        });
    }
    let corpus = Corpus::new(docs, label.charges.to_vec())?;
    let names = keyword_vars.iter().map(|&v| spec.variables[v].name.clone()).collect();
    let columns = keyword_vars
        .iter()
        .map(|&v| rows.iter().map(|r| r[v]).collect())
        .collect();
    Ok(RenderedCorpus {
        corpus,
        truth,
        table: FactorTable::from_columns(names, columns)?,
    })
}

/// Vocabulary whose factors are exactly the keyword groups of the spec.
pub fn planted_vocabulary(spec: &ScmSpec) -> Result<FactorVocabulary> {
    let c = spec.compile()?;
    FactorVocabulary::from_groups(
        c.order
            .iter()
            .map(|&v| &spec.variables[v])
            .filter(|v| !v.keywords.is_empty() && !v.latent)
            .map(|v| v.keywords.clone())
            .collect(),
    )
}

/// Embeddings in which each variable's keywords sit close to a random
/// direction of their own, and filler words point anywhere.
pub fn synth_embeddings(spec: &ScmSpec, cfg: &RenderConfig, dim: usize, seed: u64) -> Result<EmbeddingTable> {
    let mut rng = rng::stream(seed, 2);
    let mut gauss = move || -> f64 {
        // Box-Muller
        let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };
    let mut vectors: HashMap<String, Vec<f64>> = HashMap::new();
    for v in &spec.variables {
        if v.keywords.is_empty() {
            continue;
        }
        let base: Vec<f64> = (0..dim).map(|_| gauss()).collect();
        for k in &v.keywords {
            let vec = base.iter().map(|b| b + 0.1 * gauss()).collect();
            vectors.insert(k.clone(), vec);
        }
    }
    let fillers = (0..cfg.filler_pool)
        .map(|i| format!("w{i}"))
        .chain(cfg.common_words.iter().cloned());
    for w in fillers {
        vectors.entry(w).or_insert_with(|| (0..dim).map(|_| gauss()).collect());
    }
    EmbeddingTable::new(dim, vectors)
}

fn var(name: &str, parents: &[&str], cpt: &[f64]) -> ScmVariable {
    ScmVariable {
        name: name.into(),
        parents: parents.iter().map(|s| s.to_string()).collect(),
        cpt: cpt.to_vec(),
        latent: false,
        keywords: vec![],
    }
}

fn kwvar(name: &str, parents: &[&str], cpt: &[f64], extra: &[&str]) -> ScmVariable {
    let mut v = var(name, parents, cpt);
    v.keywords = std::iter::once(name)
        .chain(extra.iter().copied())
        .map(str::to_owned)
        .collect();
    v
}

/// Built-in scenarios, by name.
pub mod scenarios {
    use super::*;

    pub const NAMES: &[&str] = &[
        "confounded",
        "collider",
        "chain",
        "latent",
        "latent4",
        "fraud_extortion",
        "chain_charge",
    ];

    pub fn by_name(name: &str) -> Option<ScmSpec> {
        Some(match name {
            "confounded" => confounded(),
            "collider" => collider(),
            "chain" => chain(),
            "latent" => latent_pair(),
            "latent4" => latent_four(),
            "fraud_extortion" => fraud_extortion(),
            "chain_charge" => chain_charge(),
            _ => return None,
        })
    }

    /// C ~ Bern(.5); T = C w.p. .8; P(Y=1 | T, C) = .2 + .5T + .3C.
    /// True ATE of T on Y is 0.5; the naive difference is 0.68.
    pub fn confounded() -> ScmSpec {
        ScmSpec {
            variables: vec![
                var("C", &[], &[0.5]),
                var("T", &["C"], &[0.2, 0.8]),
                // index bit0 = T, bit1 = C
                var("Y", &["T", "C"], &[0.2, 0.7, 0.5, 1.0]),
            ],
            label: None,
        }
    }

    /// A → C ← B with A ⊥ B.
    pub fn collider() -> ScmSpec {
        ScmSpec {
            variables: vec![
                var("A", &[], &[0.5]),
                var("B", &[], &[0.5]),
                var("C", &["A", "B"], &[0.1, 0.6, 0.6, 0.95]),
            ],
            label: None,
        }
    }

    /// A → B → C, each link flips with probability 0.1.
    pub fn chain() -> ScmSpec {
        ScmSpec {
            variables: vec![
                var("A", &[], &[0.5]),
                var("B", &["A"], &[0.1, 0.9]),
                var("C", &["B"], &[0.1, 0.9]),
            ],
            label: None,
        }
    }

    /// Latent L → B, L → D.
    pub fn latent_pair() -> ScmSpec {
        let mut l = var("L", &[], &[0.5]);
        l.latent = true;
        ScmSpec {
            variables: vec![l, var("B", &["L"], &[0.15, 0.85]), var("D", &["L"], &[0.15, 0.85])],
            label: None,
        }
    }

    /// X → B ← L → D ← W with L latent: B and D are confounded but neither
    /// causes the other.
    pub fn latent_four() -> ScmSpec {
        let mut l = var("L", &[], &[0.5]);
        l.latent = true;
        ScmSpec {
            variables: vec![
                var("X", &[], &[0.5]),
                l,
                var("W", &[], &[0.5]),
                var("B", &["X", "L"], &[0.05, 0.6, 0.6, 0.95]),
                var("D", &["L", "W"], &[0.05, 0.6, 0.6, 0.95]),
            ],
            label: None,
        }
    }

    /// Two charges told apart by deception versus threats.
    pub fn fraud_extortion() -> ScmSpec {
        ScmSpec {
            variables: vec![
                kwvar("deceive", &[], &[0.5], &["lie", "trick"]),
                kwvar("threaten", &["deceive"], &[0.96, 0.04], &["intimidate", "menace"]),
                kwvar("obtain", &["deceive", "threaten"], &[0.2, 0.7, 0.7, 0.8], &["property"]),
                kwvar("injure", &[], &[0.15], &["hurt"]),
                kwvar("night", &[], &[0.3], &["dark"]),
                // bit0 = deceive, bit1 = threaten; 1 = fraud
                var("fraud", &["deceive", "threaten"], &[0.5, 0.99, 0.01, 0.5]),
            ],
            label: Some(LabelSpec {
                variable: "fraud".into(),
                charges: ["extortion".into(), "fraud".into()],
            }),
        }
    }

    /// A → B → T → label, with T the only direct cause of the label, plus
    /// two unrelated factors.
    pub fn chain_charge() -> ScmSpec {
        ScmSpec {
            variables: vec![
                kwvar("plan", &[], &[0.5], &[]),
                kwvar("approach", &["plan"], &[0.1, 0.9], &[]),
                kwvar("seize", &["approach"], &[0.1, 0.9], &[]),
                kwvar("noise1", &[], &[0.4], &[]),
                kwvar("noise2", &[], &[0.3], &[]),
                var("robbery", &["seize"], &[0.1, 0.9]),
            ],
            label: Some(LabelSpec {
                variable: "robbery".into(),
                charges: ["theft".into(), "robbery".into()],
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_spec_is_reproduced() {
        let spec = ScmSpec {
            variables: vec![
                var("A", &[], &[1.0]),
                var("B", &["A"], &[1.0, 0.0]),
                var("C", &["A", "B"], &[0.0, 1.0, 0.0, 0.0]),
            ],
            label: None,
        };
        let out = synth_generate(&spec, 50, 3).unwrap();
        for r in 0..50 {
            assert_eq!(
                (out.table.column(0)[r], out.table.column(1)[r], out.table.column(2)[r]),
                (1, 0, 1)
            );
        }
    }

    #[test]
    fn confounded_closed_forms() {
        let s = scenarios::confounded();
        assert!((exact_ate(&s, "T", "Y").unwrap() - 0.5).abs() < 1e-12);
        assert!((exact_naive_difference(&s, "T", "Y").unwrap() - 0.68).abs() < 1e-12);
        let out = synth_generate(&s, 10, 0).unwrap();
        assert!((out.truth.ate_of("T", "Y").unwrap() - 0.5).abs() < 1e-12);
        // C -> T -> Y and C -> Y: total effect of C on Y = .3 + .5 * (.8 - .2)
        assert!((out.truth.ate_of("C", "Y").unwrap() - 0.6).abs() < 1e-12);
    }

    #[test]
    fn latent_is_dropped_and_recorded() {
        let out = synth_generate(&scenarios::latent_pair(), 100, 1).unwrap();
        assert_eq!(out.table.names(), &["B", "D"]);
        assert_eq!(out.truth.latent, vec!["L"]);
        assert_eq!(
            out.truth.confounded_pairs,
            vec![ConfoundedPair {
                a: "B".into(),
                b: "D".into(),
                latent: "L".into()
            }]
        );
        assert!(!out.truth.edges.iter().any(|e| e == &["B".to_string(), "D".to_string()]));
    }

    #[test]
    fn validation_errors() {
        let mut s = scenarios::chain();
        s.variables[1].cpt = vec![0.5];
        assert!(s.validate().is_err());
        let mut s = scenarios::chain();
        s.variables[0].parents = vec!["C".into()];
        s.variables[0].cpt = vec![0.5, 0.5];
        assert!(s.validate().is_err());
        let mut s = scenarios::chain();
        s.variables[2].cpt[0] = 1.5;
        assert!(s.validate().is_err());
    }

    #[test]
    fn rendered_documents_follow_the_rows() {
        let spec = scenarios::fraud_extortion();
        let r = render_corpus(&spec, 200, 4, &RenderConfig::default()).unwrap();
        let vocab = planted_vocabulary(&spec).unwrap();
        let t = crate::factors::binarize(&r.corpus, &vocab);
        for (i, name) in r.table.names().iter().enumerate() {
            let j = t.index_of(name).unwrap();
            assert_eq!(t.column(j), r.table.column(i), "{name}");
        }
        assert!(r.corpus.documents().iter().all(|d| d.charge.is_some()));
    }
}
