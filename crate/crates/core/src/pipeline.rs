//! File-to-file orchestration of the stages. Each stage reads only what the
//! previous stages wrote into the output directory, so any stage can be
//! rerun on its own.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::corpus::{balance_corpus, load_corpus, load_embeddings, Corpus, EmbeddingTable, Split};
use crate::decision::{charge_scores, train_forest, write_predictions, ForestConfig, ForestModel, Prediction};
use crate::discovery::{discover, DiscoveryConfig, Pag};
use crate::effects::{aggregate_strengths, estimate_all, MatchConfig, StrengthMatrix};
use crate::error::{GciError, Result};
use crate::factors::{
    background_knowledge, binarize_documents, cluster_keywords, score_keywords, temporal_precedence,
    BackgroundKnowledge, FactorTable, FactorVocabulary, KeywordScore, PrecedenceStats,
};
use crate::graphs::{sample_dags, weight_graphs, WeightMode, WeightedDagSet};
use crate::rng::derive_seed;

pub const FACTORS: &str = "factors.json";
pub const TABLE: &str = "table.csv";
pub const TEST_TABLE: &str = "test_table.csv";
pub const BACKGROUND: &str = "background.json";
pub const PAG: &str = "pag.json";
pub const SEPSETS: &str = "sepsets.json";
pub const DAGS: &str = "dags.json";
pub const STRENGTHS: &str = "strengths.json";
pub const STRENGTHS_CSV: &str = "strengths.csv";
pub const MODEL: &str = "model.json";
pub const PREDICTIONS: &str = "predictions.csv";
pub const METRICS: &str = "metrics.json";
pub const MANIFEST: &str = "manifest.json";

/// Keyword and factor counts by training-data tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Small,
    Medium,
    Large,
}

impl Tier {
    /// `(p, q)`
    pub fn sizes(self) -> (usize, usize) {
        match self {
            Tier::Small => (15, 20),
            Tier::Medium => (25, 30),
            Tier::Large => (40, 60),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub p: usize,
    pub q: usize,
    #[serde(rename = "Q")]
    pub n_graphs: usize,
    pub alpha: f64,
    pub max_cond: usize,
    pub min_count_per_cell_multiplier: usize,
    pub use_score_init: bool,
    pub temporal_threshold: f64,
    pub min_co: usize,
    pub n_trees: usize,
    pub max_depth: usize,
    pub master_seed: u64,
    pub weight_mode: WeightMode,
    /// Oversample charges far below the largest one before extraction.
    pub balance: bool,
    /// Keep only this fraction of each charge's training documents.
    pub train_fraction: Option<f64>,
    pub stopwords: Vec<String>,
    pub caliper: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let (p, q) = Tier::Small.sizes();
        PipelineConfig {
            p,
            q,
            n_graphs: 5,
            alpha: 0.05,
            max_cond: 3,
            min_count_per_cell_multiplier: 10,
            use_score_init: true,
            temporal_threshold: 0.8,
            min_co: 10,
            n_trees: 100,
            max_depth: 8,
            master_seed: 0,
            weight_mode: WeightMode::Softmax,
            balance: true,
            train_fraction: None,
            stopwords: vec![],
            caliper: None,
        }
    }
}

impl PipelineConfig {
    pub fn with_tier(mut self, tier: Tier) -> Self {
        (self.p, self.q) = tier.sizes();
        self
    }

    pub fn discovery(&self) -> DiscoveryConfig {
        DiscoveryConfig {
            alpha: self.alpha,
            max_cond: self.max_cond,
            min_count_per_cell_multiplier: self.min_count_per_cell_multiplier,
            use_score_init: self.use_score_init,
        }
    }

    pub fn forest(&self) -> ForestConfig {
        ForestConfig {
            n_trees: self.n_trees,
            max_depth: self.max_depth,
            seed: derive_seed(self.master_seed, "forest"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(GciError::invalid(m.to_owned()));
        if self.p < 1 || self.q < 1 {
            return bad("p and q must be at least 1");
        }
        if self.n_graphs < 1 {
            return bad("Q must be at least 1");
        }
        if !(self.temporal_threshold > 0.5 && self.temporal_threshold <= 1.0) {
            return bad("temporal_threshold must lie in (0.5, 1]");
        }
        if self.n_trees < 1 {
            return bad("n_trees must be at least 1");
        }
        if let Some(f) = self.train_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return bad("train_fraction must lie in (0, 1]");
            }
        }
        self.discovery().validate()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let cfg: PipelineConfig = read_json(path)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorsFile {
    pub keywords: Vec<KeywordScore>,
    pub vocabulary: FactorVocabulary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundFile {
    pub charges: Vec<String>,
    pub precedence: PrecedenceStats,
    pub knowledge: BackgroundKnowledge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n_test: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub master_seed: u64,
    pub config: PipelineConfig,
    pub inputs: Vec<String>,
    pub artifacts: Vec<String>,
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| GciError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| GciError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| GciError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| GciError::Stage {
        stage: name,
        source: Box::new(e),
    })
}

/// Keeps `fraction` of each charge's training documents (at least one),
/// chosen by a seeded shuffle; unlabeled training documents are thinned the
/// same way and test documents are untouched.
pub fn subsample_training(corpus: &Corpus, fraction: f64, seed: u64) -> Result<Corpus> {
    let mut keep: HashSet<&str> = corpus.test().map(|d| d.id.as_str()).collect();
    let mut classes: Vec<Option<&str>> = corpus.charges().iter().map(|c| Some(c.as_str())).collect();
    classes.push(None);
    for (k, class) in classes.into_iter().enumerate() {
        let mut ids: Vec<&str> = corpus
            .train()
            .filter(|d| d.charge.as_deref() == class)
            .map(|d| d.id.as_str())
            .collect();
        if ids.is_empty() {
            continue;
        }
        ids.shuffle(&mut crate::rng::stream(seed, k as u64));
        let n = ((ids.len() as f64 * fraction).round() as usize).max(1);
        keep.extend(ids.into_iter().take(n));
    }
    Ok(corpus.filtered(|d| keep.contains(d.id.as_str())))
}

/// Keyword scoring, clustering, binarization and background knowledge.
/// Writes factors.json, table.csv (training rows), test_table.csv and
/// background.json.
pub fn stage_factors(corpus: &Corpus, embeddings: &EmbeddingTable, cfg: &PipelineConfig, out: &Path) -> Result<()> {
    stage(
        "factors",
        (|| {
            let mut corpus = corpus.clone();
            if let Some(f) = cfg.train_fraction {
                corpus = subsample_training(&corpus, f, derive_seed(cfg.master_seed, "subsample"))?;
            }
            if cfg.balance {
                corpus = balance_corpus(&corpus, derive_seed(cfg.master_seed, "balance"))?;
            }
            let stop: HashSet<String> = cfg.stopwords.iter().cloned().collect();
            let keywords = score_keywords(&corpus, cfg.p, &stop)?;
            let vocabulary = cluster_keywords(&keywords, embeddings, cfg.q, derive_seed(cfg.master_seed, "cluster"))?;
            let train = corpus.filtered(|d| d.split == Split::Train);
            let table = binarize_documents(train.documents().iter(), corpus.charges(), &vocabulary);
            let test = binarize_documents(corpus.test(), corpus.charges(), &vocabulary);
            let precedence = temporal_precedence(&train, &vocabulary);
            let knowledge = background_knowledge(&precedence, corpus.charges(), cfg.temporal_threshold, cfg.min_co)?;
            write_json(out.join(FACTORS), &FactorsFile { keywords, vocabulary })?;
            table.write_csv(out.join(TABLE))?;
            test.write_csv(out.join(TEST_TABLE))?;
            write_json(
                out.join(BACKGROUND),
                &BackgroundFile {
                    charges: corpus.charges().to_vec(),
                    precedence,
                    knowledge,
                },
            )
        })(),
    )
}

/// table.csv + background.json → pag.json, sepsets.json.
pub fn stage_discover(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    stage(
        "discover",
        (|| {
            let table = FactorTable::read_csv(out.join(TABLE))?;
            let bg: BackgroundFile = read_json(out.join(BACKGROUND))?;
            let d = discover(&table, &bg.knowledge, &cfg.discovery())?;
            write_json(out.join(PAG), &d.pag.to_json())?;
            write_json(out.join(SEPSETS), &d.sepsets.to_json(d.pag.nodes()))
        })(),
    )
}

/// pag.json + background.json + table.csv → dags.json.
pub fn stage_sample(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    stage(
        "sample",
        (|| {
            let table = FactorTable::read_csv(out.join(TABLE))?;
            let bg: BackgroundFile = read_json(out.join(BACKGROUND))?;
            let pag = Pag::from_json(&read_json(out.join(PAG))?)?;
            let seed = derive_seed(cfg.master_seed, "sample");
            let dags = sample_dags(&pag, cfg.n_graphs, &bg.knowledge, seed);
            weight_graphs(dags, &table, cfg.weight_mode, seed)?.write(out.join(DAGS))
        })(),
    )
}

/// dags.json + table.csv → strengths.json, strengths.csv.
pub fn stage_estimate(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    stage(
        "estimate",
        (|| {
            let table = FactorTable::read_csv(out.join(TABLE))?;
            let set = WeightedDagSet::read(out.join(DAGS))?;
            let outcomes: Vec<String> = table.outcome_vars().map(|v| table.name(v).to_owned()).collect();
            let mc = MatchConfig { caliper: cfg.caliper };
            let strengths = estimate_all(&set, &table, &outcomes, false, &mc)?;
            let m = aggregate_strengths(&strengths, &set, &outcomes)?;
            m.write_json(out.join(STRENGTHS))?;
            m.write_csv(out.join(STRENGTHS_CSV))
        })(),
    )
}

fn scores_for(table: &FactorTable, m: &StrengthMatrix) -> Result<Vec<Vec<f64>>> {
    let cols: Vec<usize> = m.factors.iter().map(|f| table.index_of(f)).collect::<Result<_>>()?;
    Ok((0..table.n_rows())
        .map(|r| {
            let row: Vec<u8> = cols.iter().map(|&c| table.column(c)[r]).collect();
            charge_scores(&table.row_ids()[r], &row, m).scores
        })
        .collect())
}

/// strengths.json + table.csv → model.json.
pub fn stage_train(cfg: &PipelineConfig, out: &Path) -> Result<()> {
    stage(
        "train",
        (|| {
            let table = FactorTable::read_csv(out.join(TABLE))?;
            let m = StrengthMatrix::read_json(out.join(STRENGTHS))?;
            let scores = scores_for(&table, &m)?;
            let (x, y): (Vec<Vec<f64>>, Vec<usize>) = scores
                .into_iter()
                .enumerate()
                .filter_map(|(r, s)| table.label(r).map(|l| (s, l)))
                .unzip();
            let model = train_forest(&x, &y, table.charges(), &cfg.forest())?;
            write_json(out.join(MODEL), &model)
        })(),
    )
}

/// model.json + strengths.json + test_table.csv → predictions.csv,
/// metrics.json.
pub fn stage_predict(out: &Path) -> Result<Metrics> {
    stage(
        "predict",
        (|| {
            let table = FactorTable::read_csv(out.join(TEST_TABLE))?;
            let m = StrengthMatrix::read_json(out.join(STRENGTHS))?;
            let model: ForestModel = read_json(out.join(MODEL))?;
            let charges = table.charges();
            let scores = scores_for(&table, &m)?;
            let mut rows = Vec::with_capacity(scores.len());
            let mut pairs = Vec::new();
            for (r, s) in scores.iter().enumerate() {
                let p = model.predict(s)?;
                let gold = table.label(r);
                if let Some(g) = gold {
                    pairs.push((p, g));
                }
                rows.push(Prediction {
                    id: table.row_ids()[r].clone(),
                    predicted: model.charges[p].clone(),
                    gold: gold.map(|g| charges[g].clone()).unwrap_or_default(),
                });
            }
            write_predictions(out.join(PREDICTIONS), &rows)?;
            let metrics = classification_metrics(&pairs, charges.len());
            write_json(out.join(METRICS), &metrics)?;
            Ok(metrics)
        })(),
    )
}

/// Accuracy and macro-averaged F1 over `(predicted, gold)` pairs.
pub fn classification_metrics(pairs: &[(usize, usize)], n_classes: usize) -> Metrics {
    let n = pairs.len();
    let correct = pairs.iter().filter(|(p, g)| p == g).count();
    let f1: f64 = (0..n_classes)
        .map(|c| {
            let tp = pairs.iter().filter(|&&(p, g)| p == c && g == c).count() as f64;
            let pp = pairs.iter().filter(|&&(p, _)| p == c).count() as f64;
            let gp = pairs.iter().filter(|&&(_, g)| g == c).count() as f64;
            if pp + gp == 0.0 {
                0.0
            } else {
                2.0 * tp / (pp + gp)
            }
        })
        .sum::<f64>()
        / n_classes.max(1) as f64;
    Metrics {
        n_test: n,
        accuracy: if n == 0 { 0.0 } else { correct as f64 / n as f64 },
        macro_f1: f1,
    }
}

/// Runs every stage on an in-memory corpus and writes the manifest.
pub fn run_pipeline_on(
    corpus: &Corpus,
    embeddings: &EmbeddingTable,
    cfg: &PipelineConfig,
    inputs: Vec<String>,
    out: &Path,
) -> Result<Manifest> {
    cfg.validate()?;
    fs::create_dir_all(out).map_err(|e| GciError::io(out, e))?;
    stage_factors(corpus, embeddings, cfg, out)?;
    stage_discover(cfg, out)?;
    stage_sample(cfg, out)?;
    stage_estimate(cfg, out)?;
    stage_train(cfg, out)?;
    stage_predict(out)?;
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION").to_owned(),
        master_seed: cfg.master_seed,
        config: cfg.clone(),
        inputs,
        artifacts: [
            FACTORS,
            TABLE,
            TEST_TABLE,
            BACKGROUND,
            PAG,
            SEPSETS,
            DAGS,
            STRENGTHS,
            STRENGTHS_CSV,
            MODEL,
            PREDICTIONS,
            METRICS,
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
    };
    write_json(out.join(MANIFEST), &manifest)?;
    Ok(manifest)
}

/// Loads the inputs and runs every stage into `out`. Without an embeddings
/// file every keyword is out of vocabulary.
pub fn run_pipeline(
    corpus_path: &Path,
    charges_path: &Path,
    embeddings_path: Option<&Path>,
    cfg: &PipelineConfig,
    out: &Path,
) -> Result<Manifest> {
    let corpus = stage("load", load_corpus(corpus_path, charges_path))?;
    let embeddings = match embeddings_path {
        Some(p) => stage("load", load_embeddings(p))?,
        None => EmbeddingTable::empty(1),
    };
    let mut inputs: Vec<PathBuf> = vec![corpus_path.into(), charges_path.into()];
    inputs.extend(embeddings_path.map(PathBuf::from));
    run_pipeline_on(
        &corpus,
        &embeddings,
        cfg,
        inputs.iter().map(|p| p.display().to_string()).collect(),
        out,
    )
}
