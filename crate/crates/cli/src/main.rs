//! `gci`: run the pipeline end to end or one stage at a time. Every stage
//! reads and writes files in the `--out` directory.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gci_core::corpus::{load_corpus, load_embeddings, write_corpus, Corpus, EmbeddingTable};
use gci_core::decision::{attention_targets, extract_chains, fairness_metrics, read_predictions, CausalChain};
use gci_core::discovery::Pag;
use gci_core::effects::{confounder_set, refute, RefutationReport, RefuterMode, StrengthMatrix};
use gci_core::factors::{FactorTable, PrecedenceStats};
use gci_core::graphs::{export_dot, DotGraph, WeightedDagSet};
use gci_core::pipeline::{self, BackgroundFile, FactorsFile, PipelineConfig, Tier};
use gci_core::synth::{render_corpus, scenarios, synth_embeddings, synth_generate, RenderConfig};

#[derive(Parser)]
#[command(name = "gci", version, about = "Graph-based causal inference over legal case text")]
struct Cli {
    /// Master seed; overrides `master_seed` from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON pipeline configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Artifact directory.
    #[arg(long, global = true, default_value = "gci-out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TierArg {
    Small,
    Medium,
    Large,
}

impl From<TierArg> for Tier {
    fn from(t: TierArg) -> Tier {
        match t {
            TierArg::Small => Tier::Small,
            TierArg::Medium => Tier::Medium,
            TierArg::Large => Tier::Large,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    All,
    RandomConfounder,
    PlaceboTreatment,
    DataSubset,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GraphArg {
    Pag,
    Dag,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableArg {
    Train,
    Test,
}

#[derive(clap::Args)]
struct Inputs {
    /// Corpus, one JSON document per line.
    #[arg(long)]
    corpus: PathBuf,
    /// Charge names, one per line.
    #[arg(long)]
    charges: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Extract keywords and factors, binarize documents, derive background knowledge.
    Factors {
        #[command(flatten)]
        inputs: Inputs,
        /// Word vectors in text format.
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long, value_enum)]
        tier: Option<TierArg>,
    },
    /// Learn the partial ancestral graph.
    Discover,
    /// Sample and weight DAGs from the PAG.
    Sample,
    /// Estimate and aggregate causal strengths.
    Estimate,
    /// Train the charge classifier.
    Train,
    /// Predict held-out documents and report metrics.
    Predict,
    /// Check one edge's strength against the refuters.
    Refute {
        #[arg(long)]
        treatment: String,
        #[arg(long)]
        outcome: String,
        #[arg(long, value_enum, default_value = "all")]
        mode: ModeArg,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
    },
    /// Extract weighted causal chains per document.
    Chains {
        /// Charge to explain; defaults to each document's gold charge.
        #[arg(long)]
        charge: Option<String>,
        /// Restrict to one document.
        #[arg(long)]
        id: Option<String>,
        #[arg(long, default_value_t = 4)]
        max_len: usize,
        #[arg(long, value_enum, default_value = "test")]
        table: TableArg,
    },
    /// Per-token attention supervision targets for labeled documents.
    AttentionTargets {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Error-rate equality differences across document groups.
    Fairness {
        #[command(flatten)]
        inputs: Inputs,
        /// Charge treated as the positive class.
        #[arg(long)]
        positive: String,
    },
    /// Write a graph in DOT format.
    ExportDot {
        #[arg(long, value_enum, default_value = "pag")]
        graph: GraphArg,
        /// Which sampled DAG.
        #[arg(long, default_value_t = 0)]
        index: usize,
        /// Label DAG edges with their estimated strengths.
        #[arg(long)]
        annotate: bool,
    },
    /// Generate data from a built-in structural causal model.
    Synth {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 2000)]
        n: usize,
        /// Dimension of the generated word vectors (labeled scenarios only).
        #[arg(long, default_value_t = 16)]
        dim: usize,
        /// Comma-separated group names assigned to documents at random.
        #[arg(long, value_delimiter = ',')]
        groups: Vec<String>,
    },
    /// Run every stage.
    Pipeline {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long, value_enum)]
        tier: Option<TierArg>,
    },
}

fn config(cli: &Cli, tier: Option<TierArg>) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(t) = tier {
        cfg = cfg.with_tier(t.into());
    }
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn ensure_out(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| anyhow!("creating {}: {e}", out.display()))
}

fn write_json<T: Serialize>(out: &Path, name: &str, value: &T) -> Result<()> {
    let path = out.join(name);
    pipeline::write_json(&path, value)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn embeddings(path: Option<&Path>) -> Result<EmbeddingTable> {
    Ok(match path {
        Some(p) => load_embeddings(p)?,
        None => EmbeddingTable::empty(1),
    })
}

fn load(inputs: &Inputs) -> Result<Corpus> {
    Ok(load_corpus(&inputs.corpus, &inputs.charges)?)
}

fn refute_cmd(out: &Path, treatment: &str, outcome: &str, mode: ModeArg, repeats: usize, seed: u64) -> Result<()> {
    let table = FactorTable::read_csv(out.join(pipeline::TABLE))?;
    let set = WeightedDagSet::read(out.join(pipeline::DAGS))?;
    let node = |n: &str| {
        set.nodes
            .iter()
            .position(|x| x == n)
            .ok_or_else(|| anyhow!("unknown variable {n:?}"))
    };
    let (t, y) = (node(treatment)?, node(outcome)?);
    // heaviest sampled graph that contains the edge
    let g = (0..set.len())
        .filter(|&i| set.dags[i].has_edge(t, y))
        .max_by(|&a, &b| set.weights[a].total_cmp(&set.weights[b]).then(b.cmp(&a)))
        .ok_or_else(|| anyhow!("{treatment} -> {outcome} is not an edge of any sampled graph"))?;
    let z: Vec<usize> = confounder_set(&set.dags[g], t, y)?
        .into_iter()
        .map(|v| table.index_of(&set.nodes[v]))
        .collect::<gci_core::Result<_>>()?;
    let (tt, ty) = (table.index_of(treatment)?, table.index_of(outcome)?);
    let modes = match mode {
        ModeArg::All => vec![
            RefuterMode::RandomConfounder,
            RefuterMode::PlaceboTreatment,
            RefuterMode::DataSubset,
        ],
        ModeArg::RandomConfounder => vec![RefuterMode::RandomConfounder],
        ModeArg::PlaceboTreatment => vec![RefuterMode::PlaceboTreatment],
        ModeArg::DataSubset => vec![RefuterMode::DataSubset],
    };
    let reports: Vec<RefutationReport> = modes
        .into_iter()
        .map(|m| refute(&table, tt, ty, &z, m, repeats, seed))
        .collect::<gci_core::Result<_>>()?;
    for r in &reports {
        println!(
            "{:?}: original {:.4}, refuted {:.4}, {}",
            r.mode,
            r.original_psi,
            r.refuted_psi,
            if r.pass { "pass" } else { "fail" }
        );
    }
    write_json(out, "refutations.json", &reports)
}

#[derive(Serialize)]
struct DocChains {
    id: String,
    charge: String,
    chains: Vec<CausalChain>,
}

fn chains_cmd(out: &Path, charge: Option<&str>, id: Option<&str>, max_len: usize, which: TableArg) -> Result<()> {
    if max_len < 1 {
        bail!("max-len must be at least 1");
    }
    let name = match which {
        TableArg::Train => pipeline::TABLE,
        TableArg::Test => pipeline::TEST_TABLE,
    };
    let table = FactorTable::read_csv(out.join(name))?;
    let set = WeightedDagSet::read(out.join(pipeline::DAGS))?;
    let charges = table.charges();
    if let Some(c) = charge {
        if !charges.iter().any(|x| x == c) {
            bail!("unknown charge {c:?}");
        }
    }
    let mut docs = Vec::new();
    for r in 0..table.n_rows() {
        let row_id = &table.row_ids()[r];
        if id.is_some_and(|i| i != row_id) {
            continue;
        }
        let Some(target) = charge
            .map(str::to_owned)
            .or_else(|| table.label(r).map(|l| charges[l].clone()))
        else {
            continue;
        };
        let present: Vec<String> = table
            .factor_names()
            .iter()
            .enumerate()
            .filter(|&(f, _)| table.column(f)[r] == 1)
            .map(|(_, n)| n.clone())
            .collect();
        docs.push(DocChains {
            id: row_id.clone(),
            chains: extract_chains(&set, &present, &target, max_len),
            charge: target,
        });
    }
    if let Some(i) = id {
        if docs.is_empty() {
            bail!("no document {i:?} in {name}");
        }
    }
    write_json(out, "chains.json", &docs)
}

#[derive(Serialize)]
struct DocTargets {
    id: String,
    charge: String,
    targets: Vec<f64>,
}

fn attention_cmd(out: &Path, inputs: &Inputs) -> Result<()> {
    let corpus = load(inputs)?;
    let factors: FactorsFile = pipeline::read_json(out.join(pipeline::FACTORS))?;
    let strengths = StrengthMatrix::read_json(out.join(pipeline::STRENGTHS))?;
    let docs: Vec<DocTargets> = corpus
        .documents()
        .iter()
        .filter_map(|d| {
            let gold = d.charge.as_ref()?;
            Some(DocTargets {
                id: d.id.clone(),
                charge: gold.clone(),
                targets: attention_targets(&d.tokens, &factors.vocabulary, &strengths, gold),
            })
        })
        .collect();
    write_json(out, "attention.json", &docs)
}

fn fairness_cmd(out: &Path, inputs: &Inputs, positive: &str) -> Result<()> {
    let corpus = load(inputs)?;
    if corpus.charge_index(positive).is_none() {
        bail!("unknown charge {positive:?}");
    }
    let groups: HashMap<&str, &str> = corpus
        .documents()
        .iter()
        .map(|d| (d.id.as_str(), d.group.as_deref().unwrap_or("none")))
        .collect();
    let (mut p, mut l, mut g) = (Vec::new(), Vec::new(), Vec::new());
    for row in read_predictions(out.join(pipeline::PREDICTIONS))? {
        if row.gold.is_empty() {
            continue;
        }
        let group = groups
            .get(row.id.as_str())
            .ok_or_else(|| anyhow!("prediction for {:?} has no document in the corpus", row.id))?;
        g.push(group.to_string());
        p.push(row.predicted);
        l.push(row.gold);
    }
    let report = fairness_metrics(&p, &l, &g, positive)?;
    println!("FPED {:.4}, FNED {:.4}", report.fped, report.fned);
    write_json(out, "fairness.json", &report)
}

fn export_dot_cmd(out: &Path, graph: GraphArg, index: usize, annotate: bool) -> Result<()> {
    let (text, name) = match graph {
        GraphArg::Pag => {
            let pag = Pag::from_json(&pipeline::read_json(out.join(pipeline::PAG))?)?;
            (export_dot(DotGraph::Pag(&pag)), "pag.dot".to_owned())
        }
        GraphArg::Dag => {
            let set = WeightedDagSet::read(out.join(pipeline::DAGS))?;
            let dag = set
                .dags
                .get(index)
                .ok_or_else(|| anyhow!("index {index} out of range, {} graphs sampled", set.len()))?;
            let text = if annotate {
                let m = StrengthMatrix::read_json(out.join(pipeline::STRENGTHS))?;
                let labels: BTreeMap<(String, String), String> = m
                    .provenance
                    .iter()
                    .filter(|e| e.graph_index == index)
                    .map(|e| ((e.treatment.clone(), e.outcome.clone()), format!("{:.3}", e.psi_hat)))
                    .collect();
                export_dot(DotGraph::Annotated(dag, &labels))
            } else {
                export_dot(DotGraph::Dag(dag))
            };
            (text, format!("dag_{index}.dot"))
        }
    };
    let path = out.join(name);
    fs::write(&path, text).map_err(|e| anyhow!("writing {}: {e}", path.display()))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn synth_cmd(out: &Path, scenario: &str, n: usize, dim: usize, groups: &[String], seed: u64) -> Result<()> {
    let spec = scenarios::by_name(scenario).ok_or_else(|| {
        anyhow!(
            "unknown scenario {scenario:?}; choose one of {}",
            scenarios::NAMES.join(", ")
        )
    })?;
    ensure_out(out)?;
    if spec.label.is_some() {
        let rc = RenderConfig {
            groups: groups.to_vec(),
            ..Default::default()
        };
        let r = render_corpus(&spec, n, seed, &rc)?;
        write_corpus(&r.corpus, out.join("corpus.jsonl"), out.join("charges.txt"))?;
        synth_embeddings(&spec, &rc, dim, seed)?.write(out.join("embeddings.txt"))?;
        println!("wrote corpus.jsonl, charges.txt, embeddings.txt to {}", out.display());
        write_json(out, "truth.json", &r.truth)
    } else {
        let s = synth_generate(&spec, n, seed)?;
        s.table.write_csv(out.join(pipeline::TABLE))?;
        // no charges and no narrative order: nothing is forbidden
        let factors = s.table.factor_names().to_vec();
        let q = factors.len();
        let bg = BackgroundFile {
            charges: vec![],
            precedence: PrecedenceStats {
                factors,
                co_count: vec![vec![0; q]; q],
                after_count: vec![vec![0; q]; q],
            },
            knowledge: Default::default(),
        };
        pipeline::write_json(out.join(pipeline::BACKGROUND), &bg)?;
        println!("wrote table.csv, background.json to {}", out.display());
        write_json(out, "truth.json", &s.truth)
    }
}

fn run(cli: &Cli) -> Result<()> {
    let out = cli.out.as_path();
    match &cli.command {
        Command::Factors {
            inputs,
            embeddings: emb,
            tier,
        } => {
            let cfg = config(cli, *tier)?;
            ensure_out(out)?;
            pipeline::stage_factors(&load(inputs)?, &embeddings(emb.as_deref())?, &cfg, out)?;
        }
        Command::Discover => pipeline::stage_discover(&config(cli, None)?, out)?,
        Command::Sample => pipeline::stage_sample(&config(cli, None)?, out)?,
        Command::Estimate => pipeline::stage_estimate(&config(cli, None)?, out)?,
        Command::Train => pipeline::stage_train(&config(cli, None)?, out)?,
        Command::Predict => {
            let m = pipeline::stage_predict(out)?;
            println!(
                "accuracy {:.4}, macro F1 {:.4} on {} documents",
                m.accuracy, m.macro_f1, m.n_test
            );
        }
        Command::Refute {
            treatment,
            outcome,
            mode,
            repeats,
        } => {
            let cfg = config(cli, None)?;
            refute_cmd(out, treatment, outcome, *mode, *repeats, cfg.master_seed)?
        }
        Command::Chains {
            charge,
            id,
            max_len,
            table,
        } => chains_cmd(out, charge.as_deref(), id.as_deref(), *max_len, *table)?,
        Command::AttentionTargets { inputs } => attention_cmd(out, inputs)?,
        Command::Fairness { inputs, positive } => fairness_cmd(out, inputs, positive)?,
        Command::ExportDot { graph, index, annotate } => export_dot_cmd(out, *graph, *index, *annotate)?,
        Command::Synth {
            scenario,
            n,
            dim,
            groups,
        } => {
            let cfg = config(cli, None)?;
            synth_cmd(out, scenario, *n, *dim, groups, cfg.master_seed)?
        }
        Command::Pipeline {
            inputs,
            embeddings: emb,
            tier,
        } => {
            let cfg = config(cli, *tier)?;
            pipeline::run_pipeline(&inputs.corpus, &inputs.charges, emb.as_deref(), &cfg, out)?;
            let m: pipeline::Metrics = pipeline::read_json(out.join(pipeline::METRICS))?;
            println!(
                "accuracy {:.4}, macro F1 {:.4} on {} documents",
                m.accuracy, m.macro_f1, m.n_test
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
