use gci_core::corpus::Split;
use gci_core::decision::charge_scores;
use gci_core::discovery::{discover, DiscoveryConfig};
use gci_core::effects::{aggregate_strengths, estimate_all, MatchConfig, StrengthMatrix};
use gci_core::factors::{
    background_knowledge, binarize_documents, charge_column, temporal_precedence, BackgroundKnowledge, FactorTable,
};
use gci_core::graphs::{sample_dags, weight_graphs, Dag, WeightMode, WeightedDagSet};
use gci_core::synth::{exact_ate, planted_vocabulary, render_corpus, scenarios, synth_generate, RenderConfig};

fn truth_set(table: &FactorTable, edges: &[(&str, &str)]) -> WeightedDagSet {
    let nodes = table.names().to_vec();
    let ix = |n: &str| nodes.iter().position(|x| x == n).unwrap();
    let dag = Dag::from_edges(nodes.clone(), edges.iter().map(|&(a, b)| (ix(a), ix(b))));
    weight_graphs(vec![dag], table, WeightMode::Softmax, 0).unwrap()
}

#[test]
fn planted_two_edge_model() {
    let spec = scenarios::collider();
    let t = synth_generate(&spec, 5000, 8).unwrap().table;
    let set = truth_set(&t, &[("A", "C"), ("B", "C")]);
    let all = estimate_all(&set, &t, &["C".to_string()], false, &MatchConfig::default()).unwrap();
    assert_eq!(all.len(), 2);
    for e in &all {
        let want = exact_ate(&spec, &e.treatment, &e.outcome).unwrap();
        assert!(
            (e.psi_hat - want).abs() <= 0.05,
            "{} -> C: {} vs {want}",
            e.treatment,
            e.psi_hat
        );
    }
}

#[test]
fn aggregated_strength_over_sampled_graphs() {
    let spec = scenarios::confounded();
    let raw = synth_generate(&spec, 5000, 9).unwrap().table;
    // Y becomes a charge column with no outgoing edges
    let y = charge_column("y");
    let cols: Vec<Vec<u8>> = (0..3).map(|v| raw.column(v).to_vec()).collect();
    let ids = raw.row_ids().to_vec();
    let t = FactorTable::new(vec!["C".into(), "T".into(), y.clone()], 2, ids, cols).unwrap();
    let mut bk = BackgroundKnowledge::default();
    bk.forbid_outgoing(std::slice::from_ref(&y), t.names());
    bk.forbid("T", "C");
    let d = discover(&t, &bk, &DiscoveryConfig::default()).unwrap();
    let set = weight_graphs(sample_dags(&d.pag, 5, &bk, 3), &t, WeightMode::Softmax, 3).unwrap();
    let outcomes = vec![y.clone()];
    let all = estimate_all(&set, &t, &outcomes, false, &MatchConfig::default()).unwrap();
    let m = aggregate_strengths(&all, &set, &outcomes).unwrap();
    let want = exact_ate(&spec, "T", "Y").unwrap();
    assert!((m.get("T", &y) - want).abs() <= 0.07, "{} vs {want}", m.get("T", &y));
}

#[test]
fn generator_graph_gets_the_largest_weight() {
    let t = synth_generate(&scenarios::chain(), 5000, 10).unwrap().table;
    let d = discover(&t, &BackgroundKnowledge::default(), &DiscoveryConfig::default()).unwrap();
    let mut dags = sample_dags(&d.pag, 5, &BackgroundKnowledge::default(), 4);
    dags[0] = Dag::from_edges(t.names().to_vec(), [(0, 1), (1, 2)]);
    let set = weight_graphs(dags, &t, WeightMode::Softmax, 4).unwrap();
    let best = set.weights.iter().copied().fold(0.0, f64::max);
    assert!(set.weights[0] >= best - 1e-12, "{:?}", set.weights);
}

#[test]
fn argmax_score_recovers_the_planted_charge() {
    let spec = scenarios::fraud_extortion();
    let r = render_corpus(&spec, 2000, 12, &RenderConfig::default()).unwrap();
    let vocab = planted_vocabulary(&spec).unwrap();
    let train = r.corpus.filtered(|d| d.split == Split::Train);
    let table = binarize_documents(train.documents().iter(), train.charges(), &vocab);
    let stats = temporal_precedence(&train, &vocab);
    let bk = background_knowledge(&stats, train.charges(), 0.8, 10).unwrap();
    let d = discover(&table, &bk, &DiscoveryConfig::default()).unwrap();
    let set = weight_graphs(sample_dags(&d.pag, 5, &bk, 1), &table, WeightMode::Softmax, 1).unwrap();
    let outcomes: Vec<String> = table.outcome_vars().map(|v| table.name(v).to_owned()).collect();
    let all = estimate_all(&set, &table, &outcomes, false, &MatchConfig::default()).unwrap();
    let m: StrengthMatrix = aggregate_strengths(&all, &set, &outcomes).unwrap();

    let test = binarize_documents(r.corpus.test(), r.corpus.charges(), &vocab);
    let cols: Vec<usize> = m.factors.iter().map(|f| test.index_of(f).unwrap()).collect();
    let mut hits = 0;
    for row in 0..test.n_rows() {
        let x: Vec<u8> = cols.iter().map(|&c| test.column(c)[row]).collect();
        let s = charge_scores(&test.row_ids()[row], &x, &m).scores;
        let best = if s[1] > s[0] { 1 } else { 0 };
        hits += usize::from(Some(best) == test.label(row));
    }
    let acc = hits as f64 / test.n_rows() as f64;
    assert!(acc >= 0.9, "{acc}");
}
