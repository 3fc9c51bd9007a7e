use crate::effects::StrengthMatrix;
use crate::factors::{charge_column, FactorVocabulary};

/// Per-token supervision targets: a token of factor `f` gets
/// `max(0, ψ̃[f, gold])`, other tokens 0, normalized to sum 1. All-zero
/// weights fall back to the uniform distribution.
pub fn attention_targets(
    tokens: &[String],
    vocab: &FactorVocabulary,
    strengths: &StrengthMatrix,
    gold: &str,
) -> Vec<f64> {
    let outcome = charge_column(gold);
    let raw: Vec<f64> = tokens
        .iter()
        .map(|t| match vocab.factor_of(t) {
            Some(f) => strengths.get(&vocab.factors[f].id, &outcome).max(0.0),
            None => 0.0,
        })
        .collect();
    let total: f64 = raw.iter().sum();
    if tokens.is_empty() {
        return vec![];
    }
    if total > 0.0 {
        raw.into_iter().map(|w| w / total).collect()
    } else {
        vec![1.0 / tokens.len() as f64; tokens.len()]
    }
}
