use serde::{Deserialize, Serialize};

use crate::effects::StrengthMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargeScores {
    pub id: String,
    /// One score per outcome column of the strength matrix.
    pub scores: Vec<f64>,
}

/// `S(Y_i) = Σ ψ̃[T_j, Y_i] · τ(T_j)` over the treatments of `Y_i` (factors
/// with nonzero strength toward it). `row` follows `strengths.factors`.
pub fn charge_scores(id: &str, row: &[u8], strengths: &StrengthMatrix) -> ChargeScores {
    let scores = (0..strengths.outcomes.len())
        .map(|o| {
            strengths
                .treatments_of(o)
                .into_iter()
                .filter(|&f| row.get(f) == Some(&1))
                .map(|f| strengths.psi_tilde[f][o])
                .sum()
        })
        .collect();
    ChargeScores {
        id: id.to_owned(),
        scores,
    }
}
