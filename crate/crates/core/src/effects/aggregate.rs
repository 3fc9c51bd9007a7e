use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EdgeStrength;
use crate::error::{GciError, Result};
use crate::graphs::WeightedDagSet;

/// Graph-weighted strengths, one row per factor and one column per outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrengthMatrix {
    pub factors: Vec<String>,
    pub outcomes: Vec<String>,
    /// `psi_tilde[f][o]`
    pub psi_tilde: Vec<Vec<f64>>,
    pub provenance: Vec<EdgeStrength>,
}

/// `ψ̃[T, Y] = Σ_q w_q · ψ̂_q[T, Y]`, with absent edges contributing 0.
/// Rows are the graph nodes that are not outcomes.
pub fn aggregate_strengths(
    strengths: &[EdgeStrength],
    set: &WeightedDagSet,
    outcomes: &[String],
) -> Result<StrengthMatrix> {
    let factors: Vec<String> = set.nodes.iter().filter(|n| !outcomes.contains(n)).cloned().collect();
    let mut psi = vec![vec![0.0; outcomes.len()]; factors.len()];
    let mut provenance = Vec::new();
    for s in strengths {
        let w = *set
            .weights
            .get(s.graph_index)
            .ok_or_else(|| GciError::invalid(format!("graph index {} out of range", s.graph_index)))?;
        let (Some(f), Some(o)) = (
            factors.iter().position(|x| *x == s.treatment),
            outcomes.iter().position(|x| *x == s.outcome),
        ) else {
            continue;
        };
        psi[f][o] += w * s.psi_hat;
        provenance.push(s.clone());
    }
    Ok(StrengthMatrix {
        factors,
        outcomes: outcomes.to_vec(),
        psi_tilde: psi,
        provenance,
    })
}

impl StrengthMatrix {
    pub fn get(&self, factor: &str, outcome: &str) -> f64 {
        match (
            self.factors.iter().position(|x| x == factor),
            self.outcomes.iter().position(|x| x == outcome),
        ) {
            (Some(f), Some(o)) => self.psi_tilde[f][o],
            _ => 0.0,
        }
    }

    /// Factors with nonzero strength toward outcome column `o`.
    pub fn treatments_of(&self, o: usize) -> Vec<usize> {
        (0..self.factors.len())
            .filter(|&f| self.psi_tilde[f][o] != 0.0)
            .collect()
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| GciError::io(path, e))
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| GciError::io(path, e))?;
        let m: StrengthMatrix = serde_json::from_str(&text)?;
        if m.psi_tilde.len() != m.factors.len() || m.psi_tilde.iter().any(|r| r.len() != m.outcomes.len()) {
            return Err(GciError::invalid(format!(
                "{}: matrix shape disagrees with labels",
                path.display()
            )));
        }
        Ok(m)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = crate::io::csv_writer(path.as_ref())?;
        let mut header = vec!["factor".to_owned()];
        header.extend(self.outcomes.iter().cloned());
        w.write_record(&header)?;
        for (f, row) in self.factors.iter().zip(&self.psi_tilde) {
            let mut rec = vec![f.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| GciError::io(path.as_ref(), e))
    }
}
