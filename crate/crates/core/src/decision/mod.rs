//! From strengths to decisions: charge scores, a random forest over them,
//! causal chains, attention targets and group fairness metrics.

mod attention;
mod chains;
mod fairness;
mod forest;
mod scores;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use attention::attention_targets;
pub use chains::{extract_chains, CausalChain};
pub use fairness::{fairness_metrics, FairnessReport, GroupRates};
pub use forest::{train_forest, ForestConfig, ForestModel, Tree, TreeNode};
pub use scores::{charge_scores, ChargeScores};

use crate::error::{GciError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    pub predicted: String,
    /// Empty for unlabeled documents.
    pub gold: String,
}

pub fn write_predictions(path: impl AsRef<Path>, rows: &[Prediction]) -> Result<()> {
    let path = path.as_ref();
    let mut w = crate::io::csv_writer(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| GciError::io(path, e))
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<Prediction>> {
    let mut r = crate::io::csv_reader(path.as_ref())?;
    r.deserialize().map(|x| x.map_err(GciError::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predictions_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.csv");
        let rows = vec![
            Prediction {
                id: "d1".into(),
                predicted: "fraud".into(),
                gold: "fraud".into(),
            },
            Prediction {
                id: "d2".into(),
                predicted: "theft".into(),
                gold: String::new(),
            },
        ];
        write_predictions(&p, &rows).unwrap();
        assert!(std::fs::read_to_string(&p).unwrap().starts_with("id,predicted,gold\n"));
        assert_eq!(read_predictions(&p).unwrap(), rows);
    }
}
