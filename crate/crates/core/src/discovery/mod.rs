//! Partial ancestral graph discovery: greedy BIC initialization followed by
//! conditional-independence pruning and FCI orientation rules R1-R4.

mod citest;
mod fci;
mod hillclimb;
mod pag;
mod score;

use serde::{Deserialize, Serialize};

pub use citest::{chi2_sf, ci_test, CiResult};
pub use fci::build_pag;
pub use hillclimb::greedy_init;
pub use pag::{EdgeKind, Mark, Pag, PagEdgeJson, PagJson, SepsetJson, SepsetMap};
pub use score::local_bic;

use crate::error::{GciError, Result};
use crate::factors::{BackgroundKnowledge, FactorTable};
use crate::graphs::Dag;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiscoveryConfig {
    pub alpha: f64,
    pub max_cond: usize,
    pub min_count_per_cell_multiplier: usize,
    pub use_score_init: bool,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        DiscoveryConfig {
            alpha: 0.05,
            max_cond: 3,
            min_count_per_cell_multiplier: 10,
            use_score_init: true,
        }
    }
}

impl DiscoveryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(GciError::invalid(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Discovery {
    pub pag: Pag,
    pub sepsets: SepsetMap,
    /// Graph the constraint phase started from.
    pub init: Dag,
}

/// Greedy BIC initialization (or the complete graph when disabled) followed
/// by [`build_pag`].
pub fn discover(table: &FactorTable, bk: &BackgroundKnowledge, cfg: &DiscoveryConfig) -> Result<Discovery> {
    cfg.validate()?;
    if table.n_vars() < 2 {
        return Err(GciError::invalid("discovery needs at least two variables"));
    }
    let init = if cfg.use_score_init {
        greedy_init(table, bk)
    } else {
        let n = table.n_vars();
        Dag::from_edges(
            table.names().to_vec(),
            (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))),
        )
    };
    let (pag, sepsets) = build_pag(&init, table, bk, cfg)?;
    Ok(Discovery { pag, sepsets, init })
}
