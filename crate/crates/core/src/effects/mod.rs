//! Causal strength of treatment → outcome edges via propensity score
//! matching, aggregated over sampled graphs, plus sensitivity refuters.

mod aggregate;
mod estimate;
mod propensity;
mod refute;

pub use aggregate::{aggregate_strengths, StrengthMatrix};
pub use estimate::{confounder_set, estimate_all, estimate_ate, estimate_ate_with, EdgeStrength, MatchConfig};
pub use propensity::{fit_propensity, PropensityModel};
pub use refute::{refute, RefutationReport, RefuterMode, REFUTE_THRESHOLD};
