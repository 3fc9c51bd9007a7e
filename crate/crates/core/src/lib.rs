//! Graph-based causal inference over binary factors extracted from labeled text.
//!
//! The pipeline runs in stages, each of which can be driven on its own:
//!
//! 1. [`corpus`]: load, validate and balance a tokenized, labeled corpus.
//! 2. [`factors`]: score keywords per charge, cluster them into factors,
//!    binarize documents and derive background knowledge.
//! 3. [`discovery`]: learn a partial ancestral graph (score-based
//!    initialization, then conditional-independence pruning and FCI-style
//!    orientation).
//! 4. [`graphs`]: sample DAGs from the PAG and weight them by BIC.
//! 5. [`effects`]: per-edge causal strength via propensity score matching,
//!    aggregation across graphs, refuters.
//! 6. [`decision`]: charge scores, random forest, causal chains, attention
//!    targets and fairness metrics.
//!
//! [`synth`] provides structural causal models with exact ground truth and
//! [`pipeline`] wires the stages together through files.

pub mod corpus;
pub mod decision;
pub mod discovery;
pub mod effects;
pub mod error;
pub mod factors;
pub mod graphs;
mod io;
pub mod pipeline;
pub mod rng;
pub mod synth;

pub use error::{GciError, Result};
