//! Sampling DAGs out of a PAG, BIC weighting and DOT export.

mod dag;
mod dot;
mod sample;
mod weights;

pub use dag::{Dag, DagEdges};
pub use dot::{export_dot, DotGraph};
pub use sample::sample_dags;
pub use weights::{graph_bic, weight_graphs, weights_from_bic, WeightMode, WeightedDagSet, WeightedDagSetJson};
