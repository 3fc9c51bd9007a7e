//! Keyword extraction, clustering into binary factors, and background
//! knowledge derived from narration order.

mod cluster;
mod keywords;
mod table;
mod temporal;

pub use cluster::{cluster_keywords, Factor, FactorVocabulary};
pub use keywords::{score_keywords, score_keywords_with, CoverageIdf, KeywordScore, KeywordScorer};
pub use table::{binarize, binarize_documents, charge_column, FactorTable, CHARGE_PREFIX};
pub use temporal::{background_knowledge, temporal_precedence, BackgroundKnowledge, PrecedenceStats};
