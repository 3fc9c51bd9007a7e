use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{GciError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordScore {
    pub word: String,
    pub charge: String,
    pub importance: f64,
}

/// Scores every candidate word of every charge. Implementations return one
/// entry per (word, charge) with a finite, nonnegative importance.
pub trait KeywordScorer {
    fn score(&self, corpus: &Corpus, stopwords: &HashSet<String>) -> Result<Vec<KeywordScore>>;
}

/// `coverage(w, c) * idf(w)`, clamped at zero.
///
/// coverage is the fraction of charge-`c` training documents containing `w`;
/// `idf(w) = ln(N / (1 + df(w)))` over the labeled training documents.
#[derive(Debug, Clone, Copy, Default)]
pub struct CoverageIdf;

impl KeywordScorer for CoverageIdf {
    fn score(&self, corpus: &Corpus, stopwords: &HashSet<String>) -> Result<Vec<KeywordScore>> {
        let m = corpus.charges().len();
        let mut per_charge_docs = vec![0usize; m];
        let mut per_charge_df: Vec<BTreeMap<&str, usize>> = vec![BTreeMap::new(); m];
        let mut df: BTreeMap<&str, usize> = BTreeMap::new();
        let mut n_train = 0usize;
        for doc in corpus.train() {
            let Some(ci) = doc.charge.as_deref().and_then(|c| corpus.charge_index(c)) else {
                continue;
            };
            n_train += 1;
            per_charge_docs[ci] += 1;
            let words: BTreeSet<&str> = doc
                .tokens
                .iter()
                .map(String::as_str)
                .filter(|w| !stopwords.contains(*w))
                .collect();
            for w in words {
                *df.entry(w).or_default() += 1;
                *per_charge_df[ci].entry(w).or_default() += 1;
            }
        }
        if let Some(ci) = per_charge_docs.iter().position(|&n| n == 0) {
            return Err(GciError::invalid(format!(
                "charge {:?} has no training documents",
                corpus.charges()[ci]
            )));
        }
        let mut out = Vec::new();
        for (ci, charge) in corpus.charges().iter().enumerate() {
            for (&w, &n_cw) in &per_charge_df[ci] {
                let coverage = n_cw as f64 / per_charge_docs[ci] as f64;
                let idf = (n_train as f64 / (1.0 + df[w] as f64)).ln();
                out.push(KeywordScore {
                    word: w.to_owned(),
                    charge: charge.clone(),
                    importance: (coverage * idf).max(0.0),
                });
            }
        }
        Ok(out)
    }
}

/// The `p` highest-importance words of each charge, charge by charge; ties
/// go to the lexicographically smaller word.
pub fn score_keywords(corpus: &Corpus, p: usize, stopwords: &HashSet<String>) -> Result<Vec<KeywordScore>> {
    score_keywords_with(&CoverageIdf, corpus, p, stopwords)
}

pub fn score_keywords_with(
    scorer: &dyn KeywordScorer,
    corpus: &Corpus,
    p: usize,
    stopwords: &HashSet<String>,
) -> Result<Vec<KeywordScore>> {
    if p < 1 {
        return Err(GciError::invalid("p must be at least 1"));
    }
    let all = scorer.score(corpus, stopwords)?;
    let mut out = Vec::new();
    for charge in corpus.charges() {
        let mut mine: Vec<&KeywordScore> = all.iter().filter(|k| &k.charge == charge).collect();
        mine.sort_by(|a, b| b.importance.total_cmp(&a.importance).then_with(|| a.word.cmp(&b.word)));
        out.extend(mine.into_iter().take(p).cloned());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Document, Split};

    fn corpus() -> Corpus {
        // 10 docs of A all containing "only_a"; 10 docs of B. "the" everywhere.
        let mut docs = Vec::new();
        for i in 0..10 {
            docs.push(Document {
                id: format!("a{i}"),
                tokens: vec!["the".into(), "only_a".into(), format!("rare{i}")],
                charge: Some("A".into()),
                group: None,
                split: Split::Train,
            });
            docs.push(Document {
                id: format!("b{i}"),
                tokens: vec!["the".into(), if i < 5 { "half_b" } else { "x" }.into()],
                charge: Some("B".into()),
                group: None,
                split: Split::Train,
            });
        }
        docs.push(Document {
            id: "t".into(),
            tokens: vec!["only_a".into(), "half_b".into()],
            charge: Some("B".into()),
            group: None,
            split: Split::Test,
        });
        Corpus::new(docs, vec!["A".into(), "B".into()]).unwrap()
    }

    fn find<'a>(ks: &'a [KeywordScore], w: &str, c: &str) -> Option<&'a KeywordScore> {
        ks.iter().find(|k| k.word == w && k.charge == c)
    }

    #[test]
    fn coverage_idf_matches_hand_value() {
        let all = CoverageIdf.score(&corpus(), &HashSet::new()).unwrap();
        // in all 10 of A's docs and nowhere else, N_train = 20: ln(20/11)
        let k = find(&all, "only_a", "A").unwrap();
        assert!((k.importance - (20.0f64 / 11.0).ln()).abs() < 1e-12);
        assert!((k.importance - 0.598).abs() < 1e-3);
        // 5 of 10 B docs: 0.5 * ln(20/6)
        let k = find(&all, "half_b", "B").unwrap();
        assert!((k.importance - 0.5 * (20.0f64 / 6.0).ln()).abs() < 1e-12);
    }

    #[test]
    fn ubiquitous_word_clamps_to_zero_and_ranks_last() {
        let all = CoverageIdf.score(&corpus(), &HashSet::new()).unwrap();
        assert_eq!(find(&all, "the", "A").unwrap().importance, 0.0);
        let top = score_keywords(&corpus(), 12, &HashSet::new()).unwrap();
        let a: Vec<&str> = top
            .iter()
            .filter(|k| k.charge == "A")
            .map(|k| k.word.as_str())
            .collect();
        assert_eq!(a[0], "only_a");
        assert_eq!(*a.last().unwrap(), "the");
    }

    #[test]
    fn top_p_with_lexicographic_ties_and_stopwords() {
        let stop: HashSet<String> = ["only_a".to_string()].into();
        let top = score_keywords(&corpus(), 2, &stop).unwrap();
        let a: Vec<&str> = top
            .iter()
            .filter(|k| k.charge == "A")
            .map(|k| k.word.as_str())
            .collect();
        // rare0..rare9 tie; smallest two names win
        assert_eq!(a, vec!["rare0", "rare1"]);
        assert_eq!(top.len(), 4);
    }

    #[test]
    fn rejects_bad_p_and_missing_charge() {
        assert!(score_keywords(&corpus(), 0, &HashSet::new()).is_err());
        let c = corpus().filtered(|d| d.charge.as_deref() != Some("B") || !d.is_train());
        assert!(score_keywords(&c, 3, &HashSet::new()).is_err());
    }

    #[test]
    fn invariant_under_document_reordering() {
        let c = corpus();
        let (mut docs, charges) = c.clone().into_parts();
        docs.reverse();
        let r = Corpus::new(docs, charges).unwrap();
        assert_eq!(
            score_keywords(&c, 5, &HashSet::new()).unwrap(),
            score_keywords(&r, 5, &HashSet::new()).unwrap()
        );
    }
}
