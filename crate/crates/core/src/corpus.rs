//! Tokenized, labeled case corpus and word embeddings.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{GciError, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub tokens: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub split: Split,
}

impl Document {
    pub fn is_train(&self) -> bool {
        self.split == Split::Train
    }
}

/// Validated corpus: unique ids, non-empty token lists, labels drawn from
/// the ordered charge set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<Document>,
    charges: Vec<String>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>, charges: Vec<String>) -> Result<Self> {
        if charges.len() < 2 {
            return Err(GciError::InvalidCorpus(format!(
                "need at least 2 charges, got {}",
                charges.len()
            )));
        }
        let charge_set: HashSet<&str> = charges.iter().map(String::as_str).collect();
        if charge_set.len() != charges.len() {
            return Err(GciError::InvalidCorpus("duplicate charge name".into()));
        }
        let mut ids = HashSet::with_capacity(documents.len());
        for doc in &documents {
            validate_document(doc, &charge_set)?;
            if !ids.insert(doc.id.as_str()) {
                return Err(GciError::InvalidCorpus(format!("duplicate id {:?}", doc.id)));
            }
        }
        Ok(Corpus { documents, charges })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn charges(&self) -> &[String] {
        &self.charges
    }

    pub fn charge_index(&self, charge: &str) -> Option<usize> {
        self.charges.iter().position(|c| c == charge)
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn train(&self) -> impl Iterator<Item = &Document> {
        self.documents.iter().filter(|d| d.is_train())
    }

    pub fn test(&self) -> impl Iterator<Item = &Document> {
        self.documents.iter().filter(|d| !d.is_train())
    }

    /// Labeled training document count per charge, in charge order.
    pub fn train_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.charges.len()];
        for doc in self.train() {
            if let Some(i) = doc.charge.as_deref().and_then(|c| self.charge_index(c)) {
                counts[i] += 1;
            }
        }
        counts
    }

    /// Keeps only the documents accepted by `keep`, preserving order.
    pub fn filtered(&self, mut keep: impl FnMut(&Document) -> bool) -> Corpus {
        Corpus {
            documents: self.documents.iter().filter(|d| keep(d)).cloned().collect(),
            charges: self.charges.clone(),
        }
    }

    pub fn into_parts(self) -> (Vec<Document>, Vec<String>) {
        (self.documents, self.charges)
    }
}

fn validate_document(doc: &Document, charges: &HashSet<&str>) -> Result<()> {
    if doc.tokens.is_empty() {
        return Err(GciError::InvalidCorpus(format!("document {:?} has no tokens", doc.id)));
    }
    if let Some(c) = &doc.charge {
        if !charges.contains(c.as_str()) {
            return Err(GciError::InvalidCorpus(format!(
                "document {:?} has charge {:?} outside the charge set",
                doc.id, c
            )));
        }
    }
    Ok(())
}

pub fn load_charges(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| GciError::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect())
}

/// Loads a line-delimited JSON corpus and its charge file.
pub fn load_corpus(path: impl AsRef<Path>, charges_path: impl AsRef<Path>) -> Result<Corpus> {
    let charges = load_charges(charges_path)?;
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| GciError::io(path, e))?;
    let charge_set: HashSet<&str> = charges.iter().map(String::as_str).collect();
    let mut documents = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| GciError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| GciError::Parse {
            path: path.display().to_string(),
            line: i + 1,
            message,
        };
        let doc: Document = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        validate_document(&doc, &charge_set).map_err(|e| parse_err(e.to_string()))?;
        if !seen.insert(doc.id.clone()) {
            return Err(parse_err(format!("duplicate id {:?}", doc.id)));
        }
        documents.push(doc);
    }
    Corpus::new(documents, charges)
}

pub fn write_corpus(corpus: &Corpus, path: impl AsRef<Path>, charges_path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for doc in &corpus.documents {
        out.push_str(&serde_json::to_string(doc)?);
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| GciError::io(path, e))?;
    let charges_path = charges_path.as_ref();
    let mut f = fs::File::create(charges_path).map_err(|e| GciError::io(charges_path, e))?;
    for c in &corpus.charges {
        writeln!(f, "{c}").map_err(|e| GciError::io(charges_path, e))?;
    }
    Ok(())
}

/// Oversamples (with replacement) the training documents of every charge
/// whose count is more than three times below the largest charge, until it
/// reaches `ceil(largest / 3)`. Duplicates are appended after the original
/// documents with ids suffixed `#dup<k>`; the test split is untouched.
pub fn balance_corpus(corpus: &Corpus, seed: u64) -> Result<Corpus> {
    let counts = corpus.train_counts();
    if let Some(i) = counts.iter().position(|&c| c == 0) {
        return Err(GciError::InvalidCorpus(format!(
            "charge {:?} has no training documents",
            corpus.charges[i]
        )));
    }
    let largest = counts.iter().copied().max().unwrap_or(0);
    let target = largest.div_ceil(3);
    let mut documents = corpus.documents.clone();
    let mut ids: HashSet<String> = documents.iter().map(|d| d.id.clone()).collect();
    for (ci, charge) in corpus.charges.iter().enumerate() {
        if counts[ci] * 3 >= largest {
            continue;
        }
        let pool: Vec<&Document> = corpus
            .train()
            .filter(|d| d.charge.as_deref() == Some(charge.as_str()))
            .collect();
        let mut rng = rng::stream(seed, ci as u64);
        let mut k = 0usize;
        for _ in counts[ci]..target {
            let src = pool[rng.gen_range(0..pool.len())];
            let mut dup = src.clone();
            loop {
                dup.id = format!("{}#dup{}", src.id, k);
                k += 1;
                if ids.insert(dup.id.clone()) {
                    break;
                }
            }
            documents.push(dup);
        }
    }
    Corpus::new(documents, corpus.charges.clone())
}

/// Word vectors of a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dimension: usize,
    vectors: HashMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dimension: usize, vectors: HashMap<String, Vec<f64>>) -> Result<Self> {
        if dimension == 0 {
            return Err(GciError::invalid("embedding dimension must be positive"));
        }
        for (w, v) in &vectors {
            if v.len() != dimension {
                return Err(GciError::invalid(format!(
                    "vector for {w:?} has {} components, expected {dimension}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(GciError::invalid(format!("vector for {w:?} is not finite")));
            }
        }
        Ok(EmbeddingTable { dimension, vectors })
    }

    pub fn empty(dimension: usize) -> Self {
        EmbeddingTable {
            dimension: dimension.max(1),
            vectors: HashMap::new(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// `None` for words absent from the table.
    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.vectors.get(word).map(Vec::as_slice)
    }

    /// Writes the plain-text format, words in lexicographic order.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let sorted: BTreeMap<&String, &Vec<f64>> = self.vectors.iter().collect();
        let mut out = format!("{} {}\n", self.vectors.len(), self.dimension);
        for (w, v) in sorted {
            out.push_str(w);
            for x in v {
                out.push(' ');
                out.push_str(&format!("{x}"));
            }
            out.push('\n');
        }
        fs::write(path, out).map_err(|e| GciError::io(path, e))
    }
}

/// Loads `vocab_size dimension` followed by `word v1 .. v_dim` lines.
pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| GciError::io(path, e))?;
    let err = |line: usize, message: String| GciError::Parse {
        path: path.display().to_string(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| err(1, "missing header".into()))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    let (vocab, dim) = match head.as_slice() {
        [v, d] => (
            v.parse::<usize>().map_err(|e| err(1, format!("vocab size: {e}")))?,
            d.parse::<usize>().map_err(|e| err(1, format!("dimension: {e}")))?,
        ),
        _ => return Err(err(1, "header must be `vocab_size dimension`".into())),
    };
    if dim == 0 {
        return Err(err(1, "dimension must be positive".into()));
    }
    let mut vectors = HashMap::with_capacity(vocab);
    for (i, line) in lines {
        let mut parts = line.split_whitespace();
        let word = parts.next().unwrap_or_default().to_owned();
        let v: Vec<f64> = parts
            .map(|p| p.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| err(i + 1, format!("non-numeric component: {e}")))?;
        if v.len() != dim {
            return Err(err(i + 1, format!("expected {dim} components, found {}", v.len())));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(err(i + 1, "non-finite component".into()));
        }
        if vectors.insert(word.clone(), v).is_some() {
            return Err(err(i + 1, format!("duplicate word {word:?}")));
        }
    }
    if vectors.len() != vocab {
        return Err(err(
            1,
            format!("header declares {vocab} words, file has {}", vectors.len()),
        ));
    }
    EmbeddingTable::new(dim, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn doc(id: &str, tokens: &[&str], charge: Option<&str>, split: Split) -> Document {
        Document {
            id: id.into(),
            tokens: tokens.iter().map(|s| s.to_string()).collect(),
            charge: charge.map(str::to_owned),
            group: None,
            split,
        }
    }

    fn counts_corpus(counts: &[(&str, usize)]) -> Corpus {
        let mut docs = Vec::new();
        for (c, n) in counts {
            for i in 0..*n {
                docs.push(doc(&format!("{c}{i}"), &["w", c], Some(c), Split::Train));
            }
            docs.push(doc(&format!("{c}-test"), &["w"], Some(c), Split::Test));
        }
        Corpus::new(docs, counts.iter().map(|(c, _)| c.to_string()).collect()).unwrap()
    }

    #[test]
    fn load_minimal_corpus() {
        let dir = tempfile::tempdir().unwrap();
        let c = dir.path().join("c.jsonl");
        let ch = dir.path().join("ch.txt");
        fs::write(
            &c,
            "{\"id\":\"1\",\"tokens\":[\"a\"],\"charge\":\"fraud\",\"split\":\"train\"}\n\
             {\"id\":\"2\",\"tokens\":[\"b\"],\"charge\":\"extortion\",\"split\":\"test\"}\n",
        )
        .unwrap();
        fs::write(&ch, "fraud\nextortion\n").unwrap();
        let corpus = load_corpus(&c, &ch).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.charges().len(), 2);
    }

    #[test]
    fn unknown_charge_names_the_document() {
        let dir = tempfile::tempdir().unwrap();
        let c = dir.path().join("c.jsonl");
        let ch = dir.path().join("ch.txt");
        fs::write(
            &c,
            "{\"id\":\"ok\",\"tokens\":[\"a\"],\"charge\":\"fraud\",\"split\":\"train\"}\n\
             {\"id\":\"bad-7\",\"tokens\":[\"b\"],\"charge\":\"theft\",\"split\":\"train\"}\n",
        )
        .unwrap();
        fs::write(&ch, "fraud\nextortion\n").unwrap();
        let err = load_corpus(&c, &ch).unwrap_err().to_string();
        assert!(err.contains("bad-7"), "{err}");
        assert!(err.contains(":2:"), "{err}");
    }

    #[test]
    fn malformed_and_duplicate_records() {
        let dir = tempfile::tempdir().unwrap();
        let c = dir.path().join("c.jsonl");
        let ch = dir.path().join("ch.txt");
        fs::write(&ch, "a\nb\n").unwrap();
        fs::write(&c, "{\"id\":\"1\",\"tokens\":[\"x\"],\"split\":\"train\"}\n{not json\n").unwrap();
        assert!(load_corpus(&c, &ch).unwrap_err().to_string().contains(":2:"));
        fs::write(
            &c,
            "{\"id\":\"1\",\"tokens\":[\"x\"],\"split\":\"train\"}\n{\"id\":\"1\",\"tokens\":[\"y\"],\"split\":\"test\"}\n",
        )
        .unwrap();
        assert!(load_corpus(&c, &ch).unwrap_err().to_string().contains("duplicate"));
        fs::write(&c, "{\"id\":\"1\",\"tokens\":[],\"split\":\"train\"}\n").unwrap();
        assert!(load_corpus(&c, &ch).is_err());
    }

    #[test]
    fn balance_within_three_times_is_noop() {
        let c = counts_corpus(&[("A", 300), ("B", 290)]);
        assert_eq!(balance_corpus(&c, 1).unwrap(), c);
    }

    #[test]
    fn balance_oversamples_to_a_third_of_largest() {
        let c = counts_corpus(&[("A", 900), ("B", 100)]);
        let b = balance_corpus(&c, 1).unwrap();
        assert_eq!(b.train_counts(), vec![900, 300]);
        assert_eq!(b.test().count(), 2);
        // boundary: exactly three times fewer is not "more than" three times fewer
        let c = counts_corpus(&[("A", 300), ("B", 100)]);
        assert_eq!(balance_corpus(&c, 1).unwrap().train_counts(), vec![300, 100]);
    }

    #[test]
    fn balance_is_deterministic() {
        let c = counts_corpus(&[("A", 900), ("B", 100), ("C", 50)]);
        let x = balance_corpus(&c, 7).unwrap();
        let y = balance_corpus(&c, 7).unwrap();
        assert_eq!(x, y);
        assert_eq!(x.train_counts(), vec![900, 300, 300]);
        assert_ne!(x, balance_corpus(&c, 8).unwrap());
    }

    #[test]
    fn balance_rejects_empty_charge() {
        let c = counts_corpus(&[("A", 10), ("B", 0)]);
        assert!(balance_corpus(&c, 0).is_err());
    }

    #[test]
    fn embeddings_format() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.txt");
        fs::write(&p, "2 3\na 1 0 0\nb 0 1 0\n").unwrap();
        let t = load_embeddings(&p).unwrap();
        assert_eq!((t.len(), t.dimension()), (2, 3));
        assert_eq!(t.get("a"), Some(&[1.0, 0.0, 0.0][..]));
        assert_eq!(t.get("zzz"), None);

        fs::write(&p, "2 3\na 1 0 0\nb 0 1\n").unwrap();
        let e = load_embeddings(&p).unwrap_err().to_string();
        assert!(e.contains(":3:"), "{e}");
        fs::write(&p, "1 2\na 1 x\n").unwrap();
        assert!(load_embeddings(&p).unwrap_err().to_string().contains("non-numeric"));
    }

    #[test]
    fn embeddings_write_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.txt");
        let mut v = HashMap::new();
        v.insert("x".to_string(), vec![0.25, -1.5]);
        v.insert("y".to_string(), vec![1e-3, 2.0]);
        let t = EmbeddingTable::new(2, v).unwrap();
        t.write(&p).unwrap();
        assert_eq!(load_embeddings(&p).unwrap(), t);
    }
}
