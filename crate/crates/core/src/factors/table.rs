use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::FactorVocabulary;
use crate::corpus::{Corpus, Document};
use crate::error::{GciError, Result};

/// Prefix of charge-indicator column names.
pub const CHARGE_PREFIX: &str = "Y:";

pub fn charge_column(charge: &str) -> String {
    format!("{CHARGE_PREFIX}{charge}")
}

/// Binary data matrix: factor columns first, then one indicator per charge.
/// Stored column-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorTable {
    names: Vec<String>,
    n_factors: usize,
    row_ids: Vec<String>,
    columns: Vec<Vec<u8>>,
}

impl FactorTable {
    pub fn new(names: Vec<String>, n_factors: usize, row_ids: Vec<String>, columns: Vec<Vec<u8>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(GciError::invalid("column count differs from name count"));
        }
        if n_factors > names.len() {
            return Err(GciError::invalid("more factors than columns"));
        }
        let mut seen = HashSet::new();
        for n in &names {
            if !seen.insert(n.as_str()) {
                return Err(GciError::invalid(format!("duplicate variable name {n:?}")));
            }
        }
        for (i, n) in names.iter().enumerate() {
            if (i >= n_factors) != n.starts_with(CHARGE_PREFIX) {
                return Err(GciError::invalid(format!(
                    "variable {n:?}: charge indicators must follow the factors and carry the {CHARGE_PREFIX:?} prefix"
                )));
            }
        }
        for (c, col) in columns.iter().enumerate() {
            if col.len() != row_ids.len() {
                return Err(GciError::invalid(format!(
                    "column {:?} has {} rows, expected {}",
                    names[c],
                    col.len(),
                    row_ids.len()
                )));
            }
            if col.iter().any(|&v| v > 1) {
                return Err(GciError::invalid(format!("column {:?} is not binary", names[c])));
            }
        }
        let table = FactorTable {
            names,
            n_factors,
            row_ids,
            columns,
        };
        for r in 0..table.n_rows() {
            let ones = (table.n_factors..table.n_vars())
                .filter(|&c| table.columns[c][r] == 1)
                .count();
            if ones > 1 {
                return Err(GciError::invalid(format!(
                    "row {:?} has {ones} charge indicators set",
                    table.row_ids[r]
                )));
            }
        }
        Ok(table)
    }

    /// A table of plain binary variables with no charge indicators.
    pub fn from_columns(names: Vec<String>, columns: Vec<Vec<u8>>) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        let k = names.len();
        FactorTable::new(names, k, (0..n).map(|i| i.to_string()).collect(), columns)
    }

    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn n_vars(&self) -> usize {
        self.names.len()
    }

    pub fn n_factors(&self) -> usize {
        self.n_factors
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, var: usize) -> &str {
        &self.names[var]
    }

    pub fn row_ids(&self) -> &[String] {
        &self.row_ids
    }

    pub fn factor_names(&self) -> &[String] {
        &self.names[..self.n_factors]
    }

    /// Charge indicator variable indices.
    pub fn outcome_vars(&self) -> std::ops::Range<usize> {
        self.n_factors..self.names.len()
    }

    /// Charge names, without the column prefix.
    pub fn charges(&self) -> Vec<String> {
        self.names[self.n_factors..]
            .iter()
            .map(|n| n[CHARGE_PREFIX.len()..].to_owned())
            .collect()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| GciError::UnknownVariable(name.to_owned()))
    }

    pub fn column(&self, var: usize) -> &[u8] {
        &self.columns[var]
    }

    /// Factor presence vector of one row.
    pub fn factor_row(&self, row: usize) -> Vec<u8> {
        self.columns[..self.n_factors].iter().map(|c| c[row]).collect()
    }

    /// Index (in charge order) of the row's label, if any.
    pub fn label(&self, row: usize) -> Option<usize> {
        self.outcome_vars().position(|c| self.columns[c][row] == 1)
    }

    /// Rows in the given order (repeats allowed).
    pub fn select_rows(&self, rows: &[usize]) -> FactorTable {
        FactorTable {
            names: self.names.clone(),
            n_factors: self.n_factors,
            row_ids: rows.iter().map(|&r| self.row_ids[r].clone()).collect(),
            columns: self
                .columns
                .iter()
                .map(|c| rows.iter().map(|&r| c[r]).collect())
                .collect(),
        }
    }

    /// Appends a factor column (placed after the existing factors).
    pub fn with_factor(&self, name: &str, values: Vec<u8>) -> Result<FactorTable> {
        let mut names = self.names.clone();
        let mut columns = self.columns.clone();
        names.insert(self.n_factors, name.to_owned());
        columns.insert(self.n_factors, values);
        FactorTable::new(names, self.n_factors + 1, self.row_ids.clone(), columns)
    }

    pub fn with_replaced_column(&self, var: usize, values: Vec<u8>) -> Result<FactorTable> {
        let mut columns = self.columns.clone();
        columns[var] = values;
        FactorTable::new(self.names.clone(), self.n_factors, self.row_ids.clone(), columns)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = crate::io::csv_writer(path)?;
        let mut header = vec!["id".to_owned()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for r in 0..self.n_rows() {
            let mut rec = vec![self.row_ids[r].clone()];
            rec.extend(self.columns.iter().map(|c| c[r].to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| GciError::io(path, e))?;
        Ok(())
    }

    /// Reads the CSV layout written by [`FactorTable::write_csv`]. Columns
    /// with the charge prefix are charge indicators.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<FactorTable> {
        let path = path.as_ref();
        let mut r = crate::io::csv_reader(path)?;
        let header = r.headers()?.clone();
        if header.get(0) != Some("id") {
            return Err(GciError::Parse {
                path: path.display().to_string(),
                line: 1,
                message: "first column must be `id`".into(),
            });
        }
        let names: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
        let n_factors = names
            .iter()
            .position(|n| n.starts_with(CHARGE_PREFIX))
            .unwrap_or(names.len());
        let mut row_ids = Vec::new();
        let mut columns = vec![Vec::new(); names.len()];
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            row_ids.push(rec.get(0).unwrap_or_default().to_owned());
            for (c, field) in rec.iter().skip(1).enumerate() {
                let v = match field {
                    "0" => 0,
                    "1" => 1,
                    other => {
                        return Err(GciError::Parse {
                            path: path.display().to_string(),
                            line: i + 2,
                            message: format!("non-binary value {other:?}"),
                        })
                    }
                };
                columns[c].push(v);
            }
        }
        FactorTable::new(names, n_factors, row_ids, columns)
    }
}

/// Factor column `f` of a row is 1 iff any member word of `f` occurs in the
/// document; charge column `Y:c` is 1 iff the document is labeled `c`.
pub fn binarize(corpus: &Corpus, vocab: &FactorVocabulary) -> FactorTable {
    binarize_documents(corpus.documents().iter(), corpus.charges(), vocab)
}

pub fn binarize_documents<'a>(
    docs: impl Iterator<Item = &'a Document>,
    charges: &[String],
    vocab: &FactorVocabulary,
) -> FactorTable {
    let q = vocab.len();
    let mut names = vocab.ids();
    names.extend(charges.iter().map(|c| charge_column(c)));
    let mut columns = vec![Vec::new(); q + charges.len()];
    let mut row_ids = Vec::new();
    for doc in docs {
        row_ids.push(doc.id.clone());
        let mut present = vec![0u8; q];
        for t in &doc.tokens {
            if let Some(f) = vocab.factor_of(t) {
                present[f] = 1;
            }
        }
        for (f, v) in present.into_iter().enumerate() {
            columns[f].push(v);
        }
        for (i, c) in charges.iter().enumerate() {
            columns[q + i].push(u8::from(doc.charge.as_deref() == Some(c.as_str())));
        }
    }
    FactorTable {
        names,
        n_factors: q,
        row_ids,
        columns,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Split;

    fn vocab() -> FactorVocabulary {
        FactorVocabulary::from_groups(vec![vec!["lie".into(), "deceive".into()], vec!["threaten".into()]]).unwrap()
    }

    fn corpus() -> Corpus {
        let d = |id: &str, toks: &[&str], c: Option<&str>| Document {
            id: id.into(),
            tokens: toks.iter().map(|s| s.to_string()).collect(),
            charge: c.map(str::to_owned),
            group: None,
            split: Split::Train,
        };
        Corpus::new(
            vec![
                d("1", &["nothing", "here"], Some("fraud")),
                d("2", &["lie", "and", "deceive", "lie"], Some("fraud")),
                d("3", &["threaten", "lie"], Some("extortion")),
                d("4", &["threaten"], None),
            ],
            vec!["fraud".into(), "extortion".into()],
        )
        .unwrap()
    }

    #[test]
    fn presence_semantics() {
        let t = binarize(&corpus(), &vocab());
        assert_eq!(t.names(), &["lie", "threaten", "Y:fraud", "Y:extortion"]);
        assert_eq!(t.factor_row(0), vec![0, 0]);
        assert_eq!(t.factor_row(1), vec![1, 0]);
        assert_eq!(t.factor_row(2), vec![1, 1]);
        assert_eq!(t.label(0), Some(0));
        assert_eq!(t.label(2), Some(1));
        assert_eq!(t.label(3), None);
        assert_eq!(t.charges(), vec!["fraud", "extortion"]);
    }

    #[test]
    fn token_order_does_not_matter() {
        let c = corpus();
        let (mut docs, charges) = c.clone().into_parts();
        for d in &mut docs {
            d.tokens.reverse();
        }
        let r = Corpus::new(docs, charges).unwrap();
        assert_eq!(binarize(&c, &vocab()), binarize(&r, &vocab()));
    }

    #[test]
    fn csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        let t = binarize(&corpus(), &vocab());
        t.write_csv(&p).unwrap();
        assert_eq!(FactorTable::read_csv(&p).unwrap(), t);
    }

    #[test]
    fn validation() {
        let names = vec!["a".to_string(), "Y:x".to_string(), "Y:y".to_string()];
        let ids = vec!["r".to_string()];
        assert!(FactorTable::new(names.clone(), 1, ids.clone(), vec![vec![0], vec![1], vec![1]]).is_err());
        assert!(FactorTable::new(names.clone(), 1, ids.clone(), vec![vec![2], vec![1], vec![0]]).is_err());
        assert!(FactorTable::new(names.clone(), 2, ids.clone(), vec![vec![0], vec![1], vec![0]]).is_err());
        assert!(FactorTable::new(names, 1, ids, vec![vec![0], vec![1], vec![0]]).is_ok());
    }

    #[test]
    fn with_factor_keeps_layout() {
        let t = binarize(&corpus(), &vocab());
        let t2 = t.with_factor("coin", vec![1, 0, 1, 0]).unwrap();
        assert_eq!(t2.names(), &["lie", "threaten", "coin", "Y:fraud", "Y:extortion"]);
        assert_eq!(t2.label(2), Some(1));
    }
}
