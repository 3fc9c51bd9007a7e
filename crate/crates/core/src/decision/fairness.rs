use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{GciError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupRates {
    pub group: String,
    pub n: usize,
    pub fpr: f64,
    pub fnr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub positive_charge: String,
    pub fpr: f64,
    pub fnr: f64,
    pub fped: f64,
    pub fned: f64,
    pub groups: Vec<GroupRates>,
}

#[derive(Default, Clone, Copy)]
struct Confusion {
    tp: i64,
    fp: i64,
    tn: i64,
    fn_: i64,
}

impl Confusion {
    fn add(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    fn rate(num: i64, den: i64, what: &str, group: &str) -> Ratio<i64> {
        if den == 0 {
            log::warn!("group {group:?}: {what} undefined, reporting 0");
            Ratio::from_integer(0)
        } else {
            Ratio::new(num, den)
        }
    }

    fn fpr(&self, group: &str) -> Ratio<i64> {
        Self::rate(self.fp, self.fp + self.tn, "false positive rate", group)
    }

    fn fnr(&self, group: &str) -> Ratio<i64> {
        Self::rate(self.fn_, self.fn_ + self.tp, "false negative rate", group)
    }
}

fn to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Error rates against `positive_charge`, overall and per group, and their
/// equality differences `FPED = Σ_g |FPR − FPR_g|`, `FNED = Σ_g |FNR − FNR_g|`.
/// Rates are computed as exact fractions.
pub fn fairness_metrics(
    predictions: &[String],
    labels: &[String],
    groups: &[String],
    positive_charge: &str,
) -> Result<FairnessReport> {
    if predictions.len() != labels.len() || labels.len() != groups.len() {
        return Err(GciError::invalid("predictions, labels and groups differ in length"));
    }
    if predictions.is_empty() {
        return Err(GciError::invalid("no samples"));
    }
    let mut overall = Confusion::default();
    let mut per: BTreeMap<&str, (usize, Confusion)> = BTreeMap::new();
    for ((p, l), g) in predictions.iter().zip(labels).zip(groups) {
        let (pp, ll) = (p == positive_charge, l == positive_charge);
        overall.add(pp, ll);
        let e = per.entry(g.as_str()).or_default();
        e.0 += 1;
        e.1.add(pp, ll);
    }
    let fpr = overall.fpr("overall");
    let fnr = overall.fnr("overall");
    let abs = |r: Ratio<i64>| if r < Ratio::from_integer(0) { -r } else { r };
    let mut fped = Ratio::from_integer(0);
    let mut fned = Ratio::from_integer(0);
    let mut rates = Vec::new();
    for (g, (n, c)) in per {
        let (gf, gn) = (c.fpr(g), c.fnr(g));
        fped += abs(fpr - gf);
        fned += abs(fnr - gn);
        rates.push(GroupRates {
            group: g.to_owned(),
            n,
            fpr: to_f64(gf),
            fnr: to_f64(gn),
        });
    }
    Ok(FairnessReport {
        positive_charge: positive_charge.to_owned(),
        fpr: to_f64(fpr),
        fnr: to_f64(fnr),
        fped: to_f64(fped),
        fned: to_f64(fned),
        groups: rates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Appends `count` (prediction, label, group) triples.
    fn push(v: &mut Vec<(String, String, String)>, p: &str, l: &str, g: &str, count: usize) {
        for _ in 0..count {
            v.push((p.into(), l.into(), g.into()));
        }
    }

    fn run(v: &[(String, String, String)]) -> FairnessReport {
        let p: Vec<String> = v.iter().map(|x| x.0.clone()).collect();
        let l: Vec<String> = v.iter().map(|x| x.1.clone()).collect();
        let g: Vec<String> = v.iter().map(|x| x.2.clone()).collect();
        fairness_metrics(&p, &l, &g, "pos").unwrap()
    }

    #[test]
    fn equal_groups_give_zero() {
        let mut v = Vec::new();
        for g in ["a", "b"] {
            push(&mut v, "pos", "neg", g, 2);
            push(&mut v, "neg", "neg", g, 8);
            push(&mut v, "neg", "pos", g, 1);
            push(&mut v, "pos", "pos", g, 4);
        }
        let r = run(&v);
        assert_eq!(r.fped, 0.0);
        assert_eq!(r.fned, 0.0);
        assert_eq!(r.fpr, 0.2);
    }

    #[test]
    fn hand_case() {
        let mut v = Vec::new();
        // group a: 40 negatives, FPR 0.10; group b: 10 negatives, FPR 0.20
        push(&mut v, "pos", "neg", "a", 4);
        push(&mut v, "neg", "neg", "a", 36);
        push(&mut v, "pos", "neg", "b", 2);
        push(&mut v, "neg", "neg", "b", 8);
        push(&mut v, "pos", "pos", "a", 5);
        push(&mut v, "pos", "pos", "b", 5);
        let r = run(&v);
        assert_eq!(r.fpr, 0.12);
        assert_eq!(r.groups[0].fpr, 0.10);
        assert_eq!(r.groups[1].fpr, 0.20);
        assert_eq!(r.fped, 0.10);
        assert_eq!(r.fned, 0.0);
    }

    #[test]
    fn length_mismatch() {
        assert!(fairness_metrics(&["a".into()], &[], &[], "a").is_err());
    }
}
