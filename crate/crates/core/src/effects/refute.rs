use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::estimate_ate;
use crate::error::{GciError, Result};
use crate::factors::FactorTable;
use crate::rng;

pub const REFUTE_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefuterMode {
    /// Add an independent fair-coin confounder; the estimate should not move.
    RandomConfounder,
    /// Replace the treatment by a fair coin; the estimate should vanish.
    PlaceboTreatment,
    /// Re-estimate on random 80% subsets; the mean should not move.
    DataSubset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefutationReport {
    pub treatment: String,
    pub outcome: String,
    pub mode: RefuterMode,
    pub original_psi: f64,
    pub refuted_psi: f64,
    pub repeats: usize,
    pub pass: bool,
    pub threshold: f64,
}

fn coin(n: usize, rng: &mut rng::Rng) -> Vec<u8> {
    (0..n).map(|_| u8::from(rng.gen_bool(0.5))).collect()
}

pub fn refute(
    table: &FactorTable,
    t: usize,
    y: usize,
    z: &[usize],
    mode: RefuterMode,
    repeats: usize,
    seed: u64,
) -> Result<RefutationReport> {
    if repeats == 0 {
        return Err(GciError::invalid("repeats must be at least 1"));
    }
    let original = estimate_ate(table, t, y, z)?.psi_hat;
    let (tn, yn) = (table.name(t).to_owned(), table.name(y).to_owned());
    let zn: Vec<&str> = z.iter().map(|&v| table.name(v)).collect();
    let n = table.n_rows();
    let mut total = 0.0;
    for r in 0..repeats {
        let mut rng = rng::stream(seed, r as u64);
        let psi = match mode {
            RefuterMode::RandomConfounder => {
                let mut name = String::from("random_confounder");
                while table.index_of(&name).is_ok() {
                    name.push('_');
                }
                let aug = table.with_factor(&name, coin(n, &mut rng))?;
                let mut z2: Vec<usize> = zn.iter().map(|v| aug.index_of(v)).collect::<Result<_>>()?;
                z2.push(aug.index_of(&name)?);
                estimate_ate(&aug, aug.index_of(&tn)?, aug.index_of(&yn)?, &z2)?.psi_hat
            }
            RefuterMode::PlaceboTreatment => {
                let placebo = table.with_replaced_column(t, coin(n, &mut rng))?;
                estimate_ate(&placebo, t, y, z)?.psi_hat
            }
            RefuterMode::DataSubset => {
                let m = (n * 4).div_ceil(5);
                let mut rows = rand::seq::index::sample(&mut rng, n, m).into_vec();
                rows.sort_unstable();
                estimate_ate(&table.select_rows(&rows), t, y, z)?.psi_hat
            }
        };
        total += psi;
    }
    let refuted = total / repeats as f64;
    let pass = match mode {
        RefuterMode::PlaceboTreatment => refuted.abs() <= REFUTE_THRESHOLD,
        _ => (refuted - original).abs() <= REFUTE_THRESHOLD,
    };
    Ok(RefutationReport {
        treatment: tn,
        outcome: yn,
        mode,
        original_psi: original,
        refuted_psi: refuted,
        repeats,
        pass,
        threshold: REFUTE_THRESHOLD,
    })
}
