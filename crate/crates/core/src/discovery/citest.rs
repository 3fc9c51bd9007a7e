use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

use super::DiscoveryConfig;
use crate::error::{GciError, Result};
use crate::factors::FactorTable;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    pub independent: bool,
    /// Too little data in some stratum for the test to be trusted; such
    /// tests report dependence.
    pub uninformative: bool,
}

/// Upper tail of the chi-square distribution, `Q(df/2, x/2)`.
pub fn chi2_sf(x: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(df as f64 / 2.0, x / 2.0)
}

/// `2 * sum O ln(O/E)` over one 2x2 table, plus its degrees of freedom after
/// discarding empty margins.
pub(crate) fn g2_2x2(counts: [[u64; 2]; 2]) -> (f64, usize) {
    let n: u64 = counts.iter().flatten().sum();
    if n == 0 {
        return (0.0, 0);
    }
    let rows = [counts[0][0] + counts[0][1], counts[1][0] + counts[1][1]];
    let cols = [counts[0][0] + counts[1][0], counts[0][1] + counts[1][1]];
    let mut g = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let o = counts[i][j];
            if o == 0 {
                continue;
            }
            let e = rows[i] as f64 * cols[j] as f64 / n as f64;
            g += o as f64 * (o as f64 / e).ln();
        }
    }
    let nz_rows = rows.iter().filter(|&&r| r > 0).count();
    let nz_cols = cols.iter().filter(|&&c| c > 0).count();
    let df = nz_rows.saturating_sub(1) * nz_cols.saturating_sub(1);
    (2.0 * g, df)
}

/// G² likelihood-ratio test of `x ⊥ y | s` on binary columns.
///
/// Rows are stratified by the configuration of `s`; each stratum contributes
/// a 2x2 G² statistic and one degree of freedom, minus strata where `x` or
/// `y` is constant (those carry no information). If any configuration of `s`
/// has fewer than `4 * min_count_per_cell_multiplier` rows, or no degree of
/// freedom is left, the test is uninformative and reports dependence.
pub fn ci_test(table: &FactorTable, x: usize, y: usize, s: &[usize], cfg: &DiscoveryConfig) -> Result<CiResult> {
    if table.n_rows() == 0 {
        return Err(GciError::invalid("ci test on an empty table"));
    }
    if x == y || s.contains(&x) || s.contains(&y) {
        return Err(GciError::invalid(
            "ci test needs distinct x, y outside the conditioning set",
        ));
    }
    if s.len() > 20 {
        return Err(GciError::invalid("conditioning set too large"));
    }
    let strata = 1usize << s.len();
    let mut counts = vec![[[0u64; 2]; 2]; strata];
    let xc = table.column(x);
    let yc = table.column(y);
    let sc: Vec<&[u8]> = s.iter().map(|&v| table.column(v)).collect();
    for r in 0..table.n_rows() {
        let mut key = 0usize;
        for (bit, c) in sc.iter().enumerate() {
            key |= usize::from(c[r]) << bit;
        }
        counts[key][usize::from(xc[r])][usize::from(yc[r])] += 1;
    }
    let min_stratum = 4 * cfg.min_count_per_cell_multiplier as u64;
    let sparse = counts.iter().any(|c| c.iter().flatten().sum::<u64>() < min_stratum);
    let mut statistic = 0.0;
    let mut df = 0;
    for c in &counts {
        let (g, d) = g2_2x2(*c);
        statistic += g;
        df += d;
    }
    let uninformative = sparse || df == 0;
    let p_value = if uninformative { 0.0 } else { chi2_sf(statistic, df) };
    Ok(CiResult {
        statistic,
        df,
        p_value,
        independent: !uninformative && p_value >= cfg.alpha,
        uninformative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    fn cfg() -> DiscoveryConfig {
        DiscoveryConfig::default()
    }

    fn table(cols: Vec<Vec<u8>>) -> FactorTable {
        let names = (0..cols.len()).map(|i| format!("v{i}")).collect();
        FactorTable::from_columns(names, cols).unwrap()
    }

    /// Independent chi-square(1) tail: erfc(sqrt(x/2)) from the Maclaurin
    /// series (small z) or a continued fraction (large z), no shared code
    /// with the gamma routine.
    fn chi2_1_sf_oracle(x: f64) -> f64 {
        let z = (x / 2.0).sqrt();
        if z < 2.0 {
            let mut term = z;
            let mut sum = z;
            for n in 1..200 {
                term *= -z * z / n as f64;
                sum += term / (2 * n + 1) as f64;
            }
            return 1.0 - 2.0 / std::f64::consts::PI.sqrt() * sum;
        }
        // Lentz continued fraction for erfc(z), z > 0
        let mut f = z;
        let mut c = z;
        let mut d = 0.0;
        for k in 1..500 {
            let a = k as f64 / 2.0;
            d = z + a * d;
            d = 1.0 / d;
            c = z + a / c;
            let delta = c * d;
            f *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-z * z).exp() / (std::f64::consts::PI.sqrt() * f)
    }

    #[test]
    fn hand_evaluated_2x2() {
        // [[30,10],[10,30]]: E = 20 everywhere
        let hand = 2.0 * (2.0 * 30.0 * (1.5f64).ln() + 2.0 * 10.0 * (0.5f64).ln());
        assert!((hand - 20.93).abs() < 0.01);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for (xv, yv, n) in [(0u8, 0u8, 30), (0, 1, 10), (1, 0, 10), (1, 1, 30)] {
            for _ in 0..n {
                x.push(xv);
                y.push(yv);
            }
        }
        let r = ci_test(&table(vec![x, y]), 0, 1, &[], &cfg()).unwrap();
        assert!((r.statistic - hand).abs() < 1e-9);
        assert_eq!(r.df, 1);
        assert!(!r.independent);
        let oracle = chi2_1_sf_oracle(hand);
        assert!(
            (r.p_value - oracle).abs() < 1e-12 * oracle.max(1e-300) + 1e-15,
            "{} vs {oracle}",
            r.p_value
        );
        assert!(r.p_value < 1e-5);
    }

    #[test]
    fn chi2_tail_against_oracle() {
        for x in [0.1, 0.5, 1.0, 3.84, 6.63, 10.0, 20.0] {
            let got = chi2_sf(x, 1);
            let want = chi2_1_sf_oracle(x);
            assert!((got - want).abs() < 1e-10, "x={x}: {got} vs {want}");
        }
        assert!((chi2_sf(3.841_458_820_694_124, 1) - 0.05).abs() < 1e-9);
        // df = 2: exp(-x/2)
        assert!((chi2_sf(4.0, 2) - (-2.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn perfect_dependence() {
        let mut rng = crate::rng::stream(1, 0);
        let x: Vec<u8> = (0..100).map(|_| rng.gen_range(0..2)).collect();
        let r = ci_test(&table(vec![x.clone(), x]), 0, 1, &[], &cfg()).unwrap();
        assert!(!r.independent);
        assert!(r.p_value < 1e-6);
    }

    #[test]
    fn symmetric_in_x_and_y() {
        let mut rng = crate::rng::stream(2, 0);
        let cols: Vec<Vec<u8>> = (0..3)
            .map(|_| (0..500).map(|_| rng.gen_range(0..2)).collect())
            .collect();
        let t = table(cols);
        let a = ci_test(&t, 0, 1, &[2], &cfg()).unwrap();
        let b = ci_test(&t, 1, 0, &[2], &cfg()).unwrap();
        assert_eq!(a.independent, b.independent);
        assert!((a.statistic - b.statistic).abs() < 1e-9);
    }

    #[test]
    fn calibrated_under_independence() {
        let mut hits = 0;
        for seed in 0..100 {
            let mut rng = crate::rng::stream(seed, 9);
            let cols: Vec<Vec<u8>> = (0..2)
                .map(|_| (0..5000).map(|_| rng.gen_range(0..2)).collect())
                .collect();
            if ci_test(&table(cols), 0, 1, &[], &cfg()).unwrap().independent {
                hits += 1;
            }
        }
        assert!(hits >= 90, "independent in {hits}/100");
    }

    #[test]
    fn sparse_strata_report_dependence() {
        let mut rng = crate::rng::stream(4, 0);
        let n = 60;
        let cols: Vec<Vec<u8>> = (0..3).map(|_| (0..n).map(|_| rng.gen_range(0..2)).collect()).collect();
        let r = ci_test(&table(cols), 0, 1, &[2], &cfg()).unwrap();
        assert!(r.uninformative);
        assert!(!r.independent);
    }

    #[test]
    fn deterministic_conditioning_is_uninformative() {
        // y = 1 - s: y is constant inside every stratum of s
        let mut rng = crate::rng::stream(5, 0);
        let s: Vec<u8> = (0..1000).map(|_| rng.gen_range(0..2)).collect();
        let y: Vec<u8> = s.iter().map(|v| 1 - v).collect();
        let x: Vec<u8> = y.clone();
        let r = ci_test(&table(vec![x, y, s]), 0, 1, &[2], &cfg()).unwrap();
        assert_eq!(r.df, 0);
        assert!(!r.independent);
    }

    #[test]
    fn errors() {
        let t = table(vec![vec![0, 1], vec![1, 0]]);
        assert!(ci_test(&t, 0, 0, &[], &cfg()).is_err());
        assert!(ci_test(&t, 0, 1, &[1], &cfg()).is_err());
        let empty = table(vec![vec![], vec![]]);
        assert!(ci_test(&empty, 0, 1, &[], &cfg()).is_err());
    }
}
