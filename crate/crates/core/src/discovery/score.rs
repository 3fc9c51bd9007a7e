use std::collections::HashMap;

use crate::factors::FactorTable;

/// Local BIC of `node` given `parents`: the maximized multinomial
/// log-likelihood of the node's column within each parent configuration,
/// minus `(2^|parents| / 2) ln N`. Higher is better.
pub fn local_bic(table: &FactorTable, node: usize, parents: &[usize]) -> f64 {
    let n = table.n_rows();
    if n == 0 {
        return 0.0;
    }
    let ll = log_likelihood(table, node, parents);
    let k = 2f64.powi(parents.len() as i32);
    ll - 0.5 * k * (n as f64).ln()
}

fn log_likelihood(table: &FactorTable, node: usize, parents: &[usize]) -> f64 {
    let col = table.column(node);
    let pcols: Vec<&[u8]> = parents.iter().map(|&p| table.column(p)).collect();
    let n = table.n_rows();
    let config = |r: usize| {
        pcols
            .iter()
            .enumerate()
            .fold(0u64, |acc, (b, c)| acc | (u64::from(c[r]) << b))
    };
    let mut ll = 0.0;
    if parents.len() <= 16 {
        let mut counts = vec![[0u64; 2]; 1 << parents.len()];
        for (r, &v) in col.iter().enumerate().take(n) {
            counts[config(r) as usize][usize::from(v)] += 1;
        }
        for c in &counts {
            ll += cell_ll(*c);
        }
    } else {
        let mut counts: HashMap<u64, [u64; 2]> = HashMap::new();
        for (r, &v) in col.iter().enumerate().take(n) {
            counts.entry(config(r)).or_default()[usize::from(v)] += 1;
        }
        let mut keys: Vec<&u64> = counts.keys().collect();
        keys.sort();
        for k in keys {
            ll += cell_ll(counts[k]);
        }
    }
    ll
}

fn cell_ll(c: [u64; 2]) -> f64 {
    let total = (c[0] + c[1]) as f64;
    c.iter()
        .filter(|&&x| x > 0)
        .map(|&x| x as f64 * (x as f64 / total).ln())
        .sum()
}
