use serde::{Deserialize, Serialize};

use crate::error::{GciError, Result};
use crate::factors::FactorTable;

const LAMBDA: f64 = 1e-3;
const STEP: f64 = 0.1;
const ITERATIONS: usize = 500;

/// Logistic model of `P(T = 1 | Z)` over binary confounder columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropensityModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub confounders: Vec<String>,
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl PropensityModel {
    /// Linear predictor for confounder values given in `confounders` order.
    pub fn eta(&self, z: &[u8]) -> f64 {
        self.coefficients
            .iter()
            .zip(z)
            .fold(self.intercept, |acc, (w, &x)| acc + w * f64::from(x))
    }

    pub fn predict(&self, z: &[u8]) -> f64 {
        sigmoid(self.eta(z))
    }
}

/// Fits the propensity of `t` on columns `z` over every row of `table`.
///
/// Full-batch gradient ascent on the mean log-likelihood with an L2 penalty
/// on the coefficients (λ = 1e-3, step 0.1, 500 iterations from zero).
/// Features are centered while fitting and the intercept is mapped back to
/// raw features afterwards. With `z` empty the model is the marginal rate.
pub fn fit_propensity(table: &FactorTable, t: usize, z: &[usize]) -> Result<PropensityModel> {
    if z.contains(&t) {
        return Err(GciError::invalid("treatment cannot be its own confounder"));
    }
    let tcol = table.column(t);
    let n = tcol.len();
    let ones = tcol.iter().filter(|&&v| v == 1).count();
    if ones == 0 || ones == n {
        return Err(GciError::invalid(format!(
            "treatment {} has no variation",
            table.name(t)
        )));
    }
    let confounders = z.iter().map(|&v| table.name(v).to_owned()).collect();
    // ln(k) - ln(n - k) negates exactly when the treatment is flipped
    let marginal = (ones as f64).ln() - ((n - ones) as f64).ln();
    if z.is_empty() {
        return Ok(PropensityModel {
            intercept: marginal,
            coefficients: vec![],
            confounders,
        });
    }

    let means: Vec<f64> = z
        .iter()
        .map(|&v| table.column(v).iter().map(|&x| f64::from(x)).sum::<f64>() / n as f64)
        .collect();
    let x: Vec<Vec<f64>> = z
        .iter()
        .zip(&means)
        .map(|(&v, m)| table.column(v).iter().map(|&x| f64::from(x) - m).collect())
        .collect();
    let mut b = 0.0;
    let mut w = vec![0.0; z.len()];
    let mut resid = vec![0.0; n];
    for _ in 0..ITERATIONS {
        for (i, r) in resid.iter_mut().enumerate() {
            let eta = w.iter().zip(&x).fold(b, |acc, (wk, xk)| acc + wk * xk[i]);
            // t - sigma(eta), written so each branch is the exact negation
            // of the other under eta -> -eta
            *r = if tcol[i] == 1 { sigmoid(-eta) } else { -sigmoid(eta) };
        }
        let gb = resid.iter().sum::<f64>() / n as f64;
        let gw: Vec<f64> = x
            .iter()
            .zip(&w)
            .map(|(xk, wk)| xk.iter().zip(&resid).map(|(a, r)| a * r).sum::<f64>() / n as f64 - LAMBDA * wk)
            .collect();
        b += STEP * gb;
        for (wk, g) in w.iter_mut().zip(gw) {
            *wk += STEP * g;
        }
    }
    let shift: f64 = w.iter().zip(&means).map(|(wk, m)| wk * m).sum();
    let intercept = b - shift;
    if !intercept.is_finite() || w.iter().any(|v| !v.is_finite()) {
        return Err(GciError::invalid("propensity fit diverged"));
    }
    Ok(PropensityModel {
        intercept,
        coefficients: w,
        confounders,
    })
}
