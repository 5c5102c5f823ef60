use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::Result;
use crate::model::{Family, Model};
use crate::scalar::{ln_rational, text, Rational};
use crate::sim::g_histogram;

/// Empirical histogram of `g` from a float ensemble.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloDistribution {
    pub family: Family,
    #[serde(with = "text")]
    pub l: Rational,
    pub n: usize,
    pub ensemble: usize,
    pub transient: usize,
    pub seed: u64,
    counts: BTreeMap<i64, u64>,
}

/// Wilson score interval for `k` successes in `total` trials.
pub fn wilson_interval(k: u64, total: u64, z: f64) -> (f64, f64) {
    let n = total as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

impl MonteCarloDistribution {
    pub fn counts(&self) -> &BTreeMap<i64, u64> {
        &self.counts
    }

    pub fn count(&self, g: i64) -> u64 {
        self.counts.get(&g).copied().unwrap_or(0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ensemble(&self) -> usize {
        self.ensemble
    }

    pub fn p_hat(&self, g: i64) -> f64 {
        self.count(g) as f64 / self.ensemble as f64
    }

    /// 1σ Wilson interval for `P(g)`.
    pub fn wilson(&self, g: i64) -> (f64, f64) {
        wilson_interval(self.count(g), self.ensemble as u64, 1.0)
    }

    /// Sample mean of `g` and its standard error.
    pub fn mean_g(&self) -> (f64, f64) {
        let total = self.ensemble as f64;
        let mean = self.counts.iter().map(|(g, c)| *g as f64 * *c as f64).sum::<f64>() / total;
        let var = self
            .counts
            .iter()
            .map(|(g, c)| (*g as f64 - mean).powi(2) * *c as f64)
            .sum::<f64>()
            / (total - 1.0).max(1.0);
        (mean, (var / total).sqrt())
    }

    /// Ensemble mean of `Λ̄_n = g·ln(base)/n` with its standard error.
    pub fn mean_lambda(&self, model: &Model) -> (f64, f64) {
        let unit = ln_rational(&model.contraction_base()) / self.n as f64;
        let (m, se) = self.mean_g();
        (m * unit, se * unit.abs())
    }

    /// Rows `g, count, p_hat, wilson_lo, wilson_hi`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("g,count,p_hat,wilson_lo,wilson_hi\n");
        for (g, c) in &self.counts {
            let (lo, hi) = self.wilson(*g);
            let _ = writeln!(out, "{g},{c},{:.17e},{lo:.17e},{hi:.17e}", self.p_hat(*g));
        }
        out
    }
}

/// Histogram of `g` over `ensemble` segments of `n` steps, each started
/// uniformly on the square and relaxed for `transient` steps.
pub fn monte_carlo_distribution(
    model: &Model,
    n: usize,
    ensemble: usize,
    transient: usize,
    seed: u64,
) -> Result<MonteCarloDistribution> {
    Ok(MonteCarloDistribution {
        family: model.family(),
        l: model.l().clone(),
        n,
        ensemble,
        transient,
        seed,
        counts: g_histogram(model, n, transient, ensemble, seed)?,
    })
}
