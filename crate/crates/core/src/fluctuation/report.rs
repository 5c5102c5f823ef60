use std::fmt::Write as _;

use num_traits::Zero;
use serde::Serialize;

use super::{MonteCarloDistribution, Start, SymbolDistribution};
use crate::error::{Error, Result};
use crate::model::{Family, Model};
use crate::scalar::{format_rational, ln_rational, text, LogMultiple, Rational};

/// One `±g` pair of an exact report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrRow {
    pub g: i64,
    #[serde(with = "text")]
    pub p_plus: Rational,
    #[serde(with = "text")]
    pub p_minus: Rational,
    /// `P(g) / (P(−g) · base^g)`.
    #[serde(with = "text")]
    pub alpha: Rational,
    /// `ln(P(g)/P(−g))`.
    pub lhs: f64,
    /// `g · ln(base)`.
    pub target: f64,
    pub bound: f64,
    /// `lhs / (n⟨Λ⟩)` and `target / (n⟨Λ⟩)`.
    pub lhs_normalized: f64,
    pub e: f64,
    pub pass: bool,
}

/// Fluctuation-relation check of an exact distribution. A row passes when
/// `α_min ≤ P(g)/(P(−g)·base^g) ≤ α_max` in exact arithmetic, which is
/// `|lhs − target| ≤ ln α_max`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrReport {
    pub family: Family,
    #[serde(with = "text")]
    pub l: Rational,
    pub n: usize,
    pub start: Start,
    pub unit: LogMultiple,
    pub mean_lambda: LogMultiple,
    #[serde(with = "text")]
    pub alpha_min: Rational,
    #[serde(with = "text")]
    pub alpha_max: Rational,
    pub bound: f64,
    /// `φ/⟨Λ⟩`; every attainable `|e_n|` is at most this.
    pub p_star: f64,
    pub rows: Vec<FrRow>,
    pub pass: bool,
}

fn pow_signed(base: &Rational, e: i64) -> Rational {
    let p = num_traits::pow(base.clone(), e.unsigned_abs() as usize);
    if e >= 0 {
        p
    } else {
        p.recip()
    }
}

pub fn fr_report(model: &Model, dist: &SymbolDistribution) -> Result<FrReport> {
    let mean = model.mean_lambda();
    if mean.is_zero() {
        return Err(Error::Undefined(format!(
            "⟨Λ⟩ = 0 for {} at l = {}; the fluctuation relation is void",
            model.family(),
            model.l()
        )));
    }
    if dist.family() != model.family() || dist.l() != model.l() {
        return Err(Error::InvalidParameter("distribution belongs to another model".into()));
    }
    let base = model.contraction_base();
    let ln_base = ln_rational(&base);
    let (alpha_min, alpha_max) = model.alpha_bounds();
    let bound = ln_rational(&alpha_max);
    let scale = dist.n() as f64 * mean.value();

    let mut rows = Vec::new();
    for g in dist.support().filter(|g| *g > 0) {
        let (p_plus, p_minus) = (dist.get(g), dist.get(-g));
        let ratio = &p_plus / &p_minus;
        let alpha = &ratio / pow_signed(&base, g);
        let lhs = ln_rational(&ratio);
        let target = g as f64 * ln_base;
        rows.push(FrRow {
            g,
            pass: alpha >= alpha_min && alpha <= alpha_max,
            p_plus,
            p_minus,
            alpha,
            lhs,
            target,
            bound,
            lhs_normalized: lhs / scale,
            e: target / scale,
        });
    }
    let p_star = ln_base.abs() / mean.value().abs();
    let pass = rows.iter().all(|r| r.pass && r.e.abs() <= p_star * (1.0 + 1e-12));
    Ok(FrReport {
        family: model.family(),
        l: model.l().clone(),
        n: dist.n(),
        start: dist.start(),
        unit: model.phi(),
        mean_lambda: mean,
        alpha_min,
        alpha_max,
        bound,
        p_star,
        rows,
        pass,
    })
}

impl FrReport {
    /// Rows `g, P(g), P(−g), lhs, target, bound, pass`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("g,p_plus,p_minus,lhs,target,bound,pass\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:.17e},{:.17e},{:.17e},{}",
                r.g,
                format_rational(&r.p_plus),
                format_rational(&r.p_minus),
                r.lhs,
                r.target,
                r.bound,
                r.pass
            );
        }
        out
    }
}

/// Bins with fewer counts are not tested.
pub const MIN_BIN_COUNT: u64 = 25;
/// Allowed deviation in standard errors.
pub const SIGMAS: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalFrRow {
    pub g: i64,
    pub count_plus: u64,
    pub count_minus: u64,
    pub lhs: f64,
    /// Delta-method standard error of `lhs`: `√(1/c₊ + 1/c₋)`.
    pub sigma: f64,
    pub target: f64,
    pub bound: f64,
    /// Distance of `lhs` outside the band `[target − bound, target + bound]`.
    pub excess: f64,
    pub tested: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalFrReport {
    pub family: Family,
    #[serde(with = "text")]
    pub l: Rational,
    pub n: usize,
    pub ensemble: usize,
    pub bound: f64,
    pub rows: Vec<EmpiricalFrRow>,
    pub tested_pairs: usize,
    pub pass: bool,
}

/// Band check on a histogram: every `±g` pair with at least
/// [`MIN_BIN_COUNT`] counts on each side must lie within [`SIGMAS`]
/// standard errors of the band.
pub fn empirical_fr_report(model: &Model, mc: &MonteCarloDistribution) -> Result<EmpiricalFrReport> {
    if model.mean_lambda().is_zero() {
        return Err(Error::Undefined("⟨Λ⟩ = 0; the fluctuation relation is void".into()));
    }
    let ln_base = ln_rational(&model.contraction_base());
    let bound = ln_rational(&model.alpha_bounds().1);
    let mut rows = Vec::new();
    for (&g, &count_plus) in mc.counts().iter().filter(|(g, _)| **g > 0) {
        let count_minus = mc.count(-g);
        let tested = count_plus >= MIN_BIN_COUNT && count_minus >= MIN_BIN_COUNT;
        let (lhs, sigma) = if count_minus > 0 {
            (
                (count_plus as f64 / count_minus as f64).ln(),
                (1.0 / count_plus as f64 + 1.0 / count_minus as f64).sqrt(),
            )
        } else {
            (f64::INFINITY, f64::INFINITY)
        };
        let target = g as f64 * ln_base;
        let excess = ((lhs - target).abs() - bound).max(0.0);
        rows.push(EmpiricalFrRow {
            g,
            count_plus,
            count_minus,
            lhs,
            sigma,
            target,
            bound,
            excess,
            tested,
            pass: !tested || excess <= SIGMAS * sigma,
        });
    }
    let tested_pairs = rows.iter().filter(|r| r.tested).count();
    Ok(EmpiricalFrReport {
        family: model.family(),
        l: model.l().clone(),
        n: mc.n(),
        ensemble: mc.ensemble(),
        bound,
        pass: tested_pairs > 0 && rows.iter().all(|r| r.pass),
        tested_pairs,
        rows,
    })
}

impl EmpiricalFrReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("g,count_plus,count_minus,lhs,sigma,target,bound,tested,pass\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:.17e},{:.17e},{:.17e},{:.17e},{},{}",
                r.g, r.count_plus, r.count_minus, r.lhs, r.sigma, r.target, r.bound, r.tested, r.pass
            );
        }
        out
    }
}

/// Per-bin comparison of a histogram with the exact law.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BinCheck {
    pub g: i64,
    pub p_hat: f64,
    #[serde(with = "text")]
    pub p_exact: Rational,
    /// `√(p(1 − p)/N)` at the exact `p`.
    pub stderr: f64,
    /// Bins where neither the observed nor the expected count reaches
    /// [`MIN_BIN_COUNT`] are reported but not tested.
    pub tested: bool,
    pub pass: bool,
}

pub fn compare_histogram(mc: &MonteCarloDistribution, exact: &SymbolDistribution) -> Vec<BinCheck> {
    let mut gs: Vec<i64> = mc.counts().keys().copied().chain(exact.support()).collect();
    gs.sort_unstable();
    gs.dedup();
    let total = mc.ensemble() as f64;
    gs.into_iter()
        .map(|g| {
            let p_exact = exact.get(g);
            let p = crate::scalar::rational_to_f64(&p_exact);
            let p_hat = mc.count(g) as f64 / total;
            let stderr = (p * (1.0 - p) / total).sqrt();
            let min = MIN_BIN_COUNT as f64;
            let tested = p_exact.is_zero() || mc.count(g) as f64 >= min || p * total >= min;
            let pass = if p_exact.is_zero() {
                mc.count(g) == 0
            } else {
                !tested || (p_hat - p).abs() <= SIGMAS * stderr
            };
            BinCheck {
                g,
                p_hat,
                p_exact,
                stderr,
                tested,
                pass,
            }
        })
        .collect()
}

/// `P(g)/P(−g)` equals `base^g` exactly for every `g` in the support.
pub fn ratio_is_exact(model: &Model, dist: &SymbolDistribution) -> bool {
    let base = model.contraction_base();
    dist.support()
        .filter(|g| *g > 0)
        .all(|g| dist.get(g) / dist.get(-g) == pow_signed(&base, g))
}
