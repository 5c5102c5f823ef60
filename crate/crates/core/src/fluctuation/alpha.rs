use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::{perturbation, PerturbationStrip, Region};
use crate::model::{Family, Model};
use crate::scalar::{format_rational, int, text, Rational};

use super::{compare_histogram, empirical_fr_report, exact_distribution, monte_carlo_distribution};
use super::{BinCheck, EmpiricalFrReport, Start};

/// Largest segment length for exhaustive `α_ω` enumeration.
pub const MAX_ALPHA_STEPS: usize = 12;

/// Extremes of `α_ω = π(ω) / (π(ω^R) · base^{g(ω)})` over every admissible
/// sequence `ω`, where `ω^R` is `ω` read backwards with each region replaced
/// by its time-reversal partner.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaReport {
    pub family: Family,
    #[serde(with = "text")]
    pub l: Rational,
    pub n: usize,
    pub sequences: usize,
    #[serde(with = "text")]
    pub bound_min: Rational,
    #[serde(with = "text")]
    pub bound_max: Rational,
    #[serde(with = "text")]
    pub min: Rational,
    #[serde(with = "text")]
    pub max: Rational,
    pub argmin: String,
    pub argmax: String,
    pub attains_min: bool,
    pub attains_max: bool,
    /// Sequences outside the bounds, with their `α`.
    pub violations: Vec<String>,
    pub pass: bool,
}

fn word(model: &Model, seq: &[usize]) -> String {
    seq.iter().map(|i| model.chain().states[*i].as_char()).collect()
}

/// `π(ω) = μ_{i_0} Π p_{i_k i_{k+1}}`.
fn path_weight(model: &Model, seq: &[usize]) -> Rational {
    let chain = model.chain();
    let mut w = chain.mu[seq[0]].clone();
    for pair in seq.windows(2) {
        w *= &chain.p.entries()[pair[0]][pair[1]];
    }
    w
}

fn partners(model: &Model) -> Vec<usize> {
    let chain = model.chain();
    chain
        .states
        .iter()
        .map(|r| {
            chain
                .index_of(model.reversed_region(*r))
                .expect("partner region in chain")
        })
        .collect()
}

fn alpha_of_indices(model: &Model, partner: &[usize], base: &Rational, seq: &[usize]) -> Result<Rational> {
    let chain = model.chain();
    let forward = path_weight(model, seq);
    let reversed: Vec<usize> = seq.iter().rev().map(|i| partner[*i]).collect();
    let backward = path_weight(model, &reversed);
    if forward.is_zero() || backward.is_zero() {
        return Err(Error::InvalidParameter(format!(
            "{} or its reversal is not admissible",
            word(model, seq)
        )));
    }
    let g: i64 = seq.iter().map(|i| chain.weights[*i]).sum();
    let reversed_g: i64 = reversed.iter().map(|i| chain.weights[*i]).sum();
    if reversed_g != -g {
        return Err(Error::Inconsistent("reversal does not flip g".into()));
    }
    let scale = num_traits::pow(base.clone(), g.unsigned_abs() as usize);
    Ok(if g >= 0 {
        forward / (backward * scale)
    } else {
        forward * scale / backward
    })
}

/// `α_ω` of one region sequence.
pub fn alpha_of(model: &Model, regions: &[Region]) -> Result<Rational> {
    let seq = regions
        .iter()
        .map(|r| {
            model
                .chain()
                .index_of(*r)
                .ok_or_else(|| Error::InvalidParameter(format!("region {r} not in chain")))
        })
        .collect::<Result<Vec<usize>>>()?;
    if seq.is_empty() {
        return Err(Error::InvalidParameter("empty sequence".into()));
    }
    alpha_of_indices(model, &partners(model), &model.contraction_base(), &seq)
}

pub fn alpha_bounds_check(model: &Model, n: usize) -> Result<AlphaReport> {
    if n == 0 || n > MAX_ALPHA_STEPS {
        return Err(Error::InvalidParameter(format!(
            "α enumeration needs 1 ≤ n ≤ {MAX_ALPHA_STEPS}"
        )));
    }
    let chain = model.chain();
    let partner = partners(model);
    let base = model.contraction_base();
    let (bound_min, bound_max) = model.alpha_bounds();

    let mut report = AlphaReport {
        family: model.family(),
        l: model.l().clone(),
        n,
        sequences: 0,
        bound_min: bound_min.clone(),
        bound_max: bound_max.clone(),
        min: Rational::zero(),
        max: Rational::zero(),
        argmin: String::new(),
        argmax: String::new(),
        attains_min: false,
        attains_max: false,
        violations: Vec::new(),
        pass: false,
    };

    let mut visit = |seq: &[usize]| -> Result<()> {
        let alpha = alpha_of_indices(model, &partner, &base, seq)?;
        if report.sequences == 0 || alpha < report.min {
            report.min = alpha.clone();
            report.argmin = word(model, seq);
        }
        if report.sequences == 0 || alpha > report.max {
            report.max = alpha.clone();
            report.argmax = word(model, seq);
        }
        if alpha < bound_min || alpha > bound_max {
            report
                .violations
                .push(format!("{}: {}", word(model, seq), format_rational(&alpha)));
        }
        report.sequences += 1;
        Ok(())
    };

    // Depth-first over admissible continuations.
    let k = chain.len();
    let mut stack: Vec<Vec<usize>> = (0..k).filter(|i| !chain.mu[*i].is_zero()).map(|i| vec![i]).collect();
    while let Some(seq) = stack.pop() {
        if seq.len() == n {
            visit(&seq)?;
            continue;
        }
        let last = *seq.last().unwrap();
        for j in (0..k).rev() {
            if !chain.p.entries()[last][j].is_zero() {
                let mut next = seq.clone();
                next.push(j);
                stack.push(next);
            }
        }
    }
    report.attains_min = report.min == bound_min;
    report.attains_max = report.max == bound_max;
    report.pass = report.violations.is_empty();
    Ok(report)
}

/// The strip fold keeps every x fixed, so region occupancy along any orbit
/// of `K = M∘N` is that of `M`.
pub fn fold_preserves_regions(l: &Rational, strip: &PerturbationStrip) -> Result<bool> {
    let n = perturbation(l, strip)?;
    Ok(n.branches()
        .iter()
        .all(|b| b.action.x_action() == Some((int(1), int(0)))))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IrreversibleReport {
    pub strip: PerturbationStrip,
    pub fold_preserves_regions: bool,
    pub empirical: EmpiricalFrReport,
    /// Histogram under `K` against the exact stationary law of `M`.
    pub histogram: Vec<BinCheck>,
    pub histogram_pass: bool,
    pub pass: bool,
}

/// Samples the composite map and checks the same band as the reversible map.
pub fn verify_fr_irreversible(
    l: &Rational,
    strip: &PerturbationStrip,
    n: usize,
    ensemble: usize,
    transient: usize,
    seed: u64,
) -> Result<IrreversibleReport> {
    let k = Model::composite(l, strip)?;
    let preserves = fold_preserves_regions(l, strip)?;
    let mc = monte_carlo_distribution(&k, n, ensemble, transient, seed)?;
    let empirical = empirical_fr_report(&k, &mc)?;
    // K has the chain of M, so this is the exact law of M.
    let exact = exact_distribution(&k, n, Start::Stationary)?;
    let histogram = compare_histogram(&mc, &exact);
    let histogram_pass = histogram.iter().all(|b| b.pass);
    Ok(IrreversibleReport {
        strip: strip.clone(),
        fold_preserves_regions: preserves,
        pass: preserves && empirical.pass && histogram_pass,
        empirical,
        histogram,
        histogram_pass,
    })
}
