//! Periodic-orbit expansion of segment statistics.
//!
//! Every point of period dividing `n` is found by solving the affine fixed
//! point of the composed x-branches along its code, then confirmed by exact
//! iteration. For the two-branch map the weights `l^α r^β` reproduce the
//! Bernoulli law exactly; for the four-branch map the expansion is only
//! reported as a diagnostic.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fluctuation::{exact_distribution, Start, SymbolDistribution};
use crate::maps::Region;
use crate::model::{Family, Model};
use crate::observables::SymbolSequence;
use crate::scalar::{format_rational, int, rational_to_f64, text, Rational};
use crate::transfer::{project_unstable, Map1d};

pub const MAX_ORBIT_PERIOD: usize = 20;
/// The four-branch enumeration grows like `(2.4…)^n`; keep it desk-sized.
pub const MAX_DIAGNOSTIC_PERIOD: usize = 14;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodicOrbit {
    pub cycle: SymbolSequence,
    /// Visits to A.
    pub alpha: usize,
    /// Visits to B.
    pub beta: usize,
    /// x of the periodic point whose itinerary starts the cycle.
    #[serde(with = "text")]
    pub x_point: Rational,
    /// `1/|J^u|` over one period.
    #[serde(with = "text")]
    pub weight: Rational,
    pub g: i64,
}

impl PeriodicOrbit {
    pub fn code(&self) -> String {
        self.cycle.to_string()
    }
}

/// `(J^u_ω)⁻¹ = l^α r^β` on the two-branch map.
pub fn orbit_weight(l: &Rational, orbit: &PeriodicOrbit) -> Rational {
    let r = int(1) - l;
    num_traits::pow(l.clone(), orbit.alpha) * num_traits::pow(r, orbit.beta)
}

fn x_map(model: &Model) -> Result<Map1d> {
    match model.family() {
        Family::Map1 | Family::Map2 => project_unstable(model.map()),
        Family::Composite => Err(Error::Unsupported(
            "periodic orbits of the composite map are not enumerated".into(),
        )),
    }
}

/// Codes admissible for the region chain, including the wrap-around step.
fn candidate_codes(model: &Model, n: usize) -> Vec<Vec<Region>> {
    let chain = model.chain();
    let allowed = |a: Region, b: Region| chain.p.allowed(a, b);
    let mut out = Vec::new();
    let mut stack: Vec<Vec<Region>> = chain.states.iter().rev().map(|r| vec![*r]).collect();
    while let Some(code) = stack.pop() {
        if code.len() == n {
            if allowed(code[n - 1], code[0]) {
                out.push(code);
            }
            continue;
        }
        let last = *code.last().unwrap();
        for r in chain.states.iter().rev() {
            if allowed(last, *r) {
                let mut next = code.clone();
                next.push(*r);
                stack.push(next);
            }
        }
    }
    out
}

/// Solves `x = f_{c_{n−1}} ∘ … ∘ f_{c_0}(x)` and checks the itinerary.
/// `None` when the solution does not follow the code under the actual map.
fn solve_code(model: &Model, map: &Map1d, code: &[Region]) -> Result<Option<PeriodicOrbit>> {
    let branch = |r: Region| {
        map.branches()
            .iter()
            .find(|b| b.label == Some(r))
            .ok_or_else(|| Error::Inconsistent(format!("no x-branch for region {r}")))
    };
    let (mut a, mut b) = (int(1), int(0));
    for r in code {
        let br = branch(*r)?;
        a = &br.slope * &a;
        b = &br.slope * &b + &br.offset;
    }
    if a == int(1) {
        return Err(Error::Inconsistent("composed x-branch is not expanding".into()));
    }
    let x0 = b / (int(1) - &a);

    let mut x = x0.clone();
    for r in code {
        let Some(br) = map.branch_at(&x) else { return Ok(None) };
        if br.label != Some(*r) {
            return Ok(None);
        }
        x = br.apply(&x);
    }
    if x != x0 {
        return Err(Error::Inconsistent(format!(
            "periodic point of {code:?} does not return"
        )));
    }

    let alpha = code.iter().filter(|r| **r == Region::A).count();
    let beta = code.iter().filter(|r| **r == Region::B).count();
    Ok(Some(PeriodicOrbit {
        cycle: SymbolSequence::new(code.to_vec(), &model.chain().p),
        alpha,
        beta,
        x_point: x0,
        weight: a.abs().recip(),
        g: code.iter().map(|r| model.weight(*r)).sum(),
    }))
}

fn enumerate(model: &Model, n: usize) -> Result<(Vec<PeriodicOrbit>, usize)> {
    let map = x_map(model)?;
    let codes = candidate_codes(model, n);
    let candidates = codes.len();
    let solved: Vec<Option<PeriodicOrbit>> = codes
        .par_iter()
        .map(|c| solve_code(model, &map, c))
        .collect::<Result<_>>()?;
    Ok((solved.into_iter().flatten().collect(), candidates))
}

/// All `2ⁿ` points of period dividing `n` of the two-branch map, in
/// lexicographic code order.
pub fn enumerate_orbits(model: &Model, n: usize) -> Result<Vec<PeriodicOrbit>> {
    if model.family() != Family::Map1 {
        return Err(Error::Unsupported(
            "the orbit expansion is exact only for map1; see upo_diagnostic".into(),
        ));
    }
    if n == 0 || n > MAX_ORBIT_PERIOD {
        return Err(Error::InvalidParameter(format!(
            "period {n} outside 1..={MAX_ORBIT_PERIOD}"
        )));
    }
    let (orbits, candidates) = enumerate(model, n)?;
    if orbits.len() != candidates || candidates != 1 << n {
        return Err(Error::Inconsistent(format!(
            "found {} of {} periodic points",
            orbits.len(),
            1u64 << n
        )));
    }
    for o in &orbits {
        if o.weight != orbit_weight(model.l(), o) {
            return Err(Error::Inconsistent(format!("weight of {} is not l^α r^β", o.code())));
        }
    }
    Ok(orbits)
}

fn group_by_g(orbits: &[PeriodicOrbit]) -> BTreeMap<i64, Rational> {
    let mut probs = BTreeMap::new();
    for o in orbits {
        *probs.entry(o.g).or_insert_with(Rational::zero) += &o.weight;
    }
    probs
}

/// `π_n(g)`: orbit weights summed per `g`.
pub fn upo_distribution(model: &Model, n: usize) -> Result<SymbolDistribution> {
    let orbits = enumerate_orbits(model, n)?;
    let probs = group_by_g(&orbits);
    if probs.values().sum::<Rational>() != Rational::one() {
        return Err(Error::Inconsistent("orbit weights do not sum to one".into()));
    }
    SymbolDistribution::new(model.family(), model.l().clone(), n, Start::Stationary, probs)
}

/// Rows `code, alpha, beta, weight_num, weight_den, x_point`.
pub fn orbits_csv(orbits: &[PeriodicOrbit]) -> String {
    let mut out = String::from("code,alpha,beta,weight_num,weight_den,x_point\n");
    for o in orbits {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            o.code(),
            o.alpha,
            o.beta,
            o.weight.numer(),
            o.weight.denom(),
            format_rational(&o.x_point)
        );
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpoDiagnosticRow {
    pub g: i64,
    pub upo: f64,
    pub exact: f64,
}

/// Orbit expansion against the exact law. No agreement is asserted.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpoDiagnostic {
    pub family: Family,
    #[serde(with = "text")]
    pub l: Rational,
    pub n: usize,
    pub candidate_codes: usize,
    pub orbits: usize,
    /// `Σ_ω 1/|J^u_ω|` before normalization.
    #[serde(with = "text")]
    pub total_weight: Rational,
    pub total_variation: f64,
    pub rows: Vec<UpoDiagnosticRow>,
}

pub fn upo_diagnostic(model: &Model, n: usize) -> Result<UpoDiagnostic> {
    if n == 0 || n > MAX_DIAGNOSTIC_PERIOD {
        return Err(Error::InvalidParameter(format!(
            "period {n} outside 1..={MAX_DIAGNOSTIC_PERIOD}"
        )));
    }
    let (orbits, candidates) = enumerate(model, n)?;
    let raw = group_by_g(&orbits);
    let total: Rational = raw.values().sum();
    if total.is_zero() {
        return Err(Error::Undefined(format!("no periodic points of period {n}")));
    }
    let exact = exact_distribution(model, n, Start::Stationary)?;
    let mut gs: Vec<i64> = raw.keys().copied().chain(exact.support()).collect();
    gs.sort_unstable();
    gs.dedup();
    let rows: Vec<UpoDiagnosticRow> = gs
        .into_iter()
        .map(|g| UpoDiagnosticRow {
            g,
            upo: raw.get(&g).map_or(0.0, |w| rational_to_f64(&(w / &total))),
            exact: rational_to_f64(&exact.get(g)),
        })
        .collect();
    let total_variation = 0.5 * rows.iter().map(|r| (r.upo - r.exact).abs()).sum::<f64>();
    Ok(UpoDiagnostic {
        family: model.family(),
        l: model.l().clone(),
        n,
        candidate_codes: candidates,
        orbits: orbits.len(),
        total_weight: total,
        total_variation,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluctuation::exact_distribution;
    use crate::scalar::ratio;

    fn map1(l: Rational) -> Model {
        Model::new(Family::Map1, &l).unwrap()
    }

    #[test]
    fn small_periods() {
        let m = map1(ratio(2, 3));
        let one = enumerate_orbits(&m, 1).unwrap();
        let codes: Vec<String> = one.iter().map(|o| o.code()).collect();
        assert_eq!(codes, ["A", "B"]);
        assert_eq!((one[0].x_point.clone(), one[1].x_point.clone()), (int(0), int(1)));
        assert_eq!(one[0].weight, ratio(2, 3));

        let two = enumerate_orbits(&m, 2).unwrap();
        let codes: Vec<String> = two.iter().map(|o| o.code()).collect();
        assert_eq!(codes, ["AA", "AB", "BA", "BB"]);
        let ab = &two[1];
        assert_eq!(ab.weight, ratio(2, 9));
        // x = 3·(3x/2) − 2.
        assert_eq!(ab.x_point, ratio(4, 7));
    }

    #[test]
    fn weights_normalize_and_pair() {
        let m = map1(ratio(3, 5));
        for n in 1..=10 {
            let orbits = enumerate_orbits(&m, n).unwrap();
            assert_eq!(orbits.iter().map(|o| o.weight.clone()).sum::<Rational>(), int(1));
            let by_code: BTreeMap<String, &PeriodicOrbit> = orbits.iter().map(|o| (o.code(), o)).collect();
            for o in &orbits {
                let partner: String = o
                    .code()
                    .chars()
                    .rev()
                    .map(|c| if c == 'A' { 'B' } else { 'A' })
                    .collect();
                let p = by_code[&partner];
                assert_eq!((p.alpha, p.beta, p.g), (o.beta, o.alpha, -o.g));
            }
        }
    }

    #[test]
    fn matches_exact_law() {
        for l in [ratio(2, 3), ratio(1, 2), ratio(1, 7)] {
            let m = map1(l);
            for n in 1..=10 {
                let upo = upo_distribution(&m, n).unwrap();
                assert_eq!(upo, exact_distribution(&m, n, Start::Stationary).unwrap());
            }
        }
    }

    #[test]
    fn csv_layout() {
        let csv = orbits_csv(&enumerate_orbits(&map1(ratio(2, 3)), 2).unwrap());
        assert_eq!(csv.lines().nth(2), Some("AB,1,1,2,9,4/7"));
    }

    #[test]
    fn guards() {
        assert!(enumerate_orbits(&map1(ratio(2, 3)), 21).is_err());
        let m2 = Model::new(Family::Map2, &ratio(1, 8)).unwrap();
        assert!(matches!(enumerate_orbits(&m2, 3), Err(Error::Unsupported(_))));
    }

    #[test]
    fn generalized_diagnostic_runs() {
        let m2 = Model::new(Family::Map2, &ratio(1, 8)).unwrap();
        let d = upo_diagnostic(&m2, 8).unwrap();
        assert!(d.orbits > 0 && d.orbits <= d.candidate_codes);
        assert!((0.0..=1.0).contains(&d.total_variation));
        let sum: f64 = d.rows.iter().map(|r| r.upo).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        // Every surviving cycle carries the cyclic product of transition
        // probabilities; the B fixed point sits on x = 1/2, inside C.
        let (orbits, candidates) = enumerate(&m2, 4).unwrap();
        assert_eq!((orbits.len(), candidates), (15, 16));
        for o in &orbits {
            let c = o.cycle.labels();
            let cyclic: Rational = (0..c.len())
                .map(|k| m2.chain().p.p(c[k], c[(k + 1) % c.len()]))
                .product();
            assert_eq!(o.weight, cyclic);
        }
        assert!(orbits.iter().all(|o| o.code() != "BBBB"));
        // The two-branch map gives zero discrepancy through the same path.
        assert_eq!(upo_diagnostic(&map1(ratio(2, 3)), 8).unwrap().total_variation, 0.0);
    }
}
