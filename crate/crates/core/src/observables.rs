//! Phase-space contraction along trajectories.
//!
//! Contraction is kept as an integer count `g` of the family's log unit, so
//! `n·Λ̄_n = g·ln(base)` holds without rounding.

use std::fmt::Write as _;

use num_traits::Signed;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::{PhasePoint, PiecewiseAffineMap, Region};
use crate::model::{Family, Model};
use crate::scalar::{format_rational, int, ln_rational, LogMultiple, Rational, Scalar};
use crate::transfer::{region_measures, StepDensity, StochasticMatrix};

/// Exact trajectories are capped here; denominators grow geometrically.
pub const EXACT_STEP_LIMIT: usize = 64;

/// `Λ(p) = −ln J(p)`.
pub fn lambda_at<S: Scalar>(map: &PiecewiseAffineMap<S>, p: &PhasePoint<S>) -> Result<f64> {
    Ok(-map.jacobian_at(p)?.to_f64().ln())
}

/// `Λ(p)` as `−1 · ln J(p)`.
pub fn lambda_exact(map: &PiecewiseAffineMap<Rational>, p: &PhasePoint<Rational>) -> Result<LogMultiple> {
    LogMultiple::new(int(-1), map.jacobian_at(p)?)
}

/// Region labels along a trajectory, with admissibility under a chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SymbolSequence {
    labels: Vec<Region>,
    admissible: bool,
}

impl SymbolSequence {
    pub fn new(labels: Vec<Region>, p: &StochasticMatrix) -> Self {
        let admissible = labels.windows(2).all(|w| p.allowed(w[0], w[1]));
        Self { labels, admissible }
    }

    pub fn labels(&self) -> &[Region] {
        &self.labels
    }

    pub fn is_admissible(&self) -> bool {
        self.admissible
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Net contraction count of the first `n` symbols.
    pub fn g(&self, model: &Model, n: usize) -> i64 {
        self.labels[..n].iter().map(|r| model.weight(*r)).sum()
    }
}

impl std::fmt::Display for SymbolSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.labels.iter().try_for_each(|r| write!(f, "{r}"))
    }
}

/// `n` steps from `initial`; `symbols` has `n + 1` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySegment<S> {
    pub initial: PhasePoint<S>,
    pub n: usize,
    pub points: Option<Vec<PhasePoint<S>>>,
    pub symbols: SymbolSequence,
}

fn segment<S: Scalar>(
    model: &Model,
    map: &PiecewiseAffineMap<S>,
    x0: &PhasePoint<S>,
    n: usize,
    store: bool,
) -> Result<TrajectorySegment<S>> {
    let mut points = Vec::with_capacity(if store { n + 1 } else { 0 });
    let mut labels = Vec::with_capacity(n + 1);
    let mut p = x0.clone();
    for k in 0..=n {
        labels.push(map.region_of(&p)?);
        if store {
            points.push(p.clone());
        }
        if k < n {
            p = map.apply(&p)?;
        }
    }
    Ok(TrajectorySegment {
        initial: x0.clone(),
        n,
        points: store.then_some(points),
        symbols: SymbolSequence::new(labels, &model.chain().p),
    })
}

pub fn trajectory(
    model: &Model,
    x0: &PhasePoint<Rational>,
    n: usize,
    store: bool,
) -> Result<TrajectorySegment<Rational>> {
    if n > EXACT_STEP_LIMIT {
        return Err(Error::InvalidParameter(format!(
            "exact trajectories are limited to {EXACT_STEP_LIMIT} steps; use the float backend"
        )));
    }
    segment(model, model.map(), x0, n, store)
}

pub fn trajectory_f64(model: &Model, x0: &PhasePoint<f64>, n: usize, store: bool) -> Result<TrajectorySegment<f64>> {
    segment(model, model.float_map(), x0, n, store)
}

impl<S: Scalar> TrajectorySegment<S> {
    fn csv_with(&self, model: &Model, fmt: impl Fn(&S) -> String) -> Result<String> {
        let points = self
            .points
            .as_ref()
            .ok_or_else(|| Error::Unsupported("trajectory was computed without stored points".into()))?;
        let mut out = String::from("k,x,y,region,cumulative_g\n");
        let mut g = 0;
        for (k, (p, r)) in points.iter().zip(self.symbols.labels()).enumerate() {
            let _ = writeln!(out, "{k},{},{},{r},{g}", fmt(&p.x), fmt(&p.y));
            g += model.weight(*r);
        }
        Ok(out)
    }
}

impl TrajectorySegment<Rational> {
    /// Rows `k, x, y, region, g` where `g` counts the steps before `k`.
    pub fn to_csv(&self, model: &Model) -> Result<String> {
        self.csv_with(model, format_rational)
    }
}

impl TrajectorySegment<f64> {
    pub fn to_csv(&self, model: &Model) -> Result<String> {
        self.csv_with(model, |v| format!("{v:.17e}"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContractionStats {
    pub n: usize,
    /// `n·Λ̄_n = g · ln(unit)`.
    pub g: i64,
    pub unit: LogMultiple,
    pub lambda_bar: f64,
    /// `Λ̄_n / ⟨Λ⟩`; `None` when `⟨Λ⟩ = 0`.
    pub e_n: Option<f64>,
    pub symbols: SymbolSequence,
}

impl ContractionStats {
    /// `n·Λ̄_n` as a symbolic log.
    pub fn total(&self) -> LogMultiple {
        LogMultiple::new(int(self.g), self.unit.base.clone())
            .expect("positive base")
            .scaled(&self.unit.coeff)
    }

    pub fn e_n(&self) -> Result<f64> {
        self.e_n
            .ok_or_else(|| Error::Undefined("e_n needs a nonzero mean contraction".into()))
    }
}

/// Time average of `Λ` over `x_0, …, x_{n−1}`, with the product of branch
/// jacobians checked against `base^{−g}` exactly.
pub fn average_contraction(model: &Model, x0: &PhasePoint<Rational>, n: usize) -> Result<ContractionStats> {
    if n == 0 {
        return Err(Error::InvalidParameter("segment length must be at least 1".into()));
    }
    let seg = trajectory(model, x0, n, true)?;
    let points = seg.points.as_ref().unwrap();
    let g = seg.symbols.g(model, n);
    let product: Rational = points[..n]
        .iter()
        .map(|p| model.map().jacobian_at(p))
        .product::<Result<Rational>>()?;
    let base = model.contraction_base();
    let expected = if g >= 0 {
        num_traits::pow(base.recip(), g as usize)
    } else {
        num_traits::pow(base, g.unsigned_abs() as usize)
    };
    if product != expected {
        return Err(Error::Inconsistent(format!("jacobian product disagrees with g = {g}")));
    }
    let unit = model.phi();
    let lambda_bar = g as f64 * ln_rational(&model.contraction_base()) / n as f64;
    let mean = model.mean_lambda();
    let e_n = (!mean.is_zero()).then(|| lambda_bar / mean.value());
    Ok(ContractionStats {
        n,
        g,
        unit,
        lambda_bar,
        e_n,
        symbols: seg.symbols,
    })
}

/// `⟨Λ⟩` for a family, derived independently two ways and compared exactly:
/// the closed forms `(l − r)·ln(l/r)` and `−Ψ(b)·ln((2 − b)/2)`, against the
/// stationary average `Σ μ_i Λ_i` (for the generalized map `φ(μ_B − μ_C)`).
pub fn mean_lambda_analytic(family: Family, l: &Rational) -> Result<LogMultiple> {
    let closed = match family {
        Family::Map1 => {
            let r = int(1) - l;
            LogMultiple::new(l - &r, l / &r)?
        }
        Family::Map2 | Family::Composite => {
            let b = bias(l)?;
            let psi = &b / (int(4) - int(3) * &b);
            LogMultiple::new(-psi, (int(2) - &b) / int(2))?
        }
    };
    let averaged = match family {
        Family::Map1 => Model::new(Family::Map1, l)?.mean_lambda(),
        Family::Map2 | Family::Composite => {
            let mu = region_measures(l)?;
            LogMultiple::new(mu.get(Region::B) - mu.get(Region::C), int(2) * (int(1) - int(2) * l))?
        }
    };
    if closed != averaged {
        return Err(Error::Inconsistent(format!(
            "⟨Λ⟩ routes disagree: {closed} vs {averaged}"
        )));
    }
    Ok(closed)
}

/// `b = 2 − 1/(1 − 2l)` for `0 < l ≤ 1/4`.
pub fn bias(l: &Rational) -> Result<Rational> {
    crate::maps::check_generalized(l)?;
    Ok(int(2) - (int(1) - int(2) * l).recip())
}

/// `l = (1 − b)/(2(2 − b))`, inverse of [`bias`], for `0 ≤ b < 1`.
pub fn l_from_bias(b: &Rational) -> Result<Rational> {
    if b.is_negative() || b >= &int(1) {
        return Err(Error::InvalidParameter(format!("bias {b} must lie in [0, 1)")));
    }
    Ok((int(1) - b) / (int(2) * (int(2) - b)))
}

/// Initial point of the reversed segment, `G Mⁿ x0`, confirmed equal to
/// `M⁻ⁿ G x0`.
pub fn reversed_initial(model: &Model, x0: &PhasePoint<Rational>, n: usize) -> Result<PhasePoint<Rational>> {
    let g = model.involution()?;
    let forward = g.apply(&model.map().iterate(x0, n)?)?;
    let backward = model.map().iterate_inverse(&g.apply(x0)?, n)?;
    if forward != backward {
        return Err(Error::Inconsistent(format!(
            "G Mⁿ x0 ≠ M⁻ⁿ G x0 for n = {n} at ({}, {})",
            x0.x, x0.y
        )));
    }
    Ok(forward)
}

/// `Ω(p) = ln(ρ(p)/ρ(G M p)) + Λ(p)` for an x-density `ρ` (uniform when
/// `None`), as the single log `ln(ρ(p) / (ρ(GMp)·J(p)))`.
pub fn dissipation_function(
    model: &Model,
    rho: Option<&StepDensity<Rational>>,
    p: &PhasePoint<Rational>,
) -> Result<LogMultiple> {
    let g = model.involution()?;
    let image = g.apply(&model.map().apply(p)?)?;
    let (here, there) = match rho {
        Some(rho) => (rho.value_at(&p.x), rho.value_at(&image.x)),
        None => (int(1), int(1)),
    };
    if !here.is_positive() || !there.is_positive() {
        return Err(Error::Undefined("density vanishes at p or at G M p".into()));
    }
    LogMultiple::new(int(1), here / (there * model.map().jacobian_at(p)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use crate::transfer::{invariant_density, project_unstable};

    fn pt(x: (i64, i64), y: (i64, i64)) -> PhasePoint<Rational> {
        PhasePoint::new(ratio(x.0, x.1), ratio(y.0, y.1))
    }

    #[test]
    fn lambda_values() {
        let m2 = Model::new(Family::Map2, &ratio(1, 8)).unwrap();
        let in_b = pt((1, 4), (1, 2));
        assert_eq!(
            lambda_exact(m2.map(), &in_b).unwrap(),
            LogMultiple::new(int(1), ratio(3, 2)).unwrap()
        );
        assert!((lambda_at(m2.map(), &in_b).unwrap() - 1.5f64.ln()).abs() < 1e-15);
        assert_eq!(lambda_at(m2.map(), &pt((1, 16), (1, 2))).unwrap(), 0.0);
        let m1 = Model::new(Family::Map1, &ratio(1, 2)).unwrap();
        assert_eq!(lambda_at(m1.map(), &pt((1, 3), (1, 3))).unwrap(), 0.0);
    }

    #[test]
    fn contraction_counts() {
        let m1 = Model::new(Family::Map1, &ratio(2, 3)).unwrap();
        let stats = average_contraction(&m1, &pt((1, 7), (2, 9)), 12).unwrap();
        let alpha = stats.symbols.labels()[..12].iter().filter(|r| **r == Region::A).count() as i64;
        assert_eq!(stats.g, alpha - (12 - alpha));
        // n·Λ̄ = (α − β)·ln(l/r) = (α − β)·ln 2
        assert_eq!(stats.total(), LogMultiple::new(int(stats.g), int(2)).unwrap());

        let m2 = Model::new(Family::Map2, &ratio(1, 8)).unwrap();
        let one = average_contraction(&m2, &pt((1, 16), (1, 3)), 1).unwrap();
        assert_eq!((one.g, one.lambda_bar), (0, 0.0));
        assert!(average_contraction(&m2, &pt((1, 16), (1, 3)), 0).is_err());
    }

    #[test]
    fn g_for_b_b_c_sequence() {
        // x0 = 1/4 ∈ B: B ↦ B ↦ ... find a start with two B's and one C in 4 steps.
        let m2 = Model::new(Family::Map2, &ratio(1, 8)).unwrap();
        let mut found = false;
        for k in 1..200 {
            let x0 = pt((k, 211), (1, 3));
            let s = average_contraction(&m2, &x0, 4).unwrap();
            let labels = &s.symbols.labels()[..4];
            let nb = labels.iter().filter(|r| **r == Region::B).count();
            let nc = labels.iter().filter(|r| **r == Region::C).count();
            if nb == 2 && nc == 1 {
                assert_eq!(s.g, 1);
                assert!((s.lambda_bar - 1.5f64.ln() / 4.0).abs() < 1e-15);
                found = true;
                break;
            }
        }
        assert!(found);
    }

    #[test]
    fn analytic_means() {
        assert!(mean_lambda_analytic(Family::Map1, &ratio(1, 2)).unwrap().is_zero());
        assert_eq!(
            mean_lambda_analytic(Family::Map2, &ratio(1, 8)).unwrap(),
            LogMultiple::new(ratio(1, 3), ratio(3, 2)).unwrap()
        );
        assert!(mean_lambda_analytic(Family::Map2, &ratio(1, 4)).unwrap().is_zero());
        assert_eq!(
            mean_lambda_analytic(Family::Map1, &ratio(2, 3)).unwrap(),
            LogMultiple::new(ratio(1, 3), int(2)).unwrap()
        );
    }

    #[test]
    fn bias_round_trip() {
        assert_eq!(bias(&ratio(1, 8)).unwrap(), ratio(2, 3));
        assert_eq!(l_from_bias(&ratio(2, 3)).unwrap(), ratio(1, 8));
        assert_eq!(bias(&ratio(1, 4)).unwrap(), int(0));
    }

    #[test]
    fn reversed_segment_is_antisymmetric() {
        let m2 = Model::new(Family::Map2, &ratio(1, 8)).unwrap();
        let x0 = pt((1, 3), (1, 5));
        let rev = reversed_initial(&m2, &x0, 5).unwrap();
        let fwd = average_contraction(&m2, &x0, 5).unwrap();
        let back = average_contraction(&m2, &rev, 5).unwrap();
        assert_eq!(back.g, -fwd.g);
        assert_eq!(
            reversed_initial(&m2, &x0, 0).unwrap(),
            m2.involution().unwrap().apply(&x0).unwrap()
        );

        let m1 = Model::new(Family::Map1, &ratio(2, 3)).unwrap();
        assert!(reversed_initial(&m1, &pt((2, 7), (3, 11)), 8).is_ok());
        let k = Model::new(Family::Composite, &ratio(1, 8)).unwrap();
        assert!(matches!(reversed_initial(&k, &x0, 2), Err(Error::Unsupported(_))));
    }

    #[test]
    fn dissipation_values() {
        let m2 = Model::new(Family::Map2, &ratio(1, 8)).unwrap();
        let p = pt((1, 3), (1, 5));
        assert_eq!(
            dissipation_function(&m2, None, &p).unwrap(),
            lambda_exact(m2.map(), &p).unwrap()
        );

        let rho = invariant_density(&project_unstable(m2.map()).unwrap()).unwrap();
        let in_a = pt((1, 16), (1, 3));
        let gm = m2.involution().unwrap().apply(&m2.map().apply(&in_a).unwrap()).unwrap();
        assert_eq!(m2.map().region_of(&gm).unwrap(), Region::A);
        assert!(dissipation_function(&m2, Some(&rho), &in_a).unwrap().is_zero());

        let eq = Model::new(Family::Map2, &ratio(1, 4)).unwrap();
        assert!(dissipation_function(&eq, None, &p).unwrap().is_zero());
    }

    #[test]
    fn trajectories_are_admissible_and_dump() {
        let m2 = Model::new(Family::Map2, &ratio(1, 6)).unwrap();
        let seg = trajectory(&m2, &pt((2, 9), (4, 7)), 20, true).unwrap();
        assert!(seg.symbols.is_admissible());
        assert_eq!(seg.symbols.len(), 21);
        let csv = seg.to_csv(&m2).unwrap();
        assert!(csv.starts_with("k,x,y,region,cumulative_g\n0,2/9,4/7,B,0\n"));
        assert_eq!(csv.lines().count(), 22);
        assert!(trajectory(&m2, &pt((2, 9), (4, 7)), 65, false).is_err());
    }
}
