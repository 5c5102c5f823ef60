use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{PhasePoint, PiecewiseAffineMap, Region};
use crate::error::Result;
use crate::scalar::{ratio, Rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReversibilityIdentity {
    /// `G(G(p)) = p`
    InvolutionSquare,
    /// `G(M(G(M(p)))) = p`
    ReversedComposite,
    /// `J_M(p) · J_M(G M p) = 1`
    JacobianRule,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityFailure {
    pub x: f64,
    pub y: f64,
    pub identity: ReversibilityIdentity,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReversibilityReport {
    pub map: String,
    pub involution: String,
    pub samples: usize,
    pub failures: Vec<IdentityFailure>,
    /// Region `i ↦ j` with `G M i = j`.
    pub conjugacy: BTreeMap<Region, Region>,
    /// Regions whose image under `G M` is not (up to boundaries) a single region.
    pub conjugacy_failures: Vec<Region>,
}

impl ReversibilityReport {
    pub fn pointwise_reversible(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn regionally_reversible(&self) -> bool {
        self.conjugacy_failures.is_empty()
    }

    pub fn holds(&self) -> bool {
        self.pointwise_reversible() && self.regionally_reversible()
    }

    pub fn failures_of(&self, identity: ReversibilityIdentity) -> usize {
        self.failures.iter().filter(|f| f.identity == identity).count()
    }
}

/// Checks `G G = I`, `G M G M = I` and the jacobian rule at every sample, and
/// derives the region conjugacy `G M i = j` from branch rectangles.
///
/// Samples should avoid branch boundaries; with the rational backend every
/// identity is checked exactly.
pub fn verify_reversibility<S: Scalar>(
    map: &PiecewiseAffineMap<S>,
    involution: &PiecewiseAffineMap<S>,
    samples: &[PhasePoint<S>],
) -> Result<ReversibilityReport> {
    let mut failures = Vec::new();
    let mut fail = |p: &PhasePoint<S>, identity| {
        failures.push(IdentityFailure {
            x: p.x.to_f64(),
            y: p.y.to_f64(),
            identity,
        })
    };
    for p in samples {
        if !involution.apply(&involution.apply(p)?)?.same_as(p) {
            fail(p, ReversibilityIdentity::InvolutionSquare);
        }
        let gm = involution.apply(&map.apply(p)?)?;
        if !involution.apply(&map.apply(&gm)?)?.same_as(p) {
            fail(p, ReversibilityIdentity::ReversedComposite);
        }
        let product = map.jacobian_at(p)? * map.jacobian_at(&gm)?;
        if !product.same(&S::one()) {
            fail(p, ReversibilityIdentity::JacobianRule);
        }
    }

    let (conjugacy, conjugacy_failures) = region_conjugacy(map, involution);
    Ok(ReversibilityReport {
        map: map.name().to_string(),
        involution: involution.name().to_string(),
        samples: samples.len(),
        failures,
        conjugacy,
        conjugacy_failures,
    })
}

fn region_conjugacy<S: Scalar>(
    map: &PiecewiseAffineMap<S>,
    involution: &PiecewiseAffineMap<S>,
) -> (BTreeMap<Region, Region>, Vec<Region>) {
    let labels = map.labels();
    let regions: Vec<_> = labels.iter().map(|&r| (r, map.region_rect(r).unwrap())).collect();
    let mut targets: BTreeMap<Region, BTreeSet<Option<Region>>> = BTreeMap::new();
    let mut areas: BTreeMap<Region, S> = BTreeMap::new();

    for branch in map.branches() {
        let Some(label) = branch.label else { continue };
        let image = branch.image();
        let target = involution
            .branch_index(&image.center())
            .map(|g| &involution.branches()[g])
            .filter(|g| g.domain.closure_contains(&image))
            .map(|g| g.action.image_rect(&image))
            .and_then(|mapped| {
                let area = mapped.area();
                regions
                    .iter()
                    .find(|(_, rect)| rect.closure_contains(&mapped))
                    .map(|(r, _)| (*r, area))
            });
        match target {
            Some((r, area)) => {
                targets.entry(label).or_default().insert(Some(r));
                let acc = areas.entry(label).or_insert_with(S::zero);
                *acc = acc.clone() + area;
            }
            None => {
                targets.entry(label).or_default().insert(None);
            }
        }
    }

    let mut conjugacy = BTreeMap::new();
    let mut failures = Vec::new();
    for (label, set) in targets {
        let single = (set.len() == 1).then(|| *set.iter().next().unwrap()).flatten();
        let ok = single.filter(|target| {
            let rect = &regions.iter().find(|(r, _)| r == target).unwrap().1;
            areas[&label].same(&rect.area())
        });
        match ok {
            Some(target) => {
                conjugacy.insert(label, target);
            }
            None => failures.push(label),
        }
    }
    (conjugacy, failures)
}

impl<S: Scalar> PhasePoint<S> {
    pub fn same_as(&self, other: &Self) -> bool {
        self.x.same(&other.x) && self.y.same(&other.y)
    }
}

/// Deterministic interior sample points with prime denominator 10007, which
/// keeps them off every branch boundary of the maps here.
pub fn interior_samples(count: usize) -> Vec<PhasePoint<Rational>> {
    const P: i64 = 10_007;
    (0..count as i64)
        .map(|k| {
            PhasePoint::new(
                ratio(1 + (k * 7_919) % (P - 1), P),
                ratio(1 + (k * 104_729) % (P - 1), P),
            )
        })
        .collect()
}
