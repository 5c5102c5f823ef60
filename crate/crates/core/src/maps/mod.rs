//! Phase points, piecewise-affine maps of the unit square and the
//! time-reversal involutions that go with them.

mod builders;
mod geometry;
mod reversibility;
mod serial;

use std::fmt;

use serde::{Deserialize, Serialize};

pub(crate) use builders::check_generalized;
pub use builders::{
    composite_map, generalized_baker, generalized_involution, half_mirror_involution, involution, perturbation,
    simple_baker, simple_involution, MapKind, PerturbationStrip,
};
pub use geometry::{AffineAction, Interval, Rect};
pub use reversibility::{
    interior_samples, verify_reversibility, IdentityFailure, ReversibilityIdentity, ReversibilityReport,
};
pub use serial::MapDocument;

use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Region {
    A,
    B,
    C,
    D,
}

impl Region {
    pub const ALL: [Region; 4] = [Region::A, Region::B, Region::C, Region::D];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_char(self) -> char {
        match self {
            Region::A => 'A',
            Region::B => 'B',
            Region::C => 'C',
            Region::D => 'D',
        }
    }

    pub fn from_char(c: char) -> Option<Region> {
        match c {
            'A' => Some(Region::A),
            'B' => Some(Region::B),
            'C' => Some(Region::C),
            'D' => Some(Region::D),
            _ => None,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> PhasePoint<S> {
    pub fn new(x: S, y: S) -> Self {
        Self { x, y }
    }

    pub fn in_unit_square(&self) -> bool {
        let unit = |t: &S| *t >= S::zero() && *t <= S::one();
        unit(&self.x) && unit(&self.y)
    }
}

impl PhasePoint<Rational> {
    pub fn to_scalar<T: Scalar>(&self) -> PhasePoint<T> {
        PhasePoint::new(T::from_rational(&self.x), T::from_rational(&self.y))
    }
}

impl PhasePoint<f64> {
    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.x, self.y)
    }
}

/// One affine piece of a map, acting on a rectangle.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineBranch<S> {
    pub domain: Rect<S>,
    pub action: AffineAction<S>,
    /// Absolute determinant of the linear part.
    pub jacobian: S,
    pub label: Option<Region>,
}

impl<S: Scalar> AffineBranch<S> {
    /// Builds a branch, checking that `jacobian` is the absolute
    /// determinant of `action`.
    pub fn new(domain: Rect<S>, action: AffineAction<S>, jacobian: S, label: Option<Region>) -> Result<Self> {
        let det = action.determinant().abs();
        if !det.same(&jacobian) {
            return Err(Error::InvalidMap(format!(
                "declared jacobian {:?} differs from |det| = {:?}",
                jacobian, det
            )));
        }
        Ok(Self {
            domain,
            action,
            jacobian,
            label,
        })
    }

    pub fn image(&self) -> Rect<S> {
        self.action.image_rect(&self.domain)
    }
}

impl AffineBranch<Rational> {
    pub fn to_scalar<T: Scalar>(&self) -> AffineBranch<T> {
        AffineBranch {
            domain: self.domain.to_scalar(),
            action: self.action.to_scalar(),
            jacobian: T::from_rational(&self.jacobian),
            label: self.label,
        }
    }
}

/// A map of the unit square given by finitely many affine branches whose
/// domains partition the square.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseAffineMap<S> {
    name: String,
    kind: MapKind,
    branches: Vec<AffineBranch<S>>,
    invertible: bool,
}

impl<S: Scalar> PiecewiseAffineMap<S> {
    pub fn new(name: impl Into<String>, kind: MapKind, branches: Vec<AffineBranch<S>>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidMap("no branches".into()));
        }
        let unit = Rect::unit();
        let mut area = S::zero();
        for (i, b) in branches.iter().enumerate() {
            if b.domain.is_empty() {
                return Err(Error::InvalidMap(format!("branch {i} has an empty domain")));
            }
            if !unit.closure_contains(&b.domain) {
                return Err(Error::InvalidMap(format!("branch {i} leaves the unit square")));
            }
            if !unit.closure_contains(&b.image()) {
                return Err(Error::InvalidMap(format!("image of branch {i} leaves the unit square")));
            }
            for (j, other) in branches.iter().enumerate().skip(i + 1) {
                if !b.domain.intersect(&other.domain).is_empty() {
                    return Err(Error::InvalidMap(format!("branch domains {i} and {j} overlap")));
                }
            }
            area = area + b.domain.area();
        }
        if !area.same(&S::one()) {
            return Err(Error::InvalidMap(format!("branch domains cover area {area:?}, not 1")));
        }
        let invertible = images_tile_square(&branches);
        Ok(Self {
            name: name.into(),
            kind,
            branches,
            invertible,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn branches(&self) -> &[AffineBranch<S>] {
        &self.branches
    }

    /// Branch images tile the square, so the map is a bijection up to
    /// boundaries.
    pub fn is_invertible(&self) -> bool {
        self.invertible
    }

    pub fn branch_index(&self, p: &PhasePoint<S>) -> Option<usize> {
        self.branches.iter().position(|b| b.domain.contains(p))
    }

    pub fn branch_at(&self, p: &PhasePoint<S>) -> Result<&AffineBranch<S>> {
        self.branch_index(p)
            .map(|i| &self.branches[i])
            .ok_or_else(|| Error::OutOfDomain {
                x: p.x.to_f64(),
                y: p.y.to_f64(),
            })
    }

    pub fn apply(&self, p: &PhasePoint<S>) -> Result<PhasePoint<S>> {
        Ok(self.branch_at(p)?.action.apply(p))
    }

    pub fn apply_inverse(&self, p: &PhasePoint<S>) -> Result<PhasePoint<S>> {
        if !self.invertible {
            return Err(Error::Unsupported(format!("map `{}` is not invertible", self.name)));
        }
        let branch = self
            .branches
            .iter()
            .find(|b| b.image().contains_half_open(p))
            .ok_or_else(|| Error::OutOfDomain {
                x: p.x.to_f64(),
                y: p.y.to_f64(),
            })?;
        Ok(branch.action.inverse().apply(p))
    }

    pub fn jacobian_at(&self, p: &PhasePoint<S>) -> Result<S> {
        Ok(self.branch_at(p)?.jacobian.clone())
    }

    pub fn region_of(&self, p: &PhasePoint<S>) -> Result<Region> {
        self.branch_at(p)?
            .label
            .ok_or_else(|| Error::Unsupported(format!("map `{}` carries no region labels", self.name)))
    }

    /// Points `p, M p, …, Mⁿ p`.
    pub fn orbit(&self, p: &PhasePoint<S>, n: usize) -> Result<Vec<PhasePoint<S>>> {
        let mut out = Vec::with_capacity(n + 1);
        out.push(p.clone());
        for _ in 0..n {
            let next = self.apply(out.last().unwrap())?;
            out.push(next);
        }
        Ok(out)
    }

    pub fn iterate(&self, p: &PhasePoint<S>, n: usize) -> Result<PhasePoint<S>> {
        let mut q = p.clone();
        for _ in 0..n {
            q = self.apply(&q)?;
        }
        Ok(q)
    }

    pub fn iterate_inverse(&self, p: &PhasePoint<S>, n: usize) -> Result<PhasePoint<S>> {
        let mut q = p.clone();
        for _ in 0..n {
            q = self.apply_inverse(&q)?;
        }
        Ok(q)
    }

    /// `self ∘ inner`, refined to the common partition. Labels come from
    /// `inner` when it has them, otherwise from `self`.
    pub fn after(&self, inner: &Self, name: impl Into<String>, kind: MapKind) -> Result<Self> {
        let mut branches = Vec::new();
        for bi in &inner.branches {
            for bo in &self.branches {
                let domain = bi.domain.intersect(&bi.action.preimage_rect(&bo.domain));
                if domain.is_empty() {
                    continue;
                }
                branches.push(AffineBranch::new(
                    domain,
                    bo.action.after(&bi.action),
                    bo.jacobian.clone() * bi.jacobian.clone(),
                    bi.label.or(bo.label),
                )?);
            }
        }
        Self::new(name, kind, branches)
    }

    /// Closed hull of all branch domains carrying `label`.
    pub fn region_rect(&self, label: Region) -> Option<Rect<S>> {
        self.branches
            .iter()
            .filter(|b| b.label == Some(label))
            .map(|b| b.domain.clone())
            .reduce(|a, b| a.hull(&b))
    }

    pub fn labels(&self) -> Vec<Region> {
        let mut out: Vec<Region> = self.branches.iter().filter_map(|b| b.label).collect();
        out.sort();
        out.dedup();
        out
    }
}

impl PiecewiseAffineMap<Rational> {
    pub fn to_scalar<T: Scalar>(&self) -> PiecewiseAffineMap<T> {
        PiecewiseAffineMap {
            name: self.name.clone(),
            kind: self.kind.clone(),
            branches: self.branches.iter().map(AffineBranch::to_scalar).collect(),
            invertible: self.invertible,
        }
    }

    pub fn to_f64(&self) -> PiecewiseAffineMap<f64> {
        self.to_scalar()
    }
}

fn images_tile_square<S: Scalar>(branches: &[AffineBranch<S>]) -> bool {
    let images: Vec<Rect<S>> = branches.iter().map(AffineBranch::image).collect();
    let mut area = S::zero();
    for (i, a) in images.iter().enumerate() {
        for b in &images[i + 1..] {
            if a.intersect(b).area() > S::zero() {
                return false;
            }
        }
        area = area + a.area();
    }
    area.same(&S::one())
}
