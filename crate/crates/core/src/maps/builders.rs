use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{AffineAction, AffineBranch, Interval, PiecewiseAffineMap, Rect, Region};
use crate::error::{Error, Result};
use crate::scalar::{int, ratio, text, Rational};

/// What a map is, as far as the rest of the crate cares.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapKind {
    SimpleBaker {
        #[serde(with = "text")]
        l: Rational,
    },
    GeneralizedBaker {
        #[serde(with = "text")]
        l: Rational,
    },
    SimpleInvolution,
    GeneralizedInvolution,
    HalfMirror,
    Perturbation(PerturbationStrip),
    Composite {
        #[serde(with = "text")]
        l: Rational,
        strip: PerturbationStrip,
    },
    Custom,
}

/// The vertical strip `[x_tilde, x_tilde + eps] × [0, 1]` on which the
/// perturbation folds the lower half onto the upper half.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerturbationStrip {
    #[serde(with = "text")]
    pub x_tilde: Rational,
    #[serde(with = "text")]
    pub eps: Rational,
}

impl PerturbationStrip {
    /// `x_tilde = l + (1/2 − l)/4`, `eps = (1/2 − l)/8`: well inside region B.
    pub fn default_for(l: &Rational) -> Self {
        let width = ratio(1, 2) - l;
        Self {
            x_tilde: l + &width / int(4),
            eps: width / int(8),
        }
    }

    fn check(&self, l: &Rational) -> Result<()> {
        if self.eps.is_negative() {
            return Err(Error::InvalidParameter("strip width must be non-negative".into()));
        }
        if &self.x_tilde < l || &self.x_tilde + &self.eps >= ratio(1, 2) {
            return Err(Error::InvalidParameter(format!(
                "strip [{}, {}] is not contained in region B = [{}, 1/2)",
                self.x_tilde,
                &self.x_tilde + &self.eps,
                l
            )));
        }
        Ok(())
    }
}

fn full_height(x: Interval<Rational>) -> Rect<Rational> {
    Rect::new(x, Interval::unit())
}

fn half_open(lo: Rational, hi: Rational) -> Interval<Rational> {
    Interval::half_open(lo, hi)
}

/// The two-branch dissipative baker map with `r = 1 − l`.
pub fn simple_baker(l: &Rational) -> Result<PiecewiseAffineMap<Rational>> {
    if !l.is_positive() || l >= &int(1) {
        return Err(Error::InvalidParameter(format!("l = {l} must lie in (0, 1)")));
    }
    let r = int(1) - l;
    let a = AffineBranch::new(
        full_height(half_open(int(0), l.clone())),
        AffineAction::diagonal(l.recip(), r.clone(), int(0), int(0))?,
        &r / l,
        Some(Region::A),
    )?;
    let b = AffineBranch::new(
        full_height(half_open(l.clone(), int(1))),
        AffineAction::diagonal(r.recip(), l.clone(), -(l / &r), r.clone())?,
        l / &r,
        Some(Region::B),
    )?;
    PiecewiseAffineMap::new("simple_baker", MapKind::SimpleBaker { l: l.clone() }, vec![a, b])
}

pub(crate) fn check_generalized(l: &Rational) -> Result<()> {
    if !l.is_positive() || l > &ratio(1, 4) {
        return Err(Error::InvalidParameter(format!("l = {l} must lie in (0, 1/4]")));
    }
    Ok(())
}

/// The four-branch generalized baker map with regions
/// `A = [0, l)`, `B = [l, 1/2)`, `C = [1/2, 3/4)`, `D = [3/4, 1]`.
pub fn generalized_baker(l: &Rational) -> Result<PiecewiseAffineMap<Rational>> {
    check_generalized(l)?;
    let half = ratio(1, 2);
    let two_l = int(2) * l;
    let one_m2l = int(1) - &two_l;
    let contraction = int(2) * &one_m2l;
    let branches = vec![
        AffineBranch::new(
            full_height(half_open(int(0), l.clone())),
            AffineAction::diagonal(two_l.recip(), two_l.clone(), half.clone(), one_m2l.clone())?,
            int(1),
            Some(Region::A),
        )?,
        AffineBranch::new(
            full_height(half_open(l.clone(), half.clone())),
            AffineAction::diagonal(one_m2l.recip(), half.clone(), -(l / &one_m2l), half.clone())?,
            contraction.recip(),
            Some(Region::B),
        )?,
        AffineBranch::new(
            full_height(half_open(half.clone(), ratio(3, 4))),
            AffineAction::diagonal(int(2), one_m2l.clone(), -half.clone(), int(0))?,
            contraction,
            Some(Region::C),
        )?,
        AffineBranch::new(
            full_height(half_open(ratio(3, 4), int(1))),
            AffineAction::diagonal(int(2), half, ratio(-3, 2), int(0))?,
            int(1),
            Some(Region::D),
        )?,
    ];
    PiecewiseAffineMap::new(
        "generalized_baker",
        MapKind::GeneralizedBaker { l: l.clone() },
        branches,
    )
}

/// Mirror in the anti-diagonal, `(x, y) ↦ (1 − y, 1 − x)`.
pub fn simple_involution() -> PiecewiseAffineMap<Rational> {
    let mirror = AffineAction::new([[int(0), int(-1)], [int(-1), int(0)]], [int(1), int(1)]).expect("anti-diagonal");
    let branch = AffineBranch::new(Rect::unit(), mirror, int(1), None).expect("unit jacobian");
    PiecewiseAffineMap::new("simple_involution", MapKind::SimpleInvolution, vec![branch])
        .expect("single branch covers the square")
}

fn split_halves(left: [Rational; 2], right: [Rational; 2], name: &str, kind: MapKind) -> PiecewiseAffineMap<Rational> {
    let linear = || [[int(0), ratio(-1, 2)], [int(-2), int(0)]];
    let branches = vec![
        AffineBranch::new(
            full_height(half_open(int(0), ratio(1, 2))),
            AffineAction::new(linear(), left).expect("anti-diagonal"),
            int(1),
            None,
        )
        .expect("unit jacobian"),
        AffineBranch::new(
            full_height(half_open(ratio(1, 2), int(1))),
            AffineAction::new(linear(), right).expect("anti-diagonal"),
            int(1),
            None,
        )
        .expect("unit jacobian"),
    ];
    PiecewiseAffineMap::new(name, kind, branches).expect("halves cover the square")
}

/// Time reversal of the generalized map: swap the two halves of the square,
/// then mirror each half in its own diagonal.
///
/// `(x, y) ↦ (1 − y/2, 1 − 2x)` for `x < 1/2` and `((1 − y)/2, 2 − 2x)` for
/// `x ≥ 1/2`. It satisfies `G∘G = I` and `G∘M∘G∘M = I` for every admissible `l`.
pub fn generalized_involution() -> PiecewiseAffineMap<Rational> {
    split_halves(
        [int(1), int(1)],
        [ratio(1, 2), int(2)],
        "generalized_involution",
        MapKind::GeneralizedInvolution,
    )
}

/// The half-wise diagonal mirror alone (no swap of halves):
/// `((1 − y)/2, 1 − 2x)` on the left half, `(1 − y/2, 2 − 2x)` on the right.
/// It is an involution but does not reverse the generalized map.
pub fn half_mirror_involution() -> PiecewiseAffineMap<Rational> {
    split_halves(
        [ratio(1, 2), int(1)],
        [int(1), int(2)],
        "half_mirror",
        MapKind::HalfMirror,
    )
}

pub fn involution(kind: &MapKind) -> Result<PiecewiseAffineMap<Rational>> {
    match kind {
        MapKind::SimpleBaker { .. } => Ok(simple_involution()),
        MapKind::GeneralizedBaker { .. } | MapKind::Composite { .. } => Ok(generalized_involution()),
        other => Err(Error::Unsupported(format!("no involution defined for {other:?}"))),
    }
}

/// Volume-preserving, non-invertible fold acting on a strip inside region B
/// of the generalized map: `(x, y) ↦ (x, 1 − y)` for `y ∈ [0, 1/2]`,
/// identity elsewhere.
pub fn perturbation(l: &Rational, strip: &PerturbationStrip) -> Result<PiecewiseAffineMap<Rational>> {
    check_generalized(l)?;
    strip.check(l)?;
    let kind = MapKind::Perturbation(strip.clone());
    let identity = AffineAction::identity;
    if strip.eps.is_zero() {
        let branch = AffineBranch::new(Rect::unit(), identity(), int(1), None)?;
        return PiecewiseAffineMap::new("perturbation", kind, vec![branch]);
    }
    let lo = strip.x_tilde.clone();
    let hi = &strip.x_tilde + &strip.eps;
    let half = ratio(1, 2);
    let strip_x = Interval::closed(lo.clone(), hi.clone());
    let flip = AffineAction::diagonal(int(1), int(-1), int(0), int(1))?;
    let branches = vec![
        AffineBranch::new(full_height(half_open(int(0), lo)), identity(), int(1), None)?,
        AffineBranch::new(
            Rect::new(strip_x.clone(), Interval::closed(int(0), half.clone())),
            flip,
            int(1),
            None,
        )?,
        AffineBranch::new(
            Rect::new(
                strip_x,
                Interval {
                    lo: half,
                    hi: int(1),
                    lo_closed: false,
                    hi_closed: true,
                },
            ),
            identity(),
            int(1),
            None,
        )?,
        AffineBranch::new(
            full_height(Interval {
                lo: hi,
                hi: int(1),
                lo_closed: false,
                hi_closed: true,
            }),
            identity(),
            int(1),
            None,
        )?,
    ];
    PiecewiseAffineMap::new("perturbation", kind, branches)
}

/// `K = M ∘ N` with `M` the generalized map and `N` the strip fold.
pub fn composite_map(l: &Rational, strip: &PerturbationStrip) -> Result<PiecewiseAffineMap<Rational>> {
    let m = generalized_baker(l)?;
    let n = perturbation(l, strip)?;
    m.after(
        &n,
        "composite",
        MapKind::Composite {
            l: l.clone(),
            strip: strip.clone(),
        },
    )
}
