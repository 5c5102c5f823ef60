//! Intervals, axis-aligned rectangles and affine actions with exact
//! endpoint bookkeeping.

use serde::{Deserialize, Serialize};

use super::PhasePoint;
use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

/// Interval with explicit closedness at each end.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval<S> {
    pub lo: S,
    pub hi: S,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl<S: Scalar> Interval<S> {
    /// `[lo, hi)`, or `[lo, hi]` when `hi` is the top of the unit interval.
    pub fn half_open(lo: S, hi: S) -> Self {
        let hi_closed = hi == S::one();
        Self {
            lo,
            hi,
            lo_closed: true,
            hi_closed,
        }
    }

    pub fn closed(lo: S, hi: S) -> Self {
        Self {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn unit() -> Self {
        Self::closed(S::zero(), S::one())
    }

    pub fn contains(&self, t: &S) -> bool {
        let above = if self.lo_closed { *t >= self.lo } else { *t > self.lo };
        let below = if self.hi_closed { *t <= self.hi } else { *t < self.hi };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn length(&self) -> S {
        if self.lo > self.hi {
            S::zero()
        } else {
            self.hi.clone() - self.lo.clone()
        }
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let (lo, lo_closed) = if self.lo > other.lo {
            (self.lo.clone(), self.lo_closed)
        } else if other.lo > self.lo {
            (other.lo.clone(), other.lo_closed)
        } else {
            (self.lo.clone(), self.lo_closed && other.lo_closed)
        };
        let (hi, hi_closed) = if self.hi < other.hi {
            (self.hi.clone(), self.hi_closed)
        } else if other.hi < self.hi {
            (other.hi.clone(), other.hi_closed)
        } else {
            (self.hi.clone(), self.hi_closed && other.hi_closed)
        };
        Self {
            lo,
            hi,
            lo_closed,
            hi_closed,
        }
    }

    /// Image under `t ↦ scale·t + shift` (`scale ≠ 0`).
    pub fn image(&self, scale: &S, shift: &S) -> Self {
        let a = scale.clone() * self.lo.clone() + shift.clone();
        let b = scale.clone() * self.hi.clone() + shift.clone();
        if *scale > S::zero() {
            Self {
                lo: a,
                hi: b,
                lo_closed: self.lo_closed,
                hi_closed: self.hi_closed,
            }
        } else {
            Self {
                lo: b,
                hi: a,
                lo_closed: self.hi_closed,
                hi_closed: self.lo_closed,
            }
        }
    }

    /// Preimage under `t ↦ scale·t + shift` (`scale ≠ 0`).
    pub fn preimage(&self, scale: &S, shift: &S) -> Self {
        let inv = S::one() / scale.clone();
        let back = -(shift.clone() * inv.clone());
        self.image(&inv, &back)
    }

    /// Closure of `self` contains `other`.
    pub fn closure_contains(&self, other: &Self) -> bool {
        other.lo >= self.lo && other.hi <= self.hi
    }

    /// Same closed hull.
    pub fn same_hull(&self, other: &Self) -> bool {
        self.lo.same(&other.lo) && self.hi.same(&other.hi)
    }

    /// Membership under the half-open convention applied to the hull.
    pub fn contains_half_open(&self, t: &S) -> bool {
        Self::half_open(self.lo.clone(), self.hi.clone()).contains(t)
    }

    pub fn midpoint(&self) -> S {
        (self.lo.clone() + self.hi.clone()) / (S::one() + S::one())
    }
}

impl Interval<Rational> {
    pub fn to_scalar<T: Scalar>(&self) -> Interval<T> {
        Interval {
            lo: T::from_rational(&self.lo),
            hi: T::from_rational(&self.hi),
            lo_closed: self.lo_closed,
            hi_closed: self.hi_closed,
        }
    }
}

/// Product of two intervals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect<S> {
    pub x: Interval<S>,
    pub y: Interval<S>,
}

impl<S: Scalar> Rect<S> {
    pub fn new(x: Interval<S>, y: Interval<S>) -> Self {
        Self { x, y }
    }

    pub fn unit() -> Self {
        Self::new(Interval::unit(), Interval::unit())
    }

    pub fn contains(&self, p: &PhasePoint<S>) -> bool {
        self.x.contains(&p.x) && self.y.contains(&p.y)
    }

    pub fn contains_half_open(&self, p: &PhasePoint<S>) -> bool {
        self.x.contains_half_open(&p.x) && self.y.contains_half_open(&p.y)
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty() || self.y.is_empty()
    }

    pub fn area(&self) -> S {
        self.x.length() * self.y.length()
    }

    pub fn intersect(&self, other: &Self) -> Self {
        Self::new(self.x.intersect(&other.x), self.y.intersect(&other.y))
    }

    pub fn closure_contains(&self, other: &Self) -> bool {
        self.x.closure_contains(&other.x) && self.y.closure_contains(&other.y)
    }

    pub fn center(&self) -> PhasePoint<S> {
        PhasePoint::new(self.x.midpoint(), self.y.midpoint())
    }

    pub fn corners(&self) -> [PhasePoint<S>; 4] {
        let (x0, x1) = (self.x.lo.clone(), self.x.hi.clone());
        let (y0, y1) = (self.y.lo.clone(), self.y.hi.clone());
        [
            PhasePoint::new(x0.clone(), y0.clone()),
            PhasePoint::new(x1.clone(), y0),
            PhasePoint::new(x0, y1.clone()),
            PhasePoint::new(x1, y1),
        ]
    }

    /// Smallest closed rectangle containing both.
    pub fn hull(&self, other: &Self) -> Self {
        let pick_lo = |a: &S, b: &S| if a < b { a.clone() } else { b.clone() };
        let pick_hi = |a: &S, b: &S| if a > b { a.clone() } else { b.clone() };
        Self::new(
            Interval::closed(pick_lo(&self.x.lo, &other.x.lo), pick_hi(&self.x.hi, &other.x.hi)),
            Interval::closed(pick_lo(&self.y.lo, &other.y.lo), pick_hi(&self.y.hi, &other.y.hi)),
        )
    }
}

impl Rect<Rational> {
    pub fn to_scalar<T: Scalar>(&self) -> Rect<T> {
        Rect::new(self.x.to_scalar(), self.y.to_scalar())
    }
}

/// `p ↦ matrix·p + offset`. Only axis-preserving matrices (diagonal or
/// anti-diagonal) are admitted, so rectangles map to rectangles.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineAction<S> {
    pub matrix: [[S; 2]; 2],
    pub offset: [S; 2],
}

impl<S: Scalar> AffineAction<S> {
    pub fn new(matrix: [[S; 2]; 2], offset: [S; 2]) -> Result<Self> {
        let action = Self { matrix, offset };
        if !action.is_diagonal() && !action.is_antidiagonal() {
            return Err(Error::InvalidMap("linear part is not axis-aligned".into()));
        }
        if action.determinant() == S::zero() {
            return Err(Error::InvalidMap("singular linear part".into()));
        }
        Ok(action)
    }

    pub fn diagonal(sx: S, sy: S, ox: S, oy: S) -> Result<Self> {
        Self::new([[sx, S::zero()], [S::zero(), sy]], [ox, oy])
    }

    pub fn identity() -> Self {
        Self {
            matrix: [[S::one(), S::zero()], [S::zero(), S::one()]],
            offset: [S::zero(), S::zero()],
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.matrix[0][1] == S::zero() && self.matrix[1][0] == S::zero()
    }

    pub fn is_antidiagonal(&self) -> bool {
        self.matrix[0][0] == S::zero() && self.matrix[1][1] == S::zero()
    }

    pub fn determinant(&self) -> S {
        let m = &self.matrix;
        m[0][0].clone() * m[1][1].clone() - m[0][1].clone() * m[1][0].clone()
    }

    pub fn apply(&self, p: &PhasePoint<S>) -> PhasePoint<S> {
        let m = &self.matrix;
        PhasePoint::new(
            m[0][0].clone() * p.x.clone() + m[0][1].clone() * p.y.clone() + self.offset[0].clone(),
            m[1][0].clone() * p.x.clone() + m[1][1].clone() * p.y.clone() + self.offset[1].clone(),
        )
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &Self) -> Self {
        let (a, b) = (&self.matrix, &inner.matrix);
        let mul = |i: usize, j: usize| a[i][0].clone() * b[0][j].clone() + a[i][1].clone() * b[1][j].clone();
        let matrix = [[mul(0, 0), mul(0, 1)], [mul(1, 0), mul(1, 1)]];
        let shifted = self.apply(&PhasePoint::new(inner.offset[0].clone(), inner.offset[1].clone()));
        Self {
            matrix,
            offset: [shifted.x, shifted.y],
        }
    }

    pub fn inverse(&self) -> Self {
        let m = &self.matrix;
        let det = self.determinant();
        let matrix = [
            [m[1][1].clone() / det.clone(), -(m[0][1].clone()) / det.clone()],
            [-(m[1][0].clone()) / det.clone(), m[0][0].clone() / det],
        ];
        let partial = Self {
            matrix,
            offset: [S::zero(), S::zero()],
        };
        let back = partial.apply(&PhasePoint::new(self.offset[0].clone(), self.offset[1].clone()));
        Self {
            matrix: partial.matrix,
            offset: [-back.x, -back.y],
        }
    }

    pub fn image_rect(&self, r: &Rect<S>) -> Rect<S> {
        let m = &self.matrix;
        if self.is_diagonal() {
            Rect::new(
                r.x.image(&m[0][0], &self.offset[0]),
                r.y.image(&m[1][1], &self.offset[1]),
            )
        } else {
            Rect::new(
                r.y.image(&m[0][1], &self.offset[0]),
                r.x.image(&m[1][0], &self.offset[1]),
            )
        }
    }

    pub fn preimage_rect(&self, r: &Rect<S>) -> Rect<S> {
        self.inverse().image_rect(r)
    }

    /// Scale and shift of the x-component, when it depends on x alone.
    pub fn x_action(&self) -> Option<(S, S)> {
        self.is_diagonal()
            .then(|| (self.matrix[0][0].clone(), self.offset[0].clone()))
    }
}

impl AffineAction<Rational> {
    pub fn to_scalar<T: Scalar>(&self) -> AffineAction<T> {
        let m = &self.matrix;
        AffineAction {
            matrix: [
                [T::from_rational(&m[0][0]), T::from_rational(&m[0][1])],
                [T::from_rational(&m[1][0]), T::from_rational(&m[1][1])],
            ],
            offset: [T::from_rational(&self.offset[0]), T::from_rational(&self.offset[1])],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    #[test]
    fn half_open_closes_at_one() {
        let i = Interval::half_open(ratio(3, 4), int(1));
        assert!(i.contains(&int(1)));
        let j = Interval::half_open(int(0), ratio(1, 8));
        assert!(!j.contains(&ratio(1, 8)));
        assert!(j.contains(&int(0)));
    }

    #[test]
    fn reflection_swaps_closedness() {
        let i = Interval::half_open(int(0), ratio(1, 2));
        let img = i.image(&int(-1), &int(1));
        assert_eq!(img.lo, ratio(1, 2));
        assert_eq!(img.hi, int(1));
        assert!(!img.lo_closed && img.hi_closed);
        assert_eq!(img.preimage(&int(-1), &int(1)), i);
    }

    #[test]
    fn intersection_and_emptiness() {
        let a = Interval::half_open(int(0), ratio(1, 2));
        let b = Interval::half_open(ratio(1, 2), int(1));
        assert!(a.intersect(&b).is_empty());
        let c = Interval::closed(ratio(1, 2), ratio(1, 2));
        assert!(!c.is_empty());
        assert!(b.intersect(&c).contains(&ratio(1, 2)));
    }

    #[test]
    fn affine_inverse_and_composition() {
        let f = AffineAction::new([[int(0), ratio(-1, 2)], [int(-2), int(0)]], [int(1), int(1)]).unwrap();
        let p = PhasePoint::new(ratio(1, 3), ratio(2, 7));
        assert_eq!(f.inverse().apply(&f.apply(&p)), p);
        let g = AffineAction::diagonal(int(2), ratio(1, 2), ratio(-1, 2), int(0)).unwrap();
        assert_eq!(g.after(&f).apply(&p), g.apply(&f.apply(&p)));
        assert!(AffineAction::new([[int(1), int(1)], [int(0), int(1)]], [int(0), int(0)]).is_err());
    }
}
