use std::cmp::Ordering;
use std::fmt::Write as _;

use num_traits::Signed;

use super::{Map1d, TransferMatrix};
use crate::error::{Error, Result};
use crate::linalg;
use crate::maps::Interval;
use crate::scalar::{format_rational, Rational, Scalar};

/// Piecewise-constant probability density on `[0, 1]`: `values[i]` is the
/// density on `[breakpoints[i], breakpoints[i + 1])`.
#[derive(Clone, Debug, PartialEq)]
pub struct StepDensity<S> {
    breakpoints: Vec<S>,
    values: Vec<S>,
}

fn sort_dedup<S: Scalar>(v: &mut Vec<S>) {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    v.dedup_by(|a, b| a.same(b));
}

impl<S: Scalar> StepDensity<S> {
    pub fn new(breakpoints: Vec<S>, values: Vec<S>) -> Result<Self> {
        let bad = |msg: &str| Err(Error::InvalidParameter(format!("step density: {msg}")));
        if breakpoints.len() != values.len() + 1 || values.is_empty() {
            return bad("need one more breakpoint than values");
        }
        if breakpoints[0] != S::zero() || *breakpoints.last().unwrap() != S::one() {
            return bad("breakpoints must run from 0 to 1");
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return bad("breakpoints must be strictly increasing");
        }
        if values.iter().any(|v| *v < S::zero()) {
            return bad("negative density value");
        }
        let density = Self { breakpoints, values };
        if !density.integral().same(&S::one()) {
            return bad("density does not integrate to one");
        }
        Ok(density)
    }

    pub fn uniform() -> Self {
        Self {
            breakpoints: vec![S::zero(), S::one()],
            values: vec![S::one()],
        }
    }

    pub fn breakpoints(&self) -> &[S] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    /// `(lo, hi, value)` per piece.
    pub fn pieces(&self) -> impl Iterator<Item = (&S, &S, &S)> {
        self.breakpoints
            .windows(2)
            .zip(&self.values)
            .map(|(w, v)| (&w[0], &w[1], v))
    }

    pub fn value_at(&self, x: &S) -> S {
        let last = self.values.len() - 1;
        let idx = self.breakpoints[1..].iter().position(|b| x < b).unwrap_or(last);
        self.values[idx].clone()
    }

    pub fn integral(&self) -> S {
        self.pieces().fold(S::zero(), |acc, (lo, hi, v)| {
            acc + (hi.clone() - lo.clone()) * v.clone()
        })
    }

    /// Probability mass on `[lo, hi)`.
    pub fn mass(&self, lo: &S, hi: &S) -> S {
        self.pieces().fold(S::zero(), |acc, (a, b, v)| {
            let start = if a > lo { a.clone() } else { lo.clone() };
            let end = if b < hi { b.clone() } else { hi.clone() };
            if end > start {
                acc + (end - start) * v.clone()
            } else {
                acc
            }
        })
    }

    /// Merges neighbouring pieces with equal values.
    fn coalesced(self) -> Self {
        let mut breakpoints = vec![self.breakpoints[0].clone()];
        let mut values: Vec<S> = Vec::new();
        for (w, v) in self.breakpoints.windows(2).zip(self.values) {
            match values.last() {
                Some(prev) if prev.same(&v) => *breakpoints.last_mut().unwrap() = w[1].clone(),
                _ => {
                    values.push(v);
                    breakpoints.push(w[1].clone());
                }
            }
        }
        Self { breakpoints, values }
    }

    /// Largest pointwise difference, evaluated on the common refinement.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        let mut cuts: Vec<S> = self.breakpoints.iter().chain(&other.breakpoints).cloned().collect();
        sort_dedup(&mut cuts);
        cuts.windows(2)
            .map(|w| {
                let mid = (w[0].clone() + w[1].clone()) / (S::one() + S::one());
                (self.value_at(&mid) - other.value_at(&mid)).to_f64().abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn to_f64(&self) -> StepDensity<f64> {
        StepDensity {
            breakpoints: self.breakpoints.iter().map(Scalar::to_f64).collect(),
            values: self.values.iter().map(Scalar::to_f64).collect(),
        }
    }

    fn csv_with(&self, fmt: impl Fn(&S) -> String) -> String {
        let mut out = String::from("breakpoint,value\n");
        for (lo, _, v) in self.pieces() {
            let _ = writeln!(out, "{},{}", fmt(lo), fmt(v));
        }
        let _ = writeln!(
            out,
            "{},{}",
            fmt(self.breakpoints.last().unwrap()),
            fmt(self.values.last().unwrap())
        );
        out
    }
}

impl StepDensity<Rational> {
    /// `breakpoint,value` rows with exact `num/den` entries; the final row
    /// repeats the last value at `x = 1` for step plots.
    pub fn to_csv(&self) -> String {
        self.csv_with(format_rational)
    }
}

impl StepDensity<f64> {
    pub fn to_csv(&self) -> String {
        self.csv_with(|v| format!("{v:.17e}"))
    }
}

/// One application of the Frobenius–Perron operator:
/// `ρ'(z) = Σ ρ(b⁻¹ z) / |b'|` over branches `b` whose image contains `z`.
pub fn frobenius_perron_step<S: Scalar>(map: &Map1d, rho: &StepDensity<S>) -> StepDensity<S> {
    let branches: Vec<(Interval<S>, S, S)> = map
        .branches()
        .iter()
        .map(|b| {
            (
                b.domain.to_scalar(),
                S::from_rational(&b.slope),
                S::from_rational(&b.offset),
            )
        })
        .collect();

    let mut cuts: Vec<S> = rho.breakpoints.clone();
    cuts.extend(branches.iter().flat_map(|(d, _, _)| [d.lo.clone(), d.hi.clone()]));
    sort_dedup(&mut cuts);

    let two = S::one() + S::one();
    let mut pieces: Vec<(S, S, S)> = Vec::new();
    for w in cuts.windows(2) {
        let mid = (w[0].clone() + w[1].clone()) / two.clone();
        let Some((_, slope, offset)) = branches.iter().find(|(d, _, _)| d.contains(&mid)) else {
            continue;
        };
        let a = slope.clone() * w[0].clone() + offset.clone();
        let b = slope.clone() * w[1].clone() + offset.clone();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        pieces.push((lo, hi, rho.value_at(&mid) / slope.abs()));
    }

    let mut breakpoints: Vec<S> = pieces.iter().flat_map(|(a, b, _)| [a.clone(), b.clone()]).collect();
    breakpoints.extend([S::zero(), S::one()]);
    sort_dedup(&mut breakpoints);
    let values = breakpoints
        .windows(2)
        .map(|w| {
            let mid = (w[0].clone() + w[1].clone()) / two.clone();
            pieces
                .iter()
                .filter(|(a, b, _)| *a < mid && mid < *b)
                .fold(S::zero(), |acc, (_, _, v)| acc + v.clone())
        })
        .collect();
    StepDensity { breakpoints, values }.coalesced()
}

/// Exact invariant density: the eigenvector at eigenvalue 1 of the transfer
/// matrix on the Markov partition, normalized to unit mass and confirmed to
/// be a fixed point of [`frobenius_perron_step`].
pub fn invariant_density(map: &Map1d) -> Result<StepDensity<Rational>> {
    let t = TransferMatrix::from_map1d(map)?;
    let v = linalg::null_vector(linalg::minus_identity(t.entries()))
        .ok_or_else(|| Error::Inconsistent("eigenvalue 1 of the transfer matrix is not simple".into()))?;
    let mass: Rational = v.iter().enumerate().map(|(i, x)| x * map.cell_width(i)).sum();
    let values: Vec<Rational> = v.iter().map(|x| x / &mass).collect();
    if values.iter().any(Signed::is_negative) {
        return Err(Error::Inconsistent("invariant vector changes sign".into()));
    }
    let rho = StepDensity::new(map.markov_breakpoints().to_vec(), values)?.coalesced();
    if frobenius_perron_step(map, &rho) != rho {
        return Err(Error::Inconsistent(
            "eigenvector is not a fixed point of the transfer operator".into(),
        ));
    }
    Ok(rho)
}

/// Power iteration of the floating-point Frobenius–Perron step from the
/// uniform density until the sup-norm change drops to `tol`.
pub fn iterate_to_invariant_density(map: &Map1d, tol: f64, max_iter: usize) -> Result<StepDensity<f64>> {
    let mut rho = StepDensity::<f64>::uniform();
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let next = frobenius_perron_step(map, &rho);
        residual = rho.sup_distance(&next);
        rho = next;
        if residual <= tol {
            return Ok(rho);
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
    })
}
