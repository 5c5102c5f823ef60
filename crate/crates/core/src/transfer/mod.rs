//! Transfer-operator machinery on the unstable (x) direction.
//!
//! For the baker maps here the x-dynamics does not depend on y, so densities
//! can be projected onto x and evolved as piecewise-constant step functions.
//! Region-level statistics follow from the Markov partition generated by the
//! branch images.

mod density;
mod matrices;

pub use density::{frobenius_perron_step, invariant_density, iterate_to_invariant_density, StepDensity};
pub use matrices::{
    region_measures, region_measures_from_density, stationary_measures, transition_matrix, transition_matrix_from_map,
    RegionMeasures, StochasticMatrix, TransferMatrix,
};

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::maps::{Interval, PiecewiseAffineMap, Region};
use crate::scalar::Rational;

/// One expanding piece `x ↦ slope·x + offset` of a one-dimensional map.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch1d {
    pub domain: Interval<Rational>,
    pub slope: Rational,
    pub offset: Rational,
    pub label: Option<Region>,
}

impl Branch1d {
    pub fn apply(&self, x: &Rational) -> Rational {
        &self.slope * x + &self.offset
    }

    pub fn image(&self) -> Interval<Rational> {
        self.domain.image(&self.slope, &self.offset)
    }
}

/// Piecewise-affine map of `[0, 1]` together with its Markov partition.
#[derive(Clone, Debug, PartialEq)]
pub struct Map1d {
    branches: Vec<Branch1d>,
    cells: Vec<Rational>,
}

impl Map1d {
    pub fn branches(&self) -> &[Branch1d] {
        &self.branches
    }

    /// Breakpoints `0 = c_0 < … < c_m = 1` of the Markov partition.
    pub fn markov_breakpoints(&self) -> &[Rational] {
        &self.cells
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len() - 1
    }

    pub fn cell_width(&self, i: usize) -> Rational {
        &self.cells[i + 1] - &self.cells[i]
    }

    pub fn branch_at(&self, x: &Rational) -> Option<&Branch1d> {
        self.branches.iter().find(|b| b.domain.contains(x))
    }

    pub fn apply(&self, x: &Rational) -> Option<Rational> {
        self.branch_at(x).map(|b| b.apply(x))
    }

    pub fn slopes(&self) -> Vec<Rational> {
        self.branches.iter().map(|b| b.slope.clone()).collect()
    }
}

/// The one-dimensional map generated along the unstable direction.
///
/// Fails when the branch selection depends on y or the x-action mixes in y.
pub fn project_unstable(map: &PiecewiseAffineMap<Rational>) -> Result<Map1d> {
    let unit = Interval::<Rational>::unit();
    let mut branches = Vec::new();
    for b in map.branches() {
        if b.domain.y != unit {
            return Err(Error::Unsupported(format!(
                "map `{}` selects branches by y; its x-dynamics cannot be projected",
                map.name()
            )));
        }
        let (slope, offset) = b
            .action
            .x_action()
            .ok_or_else(|| Error::Unsupported(format!("map `{}` has a y-dependent x-action", map.name())))?;
        branches.push(Branch1d {
            domain: b.domain.x.clone(),
            slope,
            offset,
            label: b.label,
        });
    }
    branches.sort_by(|a, b| a.domain.lo.cmp(&b.domain.lo));

    let mut cells: Vec<Rational> = branches
        .iter()
        .flat_map(|b| {
            let img = b.image();
            [img.lo, img.hi]
        })
        .chain([Rational::from_integer(0.into()), Rational::from_integer(1.into())])
        .collect();
    cells.sort();
    cells.dedup();

    let map1d = Map1d { branches, cells };
    check_markov(&map1d)?;
    Ok(map1d)
}

fn check_markov(map: &Map1d) -> Result<()> {
    for b in &map.branches {
        for w in map.cells.windows(2) {
            let piece = b.domain.intersect(&Interval::half_open(w[0].clone(), w[1].clone()));
            if piece.length().is_positive() {
                let img = piece.image(&b.slope, &b.offset);
                if !map.cells.contains(&img.lo) || !map.cells.contains(&img.hi) {
                    return Err(Error::Unsupported(
                        "branch images do not generate a Markov partition".into(),
                    ));
                }
            }
        }
    }
    Ok(())
}
