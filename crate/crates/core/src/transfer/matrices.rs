use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{invariant_density, project_unstable, Map1d};
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::maps::{check_generalized, generalized_baker, PiecewiseAffineMap, Region};
use crate::scalar::{int, ratio, Rational};

/// Density-to-density matrix on the Markov cells: `ρ'_j = Σ_i T[j][i] ρ_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix {
    entries: Matrix,
    widths: Vec<Rational>,
}

impl TransferMatrix {
    /// Reads the matrix off the branch data: every branch piece over cell `i`
    /// whose image covers cell `j` contributes `1/|slope|` to `T[j][i]`.
    pub fn from_map1d(map: &Map1d) -> Result<Self> {
        let m = map.cell_count();
        let cells = map.markov_breakpoints();
        let mut entries = vec![vec![Rational::zero(); m]; m];
        for b in map.branches() {
            for i in 0..m {
                let lo = (&cells[i]).max(&b.domain.lo).clone();
                let hi = (&cells[i + 1]).min(&b.domain.hi).clone();
                if lo >= hi {
                    continue;
                }
                let (a, c) = (b.apply(&lo), b.apply(&hi));
                let (img_lo, img_hi) = if a < c { (a, c) } else { (c, a) };
                let weight = b.slope.abs().recip();
                for j in 0..m {
                    if cells[j] >= img_lo && cells[j + 1] <= img_hi {
                        entries[j][i] += &weight;
                    }
                }
            }
        }
        let widths = (0..m).map(|i| map.cell_width(i)).collect();
        let t = Self { entries, widths };
        t.check_mass()?;
        Ok(t)
    }

    /// `[[1 − 2l, 1/2], [2l, 1/2]]` on `{[0, 1/2), [1/2, 1]}` for the
    /// generalized map, confirmed against the branch data.
    pub fn generalized(l: &Rational) -> Result<Self> {
        check_generalized(l)?;
        let two_l = int(2) * l;
        let t = Self {
            entries: vec![vec![int(1) - &two_l, ratio(1, 2)], vec![two_l, ratio(1, 2)]],
            widths: vec![ratio(1, 2), ratio(1, 2)],
        };
        let from_branches = Self::from_map1d(&project_unstable(&generalized_baker(l)?)?)?;
        if from_branches != t {
            return Err(Error::Inconsistent(
                "transfer matrix disagrees with the branch data".into(),
            ));
        }
        Ok(t)
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn widths(&self) -> &[Rational] {
        &self.widths
    }

    pub fn apply(&self, density: &[Rational]) -> Vec<Rational> {
        linalg::mat_vec(&self.entries, density)
    }

    /// Probability is conserved: `Σ_j T[j][i] w_j = w_i`.
    fn check_mass(&self) -> Result<()> {
        for (i, wi) in self.widths.iter().enumerate() {
            let out: Rational = self
                .entries
                .iter()
                .zip(&self.widths)
                .map(|(row, wj)| &row[i] * wj)
                .sum();
            if &out != wi {
                return Err(Error::Inconsistent(format!("transfer matrix loses mass from cell {i}")));
            }
        }
        Ok(())
    }
}

/// Region-to-region transition probabilities, rows indexed by the source.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix {
    states: Vec<Region>,
    entries: Matrix,
}

impl StochasticMatrix {
    pub fn new(states: Vec<Region>, entries: Matrix) -> Result<Self> {
        let k = states.len();
        if entries.len() != k || entries.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidParameter(
                "stochastic matrix must be square over its states".into(),
            ));
        }
        for (s, row) in states.iter().zip(&entries) {
            if row.iter().any(Signed::is_negative) {
                return Err(Error::InvalidParameter(format!(
                    "negative transition probability from {s}"
                )));
            }
            if row.iter().sum::<Rational>() != Rational::one() {
                return Err(Error::InvalidParameter(format!("row {s} does not sum to one")));
            }
        }
        Ok(Self { states, entries })
    }

    pub fn states(&self) -> &[Region] {
        &self.states
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn index_of(&self, r: Region) -> Option<usize> {
        self.states.iter().position(|s| *s == r)
    }

    /// `p_ij`; zero for states outside the chain.
    pub fn p(&self, from: Region, to: Region) -> Rational {
        match (self.index_of(from), self.index_of(to)) {
            (Some(i), Some(j)) => self.entries[i][j].clone(),
            _ => Rational::zero(),
        }
    }

    pub fn allowed(&self, from: Region, to: Region) -> bool {
        self.p(from, to).is_positive()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.entries
            .iter()
            .map(|row| row.iter().map(crate::scalar::rational_to_f64).collect())
            .collect()
    }
}

/// Transition probabilities of the generalized map between `A, B, C, D`.
pub fn transition_matrix(l: &Rational) -> Result<StochasticMatrix> {
    check_generalized(l)?;
    let (z, half) = (Rational::zero(), ratio(1, 2));
    let two_l = int(2) * l;
    let one_m2l = int(1) - &two_l;
    let to_cd = vec![z.clone(), z.clone(), half.clone(), half];
    let to_ab = vec![two_l, one_m2l, z.clone(), z];
    let p = StochasticMatrix::new(Region::ALL.to_vec(), vec![to_cd.clone(), to_ab.clone(), to_cd, to_ab])?;

    // A and C lead only to C, D; B and D only to A, B. Off-diagonal entries
    // in a column agree across the rows that can reach it.
    use Region::*;
    let forbidden = [(A, A), (A, B), (C, A), (C, B), (B, C), (B, D), (D, C), (D, D)];
    if forbidden.iter().any(|&(i, j)| p.allowed(i, j)) {
        return Err(Error::Inconsistent("transition matrix zero pattern".into()));
    }
    let same_column = [(A, C, C), (A, C, D), (B, D, A), (B, D, B)];
    if same_column.iter().any(|&(i, k, j)| p.p(i, j) != p.p(k, j)) {
        return Err(Error::Inconsistent("transition matrix columns".into()));
    }
    Ok(p)
}

/// Transition probabilities read off a labelled map with an x-projectable
/// dynamics, weighting each region by the exact invariant density.
pub fn transition_matrix_from_map(map: &PiecewiseAffineMap<Rational>) -> Result<StochasticMatrix> {
    let map1d = project_unstable(map)?;
    let rho = invariant_density(&map1d)?;
    let regions = labelled_branches(&map1d)?;
    let states: Vec<Region> = regions.iter().map(|b| b.label.unwrap()).collect();
    let mut entries = Vec::with_capacity(states.len());
    for src in &regions {
        let total = rho.mass(&src.domain.lo, &src.domain.hi);
        let row = regions
            .iter()
            .map(|dst| {
                let back = dst.domain.preimage(&src.slope, &src.offset).intersect(&src.domain);
                if back.is_empty() {
                    Rational::zero()
                } else {
                    rho.mass(&back.lo, &back.hi) / &total
                }
            })
            .collect();
        entries.push(row);
    }
    StochasticMatrix::new(states, entries)
}

fn labelled_branches(map: &Map1d) -> Result<Vec<super::Branch1d>> {
    let mut branches = map.branches().to_vec();
    if branches.iter().any(|b| b.label.is_none()) {
        return Err(Error::Unsupported("map has unlabelled branches".into()));
    }
    branches.sort_by_key(|b| b.label);
    if branches.windows(2).any(|w| w[0].label == w[1].label) {
        return Err(Error::Unsupported("a region spans several branches".into()));
    }
    Ok(branches)
}

/// Invariant probability of each region.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegionMeasures {
    #[serde(serialize_with = "serialize_mu")]
    mu: BTreeMap<Region, Rational>,
}

fn serialize_mu<S: serde::Serializer>(mu: &BTreeMap<Region, Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut m = s.serialize_map(Some(mu.len()))?;
    for (k, v) in mu {
        m.serialize_entry(&k.to_string(), &crate::scalar::format_rational(v))?;
    }
    m.end()
}

impl RegionMeasures {
    pub fn new(mu: BTreeMap<Region, Rational>) -> Result<Self> {
        if mu.values().any(Signed::is_negative) || mu.values().sum::<Rational>() != Rational::one() {
            return Err(Error::InvalidParameter(
                "region measures must be a probability vector".into(),
            ));
        }
        Ok(Self { mu })
    }

    pub fn get(&self, r: Region) -> Rational {
        self.mu.get(&r).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Region, &Rational)> {
        self.mu.iter().map(|(k, v)| (*k, v))
    }

    pub fn regions(&self) -> Vec<Region> {
        self.mu.keys().copied().collect()
    }

    /// `Σ_i μ_i p_ij = μ_j` for every `j`.
    pub fn is_stationary(&self, p: &StochasticMatrix) -> bool {
        let v: Vec<Rational> = p.states().iter().map(|s| self.get(*s)).collect();
        linalg::vec_mat(&v, p.entries()) == v
    }
}

/// Left eigenvector of `P` at eigenvalue one, normalized.
pub fn stationary_measures(p: &StochasticMatrix) -> Result<RegionMeasures> {
    let v = linalg::null_vector(linalg::minus_identity(&linalg::transpose(p.entries())))
        .ok_or_else(|| Error::Inconsistent("stationary vector is not unique".into()))?;
    let total: Rational = v.iter().sum();
    RegionMeasures::new(p.states().iter().zip(&v).map(|(s, x)| (*s, x / &total)).collect())
}

/// Invariant density integrated over each region's x-extent.
pub fn region_measures_from_density(map: &PiecewiseAffineMap<Rational>) -> Result<RegionMeasures> {
    let map1d = project_unstable(map)?;
    let rho = invariant_density(&map1d)?;
    let mu = labelled_branches(&map1d)?
        .into_iter()
        .map(|b| (b.label.unwrap(), rho.mass(&b.domain.lo, &b.domain.hi)))
        .collect();
    RegionMeasures::new(mu)
}

/// `μ_A = μ_C = μ_D = 2l/(1+4l)`, `μ_B = (1−2l)/(1+4l)`, confirmed both as
/// the stationary vector of [`transition_matrix`] and as density × width.
pub fn region_measures(l: &Rational) -> Result<RegionMeasures> {
    check_generalized(l)?;
    let norm = int(1) + int(4) * l;
    let small = int(2) * l / &norm;
    let big = (int(1) - int(2) * l) / &norm;
    let formula = RegionMeasures::new(BTreeMap::from([
        (Region::A, small.clone()),
        (Region::B, big),
        (Region::C, small.clone()),
        (Region::D, small),
    ]))?;
    if stationary_measures(&transition_matrix(l)?)? != formula {
        return Err(Error::Inconsistent(format!(
            "stationary vector of P disagrees with μ at l = {l}"
        )));
    }
    if region_measures_from_density(&generalized_baker(l)?)? != formula {
        return Err(Error::Inconsistent(format!(
            "density × width disagrees with μ at l = {l}"
        )));
    }
    Ok(formula)
}
