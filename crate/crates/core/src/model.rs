//! A map family at a fixed parameter, bundled with the symbolic data the
//! statistical modules need: the region chain, the contraction unit and the
//! time-reversal pairing of regions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{
    composite_map, generalized_baker, generalized_involution, simple_baker, simple_involution, PerturbationStrip,
    PiecewiseAffineMap, Region,
};
use crate::scalar::{int, ratio, LogMultiple, Rational};
use crate::transfer::{region_measures, transition_matrix, transition_matrix_from_map, StochasticMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Two-branch baker map.
    Map1,
    /// Four-branch generalized baker map.
    Map2,
    /// Generalized map after the strip fold, `K = M ∘ N`.
    Composite,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Map1 => "map1",
            Family::Map2 => "map2",
            Family::Composite => "composite",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "map1" | "simple" => Ok(Family::Map1),
            "map2" | "generalized" => Ok(Family::Map2),
            "composite" | "k" => Ok(Family::Composite),
            other => Err(Error::Parse(format!(
                "unknown family `{other}` (expected map1, map2 or composite)"
            ))),
        }
    }
}

/// Region-level Markov chain of a family: states, stationary measure,
/// Lebesgue widths, transition matrix and the contraction of each state in
/// units of the family's log base.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    pub states: Vec<Region>,
    pub mu: Vec<Rational>,
    pub widths: Vec<Rational>,
    pub p: StochasticMatrix,
    pub weights: Vec<i64>,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, r: Region) -> Option<usize> {
        self.states.iter().position(|s| *s == r)
    }
}

#[derive(Clone, Debug)]
pub struct Model {
    family: Family,
    l: Rational,
    strip: Option<PerturbationStrip>,
    map: PiecewiseAffineMap<Rational>,
    float_map: PiecewiseAffineMap<f64>,
    involution: Option<PiecewiseAffineMap<Rational>>,
    chain: Chain,
}

impl Model {
    /// The composite family uses the default strip.
    pub fn new(family: Family, l: &Rational) -> Result<Self> {
        match family {
            Family::Map1 => {
                let map = simple_baker(l)?;
                let p = transition_matrix_from_map(&map)?;
                let r = int(1) - l;
                let chain = Chain {
                    states: vec![Region::A, Region::B],
                    mu: vec![l.clone(), r.clone()],
                    widths: vec![l.clone(), r],
                    p,
                    weights: vec![1, -1],
                };
                Ok(Self {
                    family,
                    l: l.clone(),
                    strip: None,
                    float_map: map.to_f64(),
                    map,
                    involution: Some(simple_involution()),
                    chain,
                })
            }
            Family::Map2 => {
                let map = generalized_baker(l)?;
                Ok(Self {
                    family,
                    l: l.clone(),
                    strip: None,
                    float_map: map.to_f64(),
                    map,
                    involution: Some(generalized_involution()),
                    chain: generalized_chain(l)?,
                })
            }
            Family::Composite => Self::composite(l, &PerturbationStrip::default_for(l)),
        }
    }

    pub fn composite(l: &Rational, strip: &PerturbationStrip) -> Result<Self> {
        let map = composite_map(l, strip)?;
        Ok(Self {
            family: Family::Composite,
            l: l.clone(),
            strip: Some(strip.clone()),
            float_map: map.to_f64(),
            map,
            involution: None,
            chain: generalized_chain(l)?,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn l(&self) -> &Rational {
        &self.l
    }

    pub fn strip(&self) -> Option<&PerturbationStrip> {
        self.strip.as_ref()
    }

    pub fn map(&self) -> &PiecewiseAffineMap<Rational> {
        &self.map
    }

    pub fn float_map(&self) -> &PiecewiseAffineMap<f64> {
        &self.float_map
    }

    /// The exact involution; the composite map has none.
    pub fn involution(&self) -> Result<&PiecewiseAffineMap<Rational>> {
        self.involution.as_ref().ok_or_else(|| {
            Error::Unsupported(format!(
                "the {} map is not reversible under any involution here",
                self.family
            ))
        })
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    /// `e^φ`-type unit: a step in a state with weight `w` has `Λ = w·ln(base)`.
    /// `l/r` for the simple map, `2(1 − 2l)` otherwise.
    pub fn contraction_base(&self) -> Rational {
        match self.family {
            Family::Map1 => &self.l / (int(1) - &self.l),
            Family::Map2 | Family::Composite => int(2) * (int(1) - int(2) * &self.l),
        }
    }

    /// `φ` (or `ln(l/r)`) as a symbolic log.
    pub fn phi(&self) -> LogMultiple {
        LogMultiple::new(int(1), self.contraction_base()).expect("positive base")
    }

    pub fn weight(&self, r: Region) -> i64 {
        self.chain.index_of(r).map_or(0, |i| self.chain.weights[i])
    }

    /// Region paired with `r` under the coarse-grained reversal `G∘M`.
    pub fn reversed_region(&self, r: Region) -> Region {
        match (self.family, r) {
            (Family::Map1, Region::A) => Region::B,
            (Family::Map1, Region::B) => Region::A,
            (_, Region::B) => Region::C,
            (_, Region::C) => Region::B,
            (_, other) => other,
        }
    }

    /// `[α_min, α_max]` bracketing `P(g)/(P(−g)·base^g)`: `[1, 1]` for the
    /// Bernoulli chain, `[4l, 1/(4l)]` for the generalized chain.
    pub fn alpha_bounds(&self) -> (Rational, Rational) {
        match self.family {
            Family::Map1 => (int(1), int(1)),
            Family::Map2 | Family::Composite => {
                let lo = int(4) * &self.l;
                let hi = lo.recip();
                (lo, hi)
            }
        }
    }

    /// Stationary mean contraction `Σ_i μ_i w_i · ln(base)`.
    pub fn mean_lambda(&self) -> LogMultiple {
        let coeff: Rational = self
            .chain
            .mu
            .iter()
            .zip(&self.chain.weights)
            .map(|(m, w)| m * int(*w))
            .sum();
        LogMultiple::new(coeff, self.contraction_base()).expect("positive base")
    }
}

fn generalized_chain(l: &Rational) -> Result<Chain> {
    let mu = region_measures(l)?;
    let states = Region::ALL.to_vec();
    Ok(Chain {
        mu: states.iter().map(|r| mu.get(*r)).collect(),
        widths: vec![l.clone(), ratio(1, 2) - l, ratio(1, 4), ratio(1, 4)],
        p: transition_matrix(l)?,
        weights: vec![0, 1, -1, 0],
        states,
    })
}
