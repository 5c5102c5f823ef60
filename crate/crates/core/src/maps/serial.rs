//! JSON form of a map: branch list with every coefficient written as a
//! `[numerator, denominator]` integer pair.

use serde::{Deserialize, Serialize};

use super::{AffineAction, AffineBranch, Interval, MapKind, PiecewiseAffineMap, Rect, Region};
use crate::error::{Error, Result};
use crate::scalar::{pair, Rational};

pub const MAP_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
struct Q(#[serde(with = "pair")] Rational);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct IntervalDoc {
    lo: Q,
    hi: Q,
    lo_closed: bool,
    hi_closed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct BranchDoc {
    x: IntervalDoc,
    y: IntervalDoc,
    matrix: [[Q; 2]; 2],
    offset: [Q; 2],
    jacobian: Q,
    label: Option<Region>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapDocument {
    schema_version: u32,
    name: String,
    #[serde(flatten)]
    kind: MapKind,
    branches: Vec<BranchDoc>,
}

impl IntervalDoc {
    fn from_interval(i: &Interval<Rational>) -> Self {
        Self {
            lo: Q(i.lo.clone()),
            hi: Q(i.hi.clone()),
            lo_closed: i.lo_closed,
            hi_closed: i.hi_closed,
        }
    }

    fn into_interval(self) -> Interval<Rational> {
        Interval {
            lo: self.lo.0,
            hi: self.hi.0,
            lo_closed: self.lo_closed,
            hi_closed: self.hi_closed,
        }
    }
}

impl From<&PiecewiseAffineMap<Rational>> for MapDocument {
    fn from(map: &PiecewiseAffineMap<Rational>) -> Self {
        let branches = map
            .branches()
            .iter()
            .map(|b| {
                let m = &b.action.matrix;
                BranchDoc {
                    x: IntervalDoc::from_interval(&b.domain.x),
                    y: IntervalDoc::from_interval(&b.domain.y),
                    matrix: [
                        [Q(m[0][0].clone()), Q(m[0][1].clone())],
                        [Q(m[1][0].clone()), Q(m[1][1].clone())],
                    ],
                    offset: [Q(b.action.offset[0].clone()), Q(b.action.offset[1].clone())],
                    jacobian: Q(b.jacobian.clone()),
                    label: b.label,
                }
            })
            .collect();
        Self {
            schema_version: MAP_SCHEMA_VERSION,
            name: map.name().to_string(),
            kind: map.kind().clone(),
            branches,
        }
    }
}

impl MapDocument {
    /// Rebuilds the map, re-running every construction check.
    pub fn into_map(self) -> Result<PiecewiseAffineMap<Rational>> {
        if self.schema_version != MAP_SCHEMA_VERSION {
            return Err(Error::Parse(format!(
                "unsupported map schema version {}",
                self.schema_version
            )));
        }
        let branches = self
            .branches
            .into_iter()
            .map(|b| {
                let [[m00, m01], [m10, m11]] = b.matrix;
                let [o0, o1] = b.offset;
                let action = AffineAction::new([[m00.0, m01.0], [m10.0, m11.0]], [o0.0, o1.0])?;
                AffineBranch::new(
                    Rect::new(b.x.into_interval(), b.y.into_interval()),
                    action,
                    b.jacobian.0,
                    b.label,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        PiecewiseAffineMap::new(self.name, self.kind, branches)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

impl PiecewiseAffineMap<Rational> {
    pub fn to_json(&self) -> String {
        MapDocument::from(self).to_json()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        MapDocument::from_json(text)?.into_map()
    }
}
