//! Floating-point ensemble driver shared by the Monte-Carlo estimators.
//!
//! The ensemble is cut into fixed-size shards; shard `i` draws from a
//! ChaCha8 stream `(seed, i)`, so results do not depend on thread count.

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::maps::Interval;
use crate::model::Model;

pub const SHARD_SIZE: usize = 1 << 14;

/// Amplitude of the uniform kick added to x after every float step. Maps
/// with dyadic slopes otherwise shift the mantissa out within ~50 steps and
/// every orbit lands on a fixed point.
pub const DITHER: f64 = 1.0 / (1u64 << 44) as f64;

pub const DEFAULT_TRANSIENT: usize = 100;

#[derive(Clone, Copy, Debug)]
struct Bounds {
    lo: f64,
    hi: f64,
    lo_closed: bool,
    hi_closed: bool,
}

impl Bounds {
    fn new(i: &Interval<f64>) -> Self {
        Self {
            lo: i.lo,
            hi: i.hi,
            lo_closed: i.lo_closed,
            hi_closed: i.hi_closed,
        }
    }

    #[inline]
    fn contains(&self, t: f64) -> bool {
        (if self.lo_closed { t >= self.lo } else { t > self.lo })
            && (if self.hi_closed { t <= self.hi } else { t < self.hi })
    }
}

#[derive(Clone, Copy, Debug)]
struct FastBranch {
    x: Bounds,
    y: Bounds,
    m: [[f64; 2]; 2],
    o: [f64; 2],
    weight: i64,
}

/// Flattened float copy of a model's map with per-branch contraction weights.
#[derive(Clone, Debug)]
pub struct Stepper {
    branches: Vec<FastBranch>,
}

impl Stepper {
    pub fn new(model: &Model) -> Self {
        let branches = model
            .float_map()
            .branches()
            .iter()
            .map(|b| FastBranch {
                x: Bounds::new(&b.domain.x),
                y: Bounds::new(&b.domain.y),
                m: b.action.matrix,
                o: b.action.offset,
                weight: b.label.map_or(0, |r| model.weight(r)),
            })
            .collect();
        Self { branches }
    }

    /// One step: new point and the weight of the region left behind.
    #[inline]
    pub fn step(&self, x: f64, y: f64) -> (f64, f64, i64) {
        let b = self
            .branches
            .iter()
            .find(|b| b.x.contains(x) && b.y.contains(y))
            .unwrap_or_else(|| self.nearest(x, y));
        let nx = b.m[0][0] * x + b.m[0][1] * y + b.o[0];
        let ny = b.m[1][0] * x + b.m[1][1] * y + b.o[1];
        (nx.clamp(0.0, 1.0), ny.clamp(0.0, 1.0), b.weight)
    }

    // Rounding can leave a point a few ulps outside every domain.
    fn nearest(&self, x: f64, y: f64) -> &FastBranch {
        let dist = |b: &&FastBranch| {
            let dx = (b.x.lo - x).max(x - b.x.hi).max(0.0);
            let dy = (b.y.lo - y).max(y - b.y.hi).max(0.0);
            dx + dy
        };
        self.branches
            .iter()
            .min_by(|a, b| dist(a).total_cmp(&dist(b)))
            .expect("map has branches")
    }
}

#[inline]
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Advances one particle by one dithered step.
#[inline]
pub fn dithered_step(stepper: &Stepper, rng: &mut ChaCha8Rng, x: f64, y: f64) -> (f64, f64, i64) {
    let (nx, ny, w) = stepper.step(x, y);
    let kick = (2.0 * unit(rng) - 1.0) * DITHER;
    ((nx + kick).clamp(0.0, 1.0), ny, w)
}

/// Histogram of `g` over segments of length `n`, one per particle started
/// uniformly on the square and relaxed for `transient` steps.
pub fn g_histogram(
    model: &Model,
    n: usize,
    transient: usize,
    ensemble: usize,
    seed: u64,
) -> Result<BTreeMap<i64, u64>> {
    if n == 0 || ensemble == 0 {
        return Err(Error::InvalidParameter("need n ≥ 1 and a non-empty ensemble".into()));
    }
    let stepper = Stepper::new(model);
    let shards = ensemble.div_ceil(SHARD_SIZE);
    let partial: Vec<BTreeMap<i64, u64>> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard as u64);
            let count = SHARD_SIZE.min(ensemble - shard * SHARD_SIZE);
            let mut hist = BTreeMap::new();
            for _ in 0..count {
                let (mut x, mut y) = (unit(&mut rng), unit(&mut rng));
                for _ in 0..transient {
                    (x, y, _) = dithered_step(&stepper, &mut rng, x, y);
                }
                let mut g = 0;
                for _ in 0..n {
                    let w;
                    (x, y, w) = dithered_step(&stepper, &mut rng, x, y);
                    g += w;
                }
                *hist.entry(g).or_insert(0) += 1;
            }
            hist
        })
        .collect();
    let mut total = BTreeMap::new();
    for hist in partial {
        for (g, c) in hist {
            *total.entry(g).or_insert(0) += c;
        }
    }
    Ok(total)
}
