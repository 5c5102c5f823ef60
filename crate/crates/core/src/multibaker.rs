//! Multibaker lift of the generalized map: an infinite row of unit cells in
//! which the image of B moves one cell right and the image of C one cell
//! left. Net displacement after `n` steps is the contraction count `g`.

use std::fmt::Write as _;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::{PhasePoint, PiecewiseAffineMap, Region};
use crate::model::{Family, Model};
use crate::observables::{bias, l_from_bias, mean_lambda_analytic};
use crate::scalar::{format_rational, int, ln_rational, rational_to_f64, text, LogMultiple, Rational, Scalar};
use crate::sim::{dithered_step, Stepper, SHARD_SIZE};
use crate::transfer::region_measures;

#[derive(Clone, Debug, PartialEq)]
pub struct ChainState<S> {
    pub cell: i64,
    pub local: PhasePoint<S>,
}

impl<S: Scalar> ChainState<S> {
    pub fn new(cell: i64, local: PhasePoint<S>) -> Self {
        Self { cell, local }
    }
}

fn generalized(model: &Model) -> Result<()> {
    match model.family() {
        Family::Map2 | Family::Composite => Ok(()),
        Family::Map1 => Err(Error::Unsupported(
            "the multibaker lift is defined for the generalized map".into(),
        )),
    }
}

/// Local point evolves by the map; the cell moves by the weight of the
/// region the point left.
pub fn lift_step_with<S: Scalar>(
    model: &Model,
    map: &PiecewiseAffineMap<S>,
    s: &ChainState<S>,
) -> Result<ChainState<S>> {
    generalized(model)?;
    let shift = model.weight(map.region_of(&s.local)?);
    Ok(ChainState {
        cell: s.cell + shift,
        local: map.apply(&s.local)?,
    })
}

pub fn lift_step(model: &Model, s: &ChainState<Rational>) -> Result<ChainState<Rational>> {
    lift_step_with(model, model.map(), s)
}

/// `Ψ = b/(4 − 3b)`, confirmed equal to `μ_B − μ_C`.
pub fn analytic_current(l: &Rational) -> Result<Rational> {
    let b = bias(l)?;
    let psi = &b / (int(4) - int(3) * &b);
    let mu = region_measures(l)?;
    if psi != mu.get(Region::B) - mu.get(Region::C) {
        return Err(Error::Inconsistent(format!("Ψ ≠ μ_B − μ_C at l = {l}")));
    }
    Ok(psi)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurrentEstimate {
    #[serde(with = "text")]
    pub l: Rational,
    pub particles: usize,
    pub steps: usize,
    pub transient: usize,
    pub seed: u64,
    /// Net cells per step per particle.
    pub psi_hat: f64,
    pub stderr: f64,
    /// `psi_hat · φ`.
    pub lambda_hat: f64,
    pub lambda_stderr: f64,
    /// Displacement histogram over particles.
    pub displacements: Vec<(i64, u64)>,
}

/// Particles start uniformly in cell 0, relax for `transient` steps with the
/// cell index reset afterwards, then move for `steps` steps.
pub fn simulate_current(
    model: &Model,
    particles: usize,
    steps: usize,
    transient: usize,
    seed: u64,
) -> Result<CurrentEstimate> {
    generalized(model)?;
    if particles < 2 || steps == 0 {
        return Err(Error::InvalidParameter(
            "need at least two particles and one step".into(),
        ));
    }
    let stepper = Stepper::new(model);
    let shards = particles.div_ceil(SHARD_SIZE);
    let parts: Vec<Vec<i64>> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard as u64);
            let count = SHARD_SIZE.min(particles - shard * SHARD_SIZE);
            let unit = |rng: &mut ChaCha8Rng| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            (0..count)
                .map(|_| {
                    let (mut x, mut y) = (unit(&mut rng), unit(&mut rng));
                    for _ in 0..transient {
                        (x, y, _) = dithered_step(&stepper, &mut rng, x, y);
                    }
                    let mut cell = 0;
                    for _ in 0..steps {
                        let w;
                        (x, y, w) = dithered_step(&stepper, &mut rng, x, y);
                        cell += w;
                    }
                    cell
                })
                .collect()
        })
        .collect();

    let n = particles as f64;
    let per_step: Vec<f64> = parts.iter().flatten().map(|d| *d as f64 / steps as f64).collect();
    let mean = per_step.iter().sum::<f64>() / n;
    let var = per_step.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let stderr = (var / n).sqrt();
    let phi = ln_rational(&model.contraction_base());

    let mut hist = std::collections::BTreeMap::new();
    for d in parts.iter().flatten() {
        *hist.entry(*d).or_insert(0u64) += 1;
    }
    Ok(CurrentEstimate {
        l: model.l().clone(),
        particles,
        steps,
        transient,
        seed,
        psi_hat: mean,
        stderr,
        lambda_hat: mean * phi,
        lambda_stderr: stderr * phi,
        displacements: hist.into_iter().collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(with = "text")]
    pub b: Rational,
    #[serde(with = "text")]
    pub l: Rational,
    #[serde(with = "text")]
    pub psi_analytic: Rational,
    pub psi_hat: f64,
    pub stderr: f64,
    /// `Ψ/b = 1/(4 − 3b)`.
    #[serde(with = "text")]
    pub psi_over_b: Rational,
    pub psi_hat_over_b: f64,
    pub lambda_analytic: LogMultiple,
    pub lambda_hat: f64,
    pub lambda_stderr: f64,
    pub lambda_over_b2: f64,
    pub lambda_hat_over_b2: f64,
    /// `|Ψ̂ − Ψ| ≤ 4σ` and `|⟨Λ̂⟩ − ⟨Λ⟩| ≤ 4σ`.
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub particles: usize,
    pub steps: usize,
    pub transient: usize,
    pub seed: u64,
    pub rows: Vec<SweepRow>,
    pub pass: bool,
}

/// Current and contraction over a list of biases. Analytic limits checked
/// per row: `Ψ/b = 1/(4 − 3b)` exactly and `|⟨Λ⟩/b² − 1/8| ≤ b/4`.
pub fn linear_response_sweep(
    b_values: &[Rational],
    particles: usize,
    steps: usize,
    transient: usize,
    seed: u64,
) -> Result<SweepReport> {
    let mut rows = Vec::with_capacity(b_values.len());
    for (i, b) in b_values.iter().enumerate() {
        if b <= &int(0) || b >= &int(1) {
            return Err(Error::InvalidParameter(format!("bias {b} must lie in (0, 1)")));
        }
        let l = l_from_bias(b)?;
        let model = Model::new(Family::Map2, &l)?;
        let psi = analytic_current(&l)?;
        let psi_over_b = &psi / b;
        if psi_over_b != (int(4) - int(3) * b).recip() {
            return Err(Error::Inconsistent(format!("Ψ/b ≠ 1/(4 − 3b) at b = {b}")));
        }
        let lambda = mean_lambda_analytic(Family::Map2, &l)?;
        if lambda != model.phi().scaled(&psi) {
            return Err(Error::Inconsistent(format!("⟨Λ⟩ ≠ Ψφ at b = {b}")));
        }
        let bf = rational_to_f64(b);
        let lambda_over_b2 = lambda.value() / (bf * bf);
        if (lambda_over_b2 - 0.125).abs() > bf / 4.0 {
            return Err(Error::Inconsistent(format!(
                "⟨Λ⟩/b² = {lambda_over_b2} far from 1/8 at b = {b}"
            )));
        }
        let est = simulate_current(&model, particles, steps, transient, seed.wrapping_add(i as u64))?;
        let psi_f = rational_to_f64(&psi);
        let pass = (est.psi_hat - psi_f).abs() <= 4.0 * est.stderr
            && (est.lambda_hat - lambda.value()).abs() <= 4.0 * est.lambda_stderr;
        rows.push(SweepRow {
            b: b.clone(),
            l,
            psi_hat_over_b: est.psi_hat / bf,
            psi_over_b,
            psi_analytic: psi,
            psi_hat: est.psi_hat,
            stderr: est.stderr,
            lambda_over_b2,
            lambda_hat_over_b2: est.lambda_hat / (bf * bf),
            lambda_analytic: lambda,
            lambda_hat: est.lambda_hat,
            lambda_stderr: est.lambda_stderr,
            pass,
        });
    }
    Ok(SweepReport {
        particles,
        steps,
        transient,
        seed,
        pass: rows.iter().all(|r| r.pass),
        rows,
    })
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "b,l,psi_analytic,psi_hat,stderr,psi_over_b,psi_hat_over_b,lambda_analytic,lambda_hat,lambda_over_b2,lambda_hat_over_b2,pass\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:.17e},{:.17e},{},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{}",
                format_rational(&r.b),
                format_rational(&r.l),
                format_rational(&r.psi_analytic),
                r.psi_hat,
                r.stderr,
                format_rational(&r.psi_over_b),
                r.psi_hat_over_b,
                r.lambda_analytic.value(),
                r.lambda_hat,
                r.lambda_over_b2,
                r.lambda_hat_over_b2,
                r.pass
            );
        }
        out
    }
}

/// Biases of the standard sweep.
pub fn default_biases() -> Vec<Rational> {
    use crate::scalar::ratio;
    vec![ratio(1, 100), ratio(1, 50), ratio(1, 20), ratio(1, 10)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluctuation::{monte_carlo_distribution, MonteCarloDistribution};
    use crate::observables::trajectory;
    use crate::scalar::ratio;

    fn map2(l: Rational) -> Model {
        Model::new(Family::Map2, &l).unwrap()
    }

    #[test]
    fn cell_moves_with_region() {
        let m = map2(ratio(1, 8));
        let step = |x: Rational| {
            lift_step(&m, &ChainState::new(5, PhasePoint::new(x, ratio(1, 3))))
                .unwrap()
                .cell
        };
        assert_eq!(step(ratio(1, 4)), 6);
        assert_eq!(step(ratio(1, 16)), 5);
        assert_eq!(step(ratio(5, 8)), 4);
        assert_eq!(step(ratio(7, 8)), 5);
        assert!(lift_step(
            &Model::new(Family::Map1, &ratio(1, 2)).unwrap(),
            &ChainState::new(0, PhasePoint::new(int(0), int(0)))
        )
        .is_err());
    }

    #[test]
    fn displacement_is_g() {
        let m = map2(ratio(1, 6));
        let x0 = PhasePoint::new(ratio(3, 11), ratio(2, 7));
        let n = 30;
        let mut s = ChainState::new(0, x0.clone());
        for _ in 0..n {
            s = lift_step(&m, &s).unwrap();
        }
        let seg = trajectory(&m, &x0, n, false).unwrap();
        assert_eq!(s.cell, seg.symbols.g(&m, n));
        assert_eq!(s.local, m.map().iterate(&x0, n).unwrap());
    }

    #[test]
    fn analytic_values() {
        assert_eq!(analytic_current(&ratio(1, 8)).unwrap(), ratio(1, 3));
        assert_eq!(analytic_current(&ratio(1, 4)).unwrap(), int(0));
        for (p, q) in [(1, 5), (1, 7), (2, 9), (3, 13), (1, 100)] {
            let l = ratio(p, q);
            let psi = analytic_current(&l).unwrap();
            let m = map2(l.clone());
            assert_eq!(m.mean_lambda(), m.phi().scaled(&psi));
        }
    }

    #[test]
    fn simulated_current_matches() {
        let m = map2(ratio(1, 8));
        let est = simulate_current(&m, 20_000, 200, 100, 4).unwrap();
        assert!((est.psi_hat - 1.0 / 3.0).abs() <= 4.0 * est.stderr, "{est:?}");
        assert_eq!(est, simulate_current(&m, 20_000, 200, 100, 4).unwrap());

        // Same streams as the g histogram, so the means coincide.
        let mc: MonteCarloDistribution = monte_carlo_distribution(&m, 200, 20_000, 100, 4).unwrap();
        assert!((mc.mean_g().0 / 200.0 - est.psi_hat).abs() < 1e-12);

        let eq = simulate_current(&map2(ratio(1, 4)), 20_000, 100, 100, 8).unwrap();
        assert!(eq.psi_hat.abs() <= 4.0 * eq.stderr);
    }

    #[test]
    fn sweep_small() {
        let rep = linear_response_sweep(&[ratio(1, 10), ratio(1, 5)], 4000, 200, 100, 1).unwrap();
        assert_eq!(rep.rows[0].psi_over_b, ratio(10, 37));
        assert!(rep.pass, "{rep:?}");
        assert!(rep.to_csv().lines().nth(1).unwrap().starts_with("1/10,9/38,1/37,"));
        assert!(linear_response_sweep(&[int(0)], 10, 10, 0, 1).is_err());
    }
}
