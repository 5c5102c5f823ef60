//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use baker_fr::fluctuation::{
    alpha_bounds_check, brute_force_distribution, exact_distributions, monte_carlo_distribution,
    verify_fr_irreversible, Start,
};
use baker_fr::maps::{
    generalized_baker, interior_samples, verify_reversibility, PerturbationStrip, PhasePoint, Region,
};
use baker_fr::multibaker::{linear_response_sweep, simulate_current};
use baker_fr::observables::{average_contraction, mean_lambda_analytic, reversed_initial};
use baker_fr::periodic::upo_distribution;
use baker_fr::scalar::{int, ln_rational, ratio, rational_to_f64, LogMultiple};
use baker_fr::transfer::{
    invariant_density, project_unstable, region_measures_from_density, stationary_measures, transition_matrix,
};
use baker_fr::{Family, Model, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:.2?}, limit {limit:.0?}"))
}

fn model(family: Family, l: &Rational) -> Model {
    Model::new(family, l).unwrap()
}

fn pow(base: &Rational, e: i64) -> Rational {
    let p = num_traits::pow(base.clone(), e.unsigned_abs() as usize);
    if e >= 0 {
        p
    } else {
        p.recip()
    }
}

fn binomial(n: usize, k: usize) -> Rational {
    (0..k).fold(int(1), |c, i| c * int((n - i) as i64) / int((i + 1) as i64))
}

/// Random `l ∈ (0, 1/4]`.
fn random_l(rng: &mut ChaCha8Rng) -> Rational {
    let den: i64 = rng.random_range(4..=400);
    let num: i64 = rng.random_range(1..=den / 4);
    ratio(num, den)
}

fn invariant_density_exact() -> Outcome {
    let start = Instant::now();
    for l in [ratio(1, 8), ratio(1, 6), ratio(1, 5), ratio(1, 4)] {
        let rho = invariant_density(&project_unstable(&generalized_baker(&l).unwrap()).unwrap()).unwrap();
        let norm = int(1) + int(4) * &l;
        let expected = [int(2) / &norm, int(8) * &l / &norm];
        for (x, want) in [(ratio(1, 4), &expected[0]), (ratio(3, 4), &expected[1])] {
            ensure(&rho.value_at(&x) == want, || {
                format!("l = {l}: ρ({x}) = {}", rho.value_at(&x))
            })?;
        }
        ensure(rho.integral() == int(1), || "not normalized".into())?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("l=1/8 gives (4/3, 2/3); {elapsed:.2?}"))
}

fn measure_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let l = random_l(&mut rng);
        let from_chain = stationary_measures(&transition_matrix(&l).unwrap()).unwrap();
        let from_density = region_measures_from_density(&generalized_baker(&l).unwrap()).unwrap();
        ensure(from_chain == from_density, || format!("routes differ at l = {l}"))?;
        let total: Rational = from_chain.iter().map(|(_, m)| m.clone()).sum();
        ensure(total == int(1), || format!("Σμ = {total} at l = {l}"))?;
        // Closed form (2l, 1 − 2l, 2l, 2l)/(1 + 4l).
        let norm = int(1) + int(4) * &l;
        let closed = [int(2) * &l, int(1) - int(2) * &l, int(2) * &l, int(2) * &l];
        for (r, c) in Region::ALL.iter().zip(closed) {
            ensure(from_chain.get(*r) == c / &norm, || format!("μ_{r} at l = {l}"))?;
        }
    }
    Ok("20 random l".into())
}

fn reversibility_suite() -> Outcome {
    let start = Instant::now();
    let samples = interior_samples(1000);
    let cases = [
        (
            Family::Map1,
            ratio(2, 3),
            vec![(Region::A, Region::B), (Region::B, Region::A)],
        ),
        (
            Family::Map2,
            ratio(1, 8),
            vec![
                (Region::A, Region::A),
                (Region::B, Region::C),
                (Region::C, Region::B),
                (Region::D, Region::D),
            ],
        ),
    ];
    for (family, l, conjugacy) in cases {
        let m = model(family, &l);
        let rep = verify_reversibility(m.map(), m.involution().unwrap(), &samples).unwrap();
        ensure(rep.holds(), || format!("{family}: {} failures", rep.failures.len()))?;
        ensure(
            rep.conjugacy == conjugacy.into_iter().collect::<BTreeMap<_, _>>(),
            || format!("{family}: conjugacy {:?}", rep.conjugacy),
        )?;
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(1))?;
    Ok(format!("1000 points per map; {elapsed:.2?}"))
}

fn antisymmetry() -> Outcome {
    const PRIMES: [i64; 4] = [10_007, 10_009, 10_037, 10_039];
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for (family, l) in [(Family::Map1, ratio(2, 3)), (Family::Map2, ratio(1, 8))] {
        let m = model(family, &l);
        for _ in 0..100 {
            let q = PRIMES[rng.random_range(0..PRIMES.len())];
            let x0 = PhasePoint::new(ratio(rng.random_range(1..q), q), ratio(rng.random_range(1..q), q));
            for n in 1..=30 {
                let fwd = average_contraction(&m, &x0, n).unwrap();
                let back = average_contraction(&m, &reversed_initial(&m, &x0, n).unwrap(), n).unwrap();
                ensure(back.g == -fwd.g, || {
                    format!("{family}, n = {n}: g = {} and {}", fwd.g, back.g)
                })?;
            }
        }
    }
    Ok("100 points × n ≤ 30, both maps".into())
}

fn oracle_equivalence() -> Outcome {
    for (family, l) in [(Family::Map1, ratio(2, 3)), (Family::Map2, ratio(1, 8))] {
        let m = model(family, &l);
        let dp = exact_distributions(&m, 12, Start::Stationary).unwrap();
        for (k, d) in dp.iter().enumerate() {
            let n = k + 1;
            ensure(
                d == &brute_force_distribution(&m, n, Start::Stationary).unwrap(),
                || format!("{family}: DP ≠ enumeration at n = {n}"),
            )?;
            if family == Family::Map1 {
                ensure(d == &upo_distribution(&m, n).unwrap(), || {
                    format!("UPO ≠ DP at n = {n}")
                })?;
            }
        }
    }
    Ok("n ≤ 12".into())
}

fn map1_fr_exact() -> Outcome {
    let (l, r) = (ratio(2, 3), ratio(1, 3));
    let m = model(Family::Map1, &l);
    let base = &l / &r;
    let mut pairs = 0;
    for d in exact_distributions(&m, 20, Start::Stationary).unwrap() {
        let n = d.n();
        for alpha in 0..=n {
            let g = 2 * alpha as i64 - n as i64;
            let p = binomial(n, alpha) * pow(&l, alpha as i64) * pow(&r, (n - alpha) as i64);
            ensure(d.get(g) == p, || format!("P({g}) at n = {n} is not binomial"))?;
            if g > 0 {
                ensure(d.get(g) == d.get(-g) * pow(&base, g), || {
                    format!("ratio at n = {n}, g = {g}")
                })?;
                pairs += 1;
            }
        }
    }
    Ok(format!("{pairs} (n, g) pairs with zero error"))
}

fn map2_fr_band() -> Outcome {
    let start = Instant::now();
    let mut pairs = 0;
    for l in [ratio(1, 8), ratio(1, 6), ratio(1, 5)] {
        let m = model(Family::Map2, &l);
        let base = int(2) * (int(1) - int(2) * &l);
        let (lo, hi) = (int(4) * &l, (int(4) * &l).recip());
        let phi = ln_rational(&base);
        let bound = ln_rational(&hi);
        for d in exact_distributions(&m, 20, Start::Stationary).unwrap() {
            for g in d.support().filter(|g| *g > 0) {
                let alpha = d.get(g) / (d.get(-g) * pow(&base, g));
                ensure(alpha >= lo && alpha <= hi, || {
                    format!("l = {l}, n = {}, g = {g}: α = {alpha}", d.n())
                })?;
                let lhs = ln_rational(&(d.get(g) / d.get(-g)));
                ensure((lhs - g as f64 * phi).abs() <= bound + 1e-12, || {
                    format!("log band at g = {g}")
                })?;
                ensure(g as usize <= d.n(), || "|Λ̄_n| > φ".into())?;
                pairs += 1;
            }
        }
        for n in 1..=8 {
            let rep = alpha_bounds_check(&m, n).unwrap();
            ensure(rep.pass && rep.min >= lo && rep.max <= hi, || {
                format!("α range at l = {l}, n = {n}")
            })?;
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(60))?;
    Ok(format!("{pairs} ±g pairs, exhaustive α for n ≤ 8; {elapsed:.2?}"))
}

fn analytic_steady_state() -> Outcome {
    for l in [ratio(2, 3), ratio(1, 3), ratio(3, 5), ratio(1, 2)] {
        let r = int(1) - &l;
        let want = LogMultiple::new(&l - &r, &l / &r).unwrap();
        ensure(mean_lambda_analytic(Family::Map1, &l).unwrap() == want, || {
            format!("map1 at l = {l}")
        })?;
    }
    for l in [ratio(1, 8), ratio(1, 6), ratio(1, 5), ratio(1, 4), ratio(3, 40)] {
        let b = (int(1) - int(4) * &l) / (int(1) - int(2) * &l);
        let psi = &b / (int(4) - int(3) * &b);
        let closed = LogMultiple::new(-psi, (int(2) - &b) / int(2)).unwrap();
        let via_mu = LogMultiple::new((int(1) - int(4) * &l) / (int(1) + int(4) * &l), int(2) - int(4) * &l).unwrap();
        let got = mean_lambda_analytic(Family::Map2, &l).unwrap();
        ensure(got == closed && got == via_mu, || format!("map2 at l = {l}: {got}"))?;
    }
    let mut detail = Vec::new();
    for (family, l, seed) in [(Family::Map2, ratio(1, 8), 81), (Family::Map1, ratio(2, 3), 82)] {
        let m = model(family, &l);
        let exact = m.mean_lambda().value();
        let (mean, se) = monte_carlo_distribution(&m, 1, 1_000_000, 100, seed)
            .unwrap()
            .mean_lambda(&m);
        ensure((mean - exact).abs() <= 4.0 * se, || {
            format!("{family}: ⟨Λ̂⟩ = {mean} ± {se}, exact {exact}")
        })?;
        if family == Family::Map2 {
            ensure(se / exact < 0.01, || format!("relative stderr {}", se / exact))?;
        }
        detail.push(format!("{family} {mean:.5}±{se:.5} vs {exact:.5}"));
    }
    Ok(detail.join("; "))
}

fn transport() -> Outcome {
    let start = Instant::now();
    let m = model(Family::Map2, &ratio(1, 8));
    let est = simulate_current(&m, 100_000, 1000, 100, 91).unwrap();
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(30))?;
    ensure((est.psi_hat - 1.0 / 3.0).abs() <= 4.0 * est.stderr, || {
        format!("Ψ̂ = {} ± {}", est.psi_hat, est.stderr)
    })?;

    let biases = [ratio(1, 100), ratio(1, 50), ratio(1, 20), ratio(1, 10)];
    let sweep = linear_response_sweep(&biases, 100_000, 1000, 100, 92).unwrap();
    for row in &sweep.rows {
        let b = rational_to_f64(&row.b);
        let slope = 1.0 / (4.0 - 3.0 * b);
        ensure((row.psi_hat / b - slope).abs() <= 4.0 * row.stderr / b, || {
            format!("b = {b}: Ψ̂/b = {}", row.psi_hat / b)
        })?;
        let lambda = rational_to_f64(&row.psi_analytic) * ln_rational(&(int(2) / (int(2) - &row.b)));
        ensure((lambda / (b * b) - 0.125).abs() <= b / 4.0, || {
            format!("⟨Λ⟩/b² at b = {b}")
        })?;
        ensure((row.lambda_hat - lambda).abs() <= 4.0 * row.lambda_stderr, || {
            format!("⟨Λ̂⟩ at b = {b}: {} vs {lambda}", row.lambda_hat)
        })?;
    }
    let first = &sweep.rows[0];
    Ok(format!(
        "Ψ̂ = {:.5} ± {:.5} in {elapsed:.2?}; Ψ̂/b at b=0.01: {:.4}",
        est.psi_hat, est.stderr, first.psi_hat_over_b
    ))
}

fn irreversible_composite() -> Outcome {
    let l = ratio(1, 8);
    let rep = verify_fr_irreversible(&l, &PerturbationStrip::default_for(&l), 10, 1_000_000, 100, 10).unwrap();
    ensure(rep.fold_preserves_regions, || "fold moves x".into())?;
    for row in rep.empirical.rows.iter().filter(|r| r.tested) {
        ensure(row.excess <= 4.0 * row.sigma, || {
            format!("g = {}: excess {} > 4σ", row.g, row.excess)
        })?;
    }
    ensure(rep.pass, || "report failed".into())?;
    Ok(format!("{} populated ±g pairs", rep.empirical.tested_pairs))
}

fn cli_determinism() -> Outcome {
    use baker_fr_cli::{run, Command, ExperimentConfig, Mode};
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let snapshot = |dir: &std::path::Path| -> BTreeMap<String, Vec<u8>> {
        std::fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap())
            .map(|e| {
                (
                    e.file_name().to_string_lossy().into_owned(),
                    std::fs::read(e.path()).unwrap(),
                )
            })
            .collect()
    };
    let base = ExperimentConfig {
        ensemble: 20_000,
        ..ExperimentConfig::default()
    };
    let cases = [
        (Command::Density, base.clone()),
        (Command::Fr, base.clone()),
        (
            Command::Fr,
            ExperimentConfig {
                mode: Mode::Montecarlo,
                ..base.clone()
            },
        ),
        (
            Command::Fr,
            ExperimentConfig {
                family: Family::Composite,
                mode: Mode::Montecarlo,
                ..base.clone()
            },
        ),
        (
            Command::Upo,
            ExperimentConfig {
                family: Family::Map1,
                l: "2/3".into(),
                ..base.clone()
            },
        ),
        (Command::Multibaker, ExperimentConfig { n: 200, ..base.clone() }),
        (Command::Reversibility, base.clone()),
        (Command::Trajectory, base.clone()),
    ];
    let mut files = 0;
    for (k, (command, cfg)) in cases.into_iter().enumerate() {
        let cfg = ExperimentConfig {
            out: tmp.path().join(format!("{k}")),
            ..cfg
        };
        run(command, &cfg).map_err(|e| format!("{command:?}: {e}"))?;
        let first = snapshot(&cfg.out);
        run(command, &cfg).map_err(|e| format!("{command:?}: {e}"))?;
        ensure(first == snapshot(&cfg.out), || format!("{command:?} output changed"))?;
        files += first.len();
    }
    Ok(format!("8 commands, {files} files byte-identical"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("exact invariant density", invariant_density_exact),
        ("measure consistency", measure_consistency),
        ("reversibility suite", reversibility_suite),
        ("antisymmetry", antisymmetry),
        ("oracle equivalence", oracle_equivalence),
        ("map1 FR exact", map1_fr_exact),
        ("map2 FR band", map2_fr_band),
        ("analytic steady state", analytic_steady_state),
        ("transport", transport),
        ("irreversible composite", irreversible_composite),
        ("CLI determinism", cli_determinism),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} [{secs:.2} s] {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} [{secs:.2} s] {why}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
