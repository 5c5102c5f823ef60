use std::path::Path;

use baker_fr::fluctuation::{
    alpha_bounds_check, compare_histogram, empirical_fr_report, exact_distribution, fr_report,
    monte_carlo_distribution, verify_fr_irreversible, MAX_ALPHA_STEPS,
};
use baker_fr::maps::{interior_samples, verify_reversibility, PhasePoint, Region};
use baker_fr::multibaker::{analytic_current, linear_response_sweep, simulate_current};
use baker_fr::observables::{
    average_contraction, mean_lambda_analytic, reversed_initial, trajectory as exact_trajectory, trajectory_f64,
};
use baker_fr::periodic::{enumerate_orbits, orbits_csv, upo_diagnostic, upo_distribution};
use baker_fr::scalar::{format_rational, int, parse_rational, rational_to_f64};
use baker_fr::transfer::{invariant_density, iterate_to_invariant_density, project_unstable, StepDensity};
use baker_fr::{Family, Rational};
use serde::Serialize;
use serde_json::json;

use crate::config::{ExperimentConfig, Mode};
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))
}

fn finish(cfg: &ExperimentConfig, command: &str, pass: bool, result: impl Serialize) -> Result<bool, CliError> {
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": cfg,
        "pass": pass,
        "result": result,
    });
    let text = serde_json::to_string_pretty(&doc).expect("report serializes") + "\n";
    write(&cfg.out, &format!("{command}.json"), &text)?;
    println!("{command}: {}", if pass { "pass" } else { "FAIL" });
    Ok(pass)
}

fn closed_form_density(family: Family, l: &Rational) -> Result<StepDensity<Rational>, CliError> {
    Ok(match family {
        Family::Map1 => StepDensity::uniform(),
        Family::Map2 => {
            let norm = int(1) + int(4) * l;
            StepDensity::new(
                vec![int(0), baker_fr::scalar::ratio(1, 2), int(1)],
                vec![int(2) / &norm, int(8) * l / &norm],
            )?
        }
        Family::Composite => {
            return Err(baker_fr::Error::Unsupported("density is computed for map1 and map2".into()).into())
        }
    })
}

pub fn density(cfg: &ExperimentConfig) -> Result<bool, CliError> {
    let model = cfg.model()?;
    let analytic = closed_form_density(cfg.family, model.l())?;
    let map = project_unstable(model.map())?;
    let rho = invariant_density(&map)?;
    let iterated = iterate_to_invariant_density(&map, 1e-14, 10_000)?;
    let exact_match = rho.sup_distance(&analytic) == 0.0;
    let iteration_error = iterated.sup_distance(&rho.to_f64());
    let pass = exact_match && iteration_error <= 1e-10;

    write(&cfg.out, "density.csv", &rho.to_csv())?;
    write(&cfg.out, "density_analytic.csv", &analytic.to_csv())?;
    write(&cfg.out, "density_iterated.csv", &iterated.to_csv())?;
    let mu: Vec<_> = model
        .chain()
        .states
        .iter()
        .zip(&model.chain().mu)
        .map(|(r, m)| json!({"region": r, "mu": format_rational(m)}))
        .collect();
    finish(
        cfg,
        "density",
        pass,
        json!({
            "breakpoints": rho.breakpoints().iter().map(format_rational).collect::<Vec<_>>(),
            "values": rho.values().iter().map(format_rational).collect::<Vec<_>>(),
            "analytic_breakpoints": analytic.breakpoints().iter().map(format_rational).collect::<Vec<_>>(),
            "analytic_values": analytic.values().iter().map(format_rational).collect::<Vec<_>>(),
            "exact_match": exact_match,
            "iteration_sup_error": iteration_error,
            "region_measures": mu,
        }),
    )
}

pub fn fr(cfg: &ExperimentConfig) -> Result<bool, CliError> {
    let model = cfg.model()?;
    let alpha = (cfg.n <= MAX_ALPHA_STEPS)
        .then(|| alpha_bounds_check(&model, cfg.n))
        .transpose()?;
    let alpha_pass = alpha.as_ref().is_none_or(|a| a.pass);
    match cfg.mode {
        Mode::Exact => {
            let dist = exact_distribution(&model, cfg.n, cfg.start)?;
            let report = fr_report(&model, &dist)?;
            write(&cfg.out, "distribution.csv", &dist.to_csv())?;
            write(&cfg.out, "fr.csv", &report.to_csv())?;
            let pass = report.pass && alpha_pass;
            finish(
                cfg,
                "fr",
                pass,
                json!({"distribution": dist, "report": report, "alpha": alpha}),
            )
        }
        Mode::Montecarlo => {
            if cfg.family == Family::Composite {
                let rep =
                    verify_fr_irreversible(model.l(), &cfg.strip()?, cfg.n, cfg.ensemble, cfg.transient, cfg.seed)?;
                write(&cfg.out, "fr.csv", &rep.empirical.to_csv())?;
                let pass = rep.pass && alpha_pass;
                return finish(cfg, "fr", pass, json!({"report": rep, "alpha": alpha}));
            }
            let mc = monte_carlo_distribution(&model, cfg.n, cfg.ensemble, cfg.transient, cfg.seed)?;
            let report = empirical_fr_report(&model, &mc)?;
            let exact = exact_distribution(&model, cfg.n, baker_fr::fluctuation::Start::Stationary)?;
            let bins = compare_histogram(&mc, &exact);
            let bins_pass = bins.iter().all(|b| b.pass);
            write(&cfg.out, "histogram.csv", &mc.to_csv())?;
            write(&cfg.out, "fr.csv", &report.to_csv())?;
            let pass = report.pass && bins_pass && alpha_pass;
            finish(
                cfg,
                "fr",
                pass,
                json!({"histogram": mc, "report": report, "bins": bins, "bins_pass": bins_pass, "alpha": alpha}),
            )
        }
    }
}

pub fn upo(cfg: &ExperimentConfig) -> Result<bool, CliError> {
    let model = cfg.model()?;
    match cfg.family {
        Family::Map1 => {
            let orbits = enumerate_orbits(&model, cfg.n)?;
            let upo = upo_distribution(&model, cfg.n)?;
            let exact = exact_distribution(&model, cfg.n, baker_fr::fluctuation::Start::Stationary)?;
            let matches = upo == exact;
            write(&cfg.out, "orbits.csv", &orbits_csv(&orbits))?;
            write(&cfg.out, "upo.csv", &upo.to_csv())?;
            finish(
                cfg,
                "upo",
                matches,
                json!({"orbits": orbits.len(), "distribution": upo, "matches_exact": matches}),
            )
        }
        _ => {
            // Exploratory only: the expansion is not expected to match.
            let diag = upo_diagnostic(&model, cfg.n)?;
            let mut csv = String::from("g,upo,exact\n");
            for r in &diag.rows {
                csv += &format!("{},{:.17e},{:.17e}\n", r.g, r.upo, r.exact);
            }
            write(&cfg.out, "upo.csv", &csv)?;
            finish(cfg, "upo", true, json!({"diagnostic": diag}))
        }
    }
}

pub fn multibaker(cfg: &ExperimentConfig) -> Result<bool, CliError> {
    let model = cfg.model()?;
    let psi = analytic_current(model.l())?;
    let lambda = mean_lambda_analytic(Family::Map2, model.l())?;
    let est = simulate_current(&model, cfg.ensemble, cfg.n, cfg.transient, cfg.seed)?;
    let psi_f = rational_to_f64(&psi);
    let mut pass = (est.psi_hat - psi_f).abs() <= 4.0 * est.stderr;
    let mut csv = String::from("displacement,count\n");
    for (d, c) in &est.displacements {
        csv += &format!("{d},{c}\n");
    }
    write(&cfg.out, "displacements.csv", &csv)?;

    let biases = cfg.biases()?;
    let sweep = if biases.is_empty() {
        None
    } else {
        let rep = linear_response_sweep(&biases, cfg.ensemble, cfg.n, cfg.transient, cfg.seed)?;
        write(&cfg.out, "sweep.csv", &rep.to_csv())?;
        pass &= rep.pass;
        Some(rep)
    };
    finish(
        cfg,
        "multibaker",
        pass,
        json!({
            "psi_analytic": format_rational(&psi),
            "lambda_analytic": lambda,
            "estimate": est,
            "sweep": sweep,
        }),
    )
}

pub fn reversibility(cfg: &ExperimentConfig) -> Result<bool, CliError> {
    let model = cfg.model()?;
    let report = verify_reversibility(model.map(), model.involution()?, &interior_samples(cfg.samples))?;
    let pairing_ok = model
        .chain()
        .states
        .iter()
        .all(|r| report.conjugacy.get(r) == Some(&model.reversed_region(*r)));
    let pass = report.holds() && pairing_ok;
    let mut csv = String::from("region,image\n");
    for (a, b) in &report.conjugacy {
        csv += &format!("{a},{b}\n");
    }
    write(&cfg.out, "conjugacy.csv", &csv)?;
    finish(
        cfg,
        "reversibility",
        pass,
        json!({"report": report, "pairing_matches_chain": pairing_ok}),
    )
}

pub fn trajectory(cfg: &ExperimentConfig) -> Result<bool, CliError> {
    let model = cfg.model()?;
    let x0 = PhasePoint::new(parse_rational(&cfg.x0[0])?, parse_rational(&cfg.x0[1])?);
    match cfg.mode {
        Mode::Exact => {
            let seg = exact_trajectory(&model, &x0, cfg.n, true)?;
            write(&cfg.out, "trajectory.csv", &seg.to_csv(&model)?)?;
            let stats = average_contraction(&model, &x0, cfg.n)?;
            // Λ̄_n(G Mⁿ x0) = −Λ̄_n(x0) where an involution exists.
            let reversed = match model.involution() {
                Ok(_) => {
                    let back = reversed_initial(&model, &x0, cfg.n)?;
                    Some(average_contraction(&model, &back, cfg.n)?)
                }
                Err(_) => None,
            };
            let pass = reversed.as_ref().is_none_or(|r| r.g == -stats.g);
            finish(
                cfg,
                "trajectory",
                pass,
                json!({
                    "g": stats.g,
                    "stats": stats,
                    "reversed": reversed,
                    "final_region": seg.symbols.labels().last().copied().unwrap_or(Region::A),
                }),
            )
        }
        Mode::Montecarlo => {
            let seg = trajectory_f64(&model, &x0.to_scalar::<f64>(), cfg.n, true)?;
            write(&cfg.out, "trajectory.csv", &seg.to_csv(&model)?)?;
            let g = seg.symbols.g(&model, cfg.n);
            finish(cfg, "trajectory", true, json!({"g": g, "symbols": seg.symbols}))
        }
    }
}
