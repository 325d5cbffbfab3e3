//! The three experiment subcommands.

use clap::ValueEnum as _;
use qmeter::experiments::{
    qubit_system_state, qubit_target, run_ndr_sweep, run_qubit_tradeoff, run_random_sweep,
    ExperimentConfig, TrialRecord, TrialStatus, DEFAULT_SEED,
};
use qmeter::linalg::pauli;
use qmeter::schema::{scheme_to_json, state_to_json};
use qmeter::{expectation, ndr_frontier, noise_floor, variance, Observable};
use serde_json::json;

use crate::output::{float, linspace, logspace, opt_float, timestamp, Conventions, OutputDir, RunManifest};
use crate::{CliError, Disturbed, Format, RunArgs};

const SEED_ENV: &str = "QMETER_SEED";

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}: `{v}` is not a 64-bit unsigned integer"))),
        Err(_) => Ok(None),
    }
}

/// Layers, lowest first: built-in defaults, `QMETER_SEED`, the config
/// file, explicit flags.
pub fn resolve_config(args: &RunArgs, default_trials: usize) -> Result<ExperimentConfig, CliError> {
    let mut config = ExperimentConfig {
        trials: default_trials,
        master_seed: env_seed()?.unwrap_or(DEFAULT_SEED),
        ..Default::default()
    };
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        config = ExperimentConfig::parse_over(&text, config)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    }
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if let Some(s) = args.seed {
        config.master_seed = s;
    }
    if let Some(t) = args.unbias_tol {
        config.unbias_tol = t;
    }
    if let Some(t) = args.reg_tol {
        config.reg_tol = t;
    }
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(config)
}

fn conventions(system_state: &'static str) -> Conventions {
    Conventions {
        probe_basis: "computational",
        unitary: "haar",
        probe_state: "hilbert-schmidt",
        system_state,
        meter: "gue shifted to zero ground, random kernel dimension",
    }
}

fn qubit_conventions() -> Conventions {
    Conventions {
        probe_basis: "computational",
        unitary: "haar",
        probe_state: "optimised bloch vector",
        system_state: "(I + sigma_y)/2",
        meter: "I (x) m|v><v|, optimised",
    }
}

fn manifest(
    subcommand: &'static str,
    config: &ExperimentConfig,
    args: &RunArgs,
    options: serde_json::Value,
    conventions: Conventions,
    summary: serde_json::Value,
) -> RunManifest {
    RunManifest {
        tool: "qmeter",
        version: env!("CARGO_PKG_VERSION"),
        subcommand,
        master_seed: Some(config.master_seed),
        config: Some(config.clone()),
        format: args.format.as_str(),
        options,
        conventions: Some(conventions),
        timestamp: timestamp(),
        outputs: Vec::new(),
        summary,
    }
}

fn dump(out: &mut OutputDir, records: &[TrialRecord]) -> Result<(), CliError> {
    for r in records {
        if !matches!(r.status, TrialStatus::Ok | TrialStatus::Unbounded) {
            continue;
        }
        if let Some(a) = &r.artifacts {
            let stem = format!("schemes/trial_{:04}", r.trial_index);
            out.write_bytes(
                &format!("{stem}.scheme.json"),
                (scheme_to_json(&a.scheme, Some(&a.target)) + "\n").as_bytes(),
            )?;
            out.write_bytes(
                &format!("{stem}.state.json"),
                (state_to_json(&a.rho_s) + "\n").as_bytes(),
            )?;
        }
    }
    Ok(())
}

fn xi_cell(r: &TrialRecord) -> String {
    match r.report.map(|t| t.xi) {
        Some(qmeter::Activity::Finite(x)) => float(x),
        Some(qmeter::Activity::Unbounded) => "unbounded".into(),
        None => String::new(),
    }
}

fn satisfied_cell(r: &TrialRecord) -> String {
    r.satisfied().map(|s| s.to_string()).unwrap_or_default()
}

fn count(records: &[TrialRecord], status: TrialStatus) -> usize {
    records.iter().filter(|r| r.status == status).count()
}

fn violations(records: &[TrialRecord]) -> Vec<usize> {
    records.iter().filter(|r| r.violates()).map(|r| r.trial_index).collect()
}

fn violation_error(indices: &[usize]) -> CliError {
    CliError::Physics(format!("trade-off bound violated in trials {indices:?}"))
}

pub fn random_sweep(args: &RunArgs) -> Result<(), CliError> {
    let config = resolve_config(args, 1000)?;
    let records = run_random_sweep(&config).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut out = OutputDir::create(&args.out)?;

    match args.format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = records
                .iter()
                .map(|r| {
                    let t = r.report;
                    vec![
                        r.trial_index.to_string(),
                        r.d_s.to_string(),
                        r.d_p.to_string(),
                        r.seed.to_string(),
                        opt_float(t.map(|t| t.cv_squared)),
                        xi_cell(r),
                        opt_float(t.map(|t| t.noise_ratio)),
                        opt_float(t.map(|t| t.lhs)),
                        opt_float(t.map(|t| t.rhs)),
                        float(r.residual),
                        r.status.as_str().into(),
                        satisfied_cell(r),
                    ]
                })
                .collect();
            out.write_csv(
                "random_sweep.csv",
                &["trial", "d_S", "d_P", "seed", "cv2", "xi", "noise_ratio", "lhs", "rhs", "residual", "status", "satisfied"],
                &rows,
            )?;
        }
        Format::Json => out.write_json("random_sweep.json", &records)?,
    }

    let points: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| r.report)
        .filter(|t| t.lhs.is_finite())
        .map(|t| (t.cv_squared, t.lhs))
        .collect();
    let rows: Vec<Vec<String>> = points.iter().map(|&(x, y)| vec![float(x), float(y)]).collect();
    out.write_csv("random_sweep_points.csv", &["cv2", "lhs"], &rows)?;
    let top = points.iter().map(|p| p.0).fold(1.0, f64::max);
    let rows: Vec<Vec<String>> = linspace(0.0, top, 101).map(|x| vec![float(x), float(x)]).collect();
    out.write_csv("random_sweep_reference.csv", &["cv2", "lhs"], &rows)?;
    if args.dump {
        dump(&mut out, &records)?;
    }

    let bad = violations(&records);
    let summary = json!({
        "trials": records.len(),
        "ok": count(&records, TrialStatus::Ok),
        "unbounded": count(&records, TrialStatus::Unbounded),
        "degenerate": count(&records, TrialStatus::Degenerate),
        "failed": count(&records, TrialStatus::Failed),
        "violations": bad,
    });
    println!("random-sweep: {summary}");
    for r in records.iter().filter(|r| r.status == TrialStatus::Failed) {
        eprintln!("trial {} failed: {}", r.trial_index, r.error.as_deref().unwrap_or("unknown"));
    }
    out.finish(manifest("random-sweep", &config, args, json!({ "dump": args.dump }), conventions("hilbert-schmidt"), summary))?;
    if bad.is_empty() {
        Ok(())
    } else {
        Err(violation_error(&bad))
    }
}

fn qubit_cv_squared() -> f64 {
    let (a, rho) = (qubit_target(), qubit_system_state());
    let mean = expectation(&a, &rho).expect("fixed qubit pair");
    mean * mean / variance(&a, &rho).expect("fixed qubit pair")
}

pub fn qubit_tradeoff(args: &RunArgs) -> Result<(), CliError> {
    let config = resolve_config(args, 100)?;
    let sweep = run_qubit_tradeoff(&config).map_err(|e| CliError::Physics(e.to_string()))?;
    let records = &sweep.records;
    let mut out = OutputDir::create(&args.out)?;

    match args.format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = records
                .iter()
                .map(|r| {
                    let t = r.report;
                    vec![
                        r.trial_index.to_string(),
                        float(r.residual),
                        xi_cell(r),
                        opt_float(t.map(|t| t.one_plus_noise_ratio())),
                        opt_float(t.map(|t| t.cv_squared)),
                        satisfied_cell(r),
                    ]
                })
                .collect();
            out.write_csv(
                "qubit_tradeoff.csv",
                &["trial", "residual", "xi", "one_plus_noise_ratio", "cv2", "satisfied"],
                &rows,
            )?;
        }
        Format::Json => out.write_json("qubit_tradeoff.json", records)?,
    }
    out.write_csv(
        "qubit_tradeoff_summary.csv",
        &["attempts", "accepted", "failures"],
        &[vec![sweep.attempts.to_string(), records.len().to_string(), sweep.failures.to_string()]],
    )?;

    let points: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| r.report)
        .filter_map(|t| t.xi.finite().map(|xi| (xi, t.one_plus_noise_ratio())))
        .collect();
    let rows: Vec<Vec<String>> = points.iter().map(|&(x, y)| vec![float(x), float(y)]).collect();
    out.write_csv("qubit_tradeoff_points.csv", &["xi", "one_plus_noise_ratio"], &rows)?;
    let cv2 = qubit_cv_squared();
    let positive = points.iter().map(|p| p.0).filter(|&x| x > 0.0);
    let lo = positive.clone().fold(f64::INFINITY, f64::min);
    let hi = positive.fold(0.0, f64::max);
    let (lo, hi) = if lo.is_finite() { (lo / 2.0, hi * 2.0) } else { (0.1, 10.0) };
    let rows: Vec<Vec<String>> = logspace(lo, hi, 201).map(|x| vec![float(x), float(cv2 / x)]).collect();
    out.write_csv("qubit_tradeoff_reference.csv", &["xi", "one_plus_noise_ratio"], &rows)?;
    if args.dump {
        dump(&mut out, records)?;
    }

    let bad = violations(records);
    let summary = json!({
        "accepted": records.len(),
        "attempts": sweep.attempts,
        "failures": sweep.failures,
        "xi_spread": sweep.xi_spread(),
        "violations": bad,
    });
    println!("qubit-tradeoff: {summary}");
    out.finish(manifest("qubit-tradeoff", &config, args, json!({ "dump": args.dump }), qubit_conventions(), summary))?;
    if bad.is_empty() {
        Ok(())
    } else {
        Err(violation_error(&bad))
    }
}

fn disturbed_observable(b: Disturbed) -> Observable {
    let m = match b {
        Disturbed::SigmaX => pauli::x(),
        Disturbed::SigmaY => pauli::y(),
        Disturbed::SigmaZ => pauli::z(),
    };
    Observable::new(m).expect("Pauli matrices are Hermitian")
}

pub fn ndr(args: &RunArgs, xi_lines: &[f64], b: Disturbed) -> Result<(), CliError> {
    if let Some(bad) = xi_lines.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(CliError::Usage(format!("--xi must be positive, got {bad}")));
    }
    let config = resolve_config(args, 100)?;
    let b_obs = disturbed_observable(b);
    let sweep = run_ndr_sweep(&config, Some(&b_obs)).map_err(|e| CliError::Physics(e.to_string()))?;
    let mut out = OutputDir::create(&args.out)?;

    match args.format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = sweep
                .records
                .iter()
                .map(|r| {
                    vec![
                        r.trial.trial_index.to_string(),
                        float(r.noise_ratio_std),
                        float(r.disturbance_ratio),
                        xi_cell(&r.trial),
                        opt_float(r.noise_floor),
                        float(r.ndr_slack),
                        r.holds_additive.to_string(),
                        r.holds_reciprocal.to_string(),
                        r.floor_respected.to_string(),
                    ]
                })
                .collect();
            out.write_csv(
                "ndr.csv",
                &[
                    "trial",
                    "noise_std_ratio",
                    "disturbance_std_ratio",
                    "xi",
                    "noise_floor",
                    "ndr_slack",
                    "holds_additive",
                    "holds_reciprocal",
                    "floor_respected",
                ],
                &rows,
            )?;
        }
        Format::Json => out.write_json("ndr.json", &sweep.records)?,
    }

    let rows: Vec<Vec<String>> = sweep
        .records
        .iter()
        .map(|r| vec![float(r.noise_ratio_std), float(r.disturbance_ratio)])
        .collect();
    out.write_csv("ndr_points.csv", &["noise_std_ratio", "disturbance_std_ratio"], &rows)?;
    let kappa = sweep.kappa();
    let right = sweep
        .records
        .iter()
        .map(|r| 1.1 * r.noise_ratio_std)
        .fold(2.0, f64::max);
    let rows: Vec<Vec<String>> = linspace(0.0, right, 201)
        .map(|x| vec![float(x), float(ndr_frontier(x, kappa))])
        .collect();
    out.write_csv("ndr_frontier.csv", &["noise_std_ratio", "disturbance_std_ratio"], &rows)?;
    let floors = xi_lines
        .iter()
        .map(|&xi| {
            noise_floor(xi, sweep.cv_squared)
                .map(|f| vec![float(xi), float(sweep.cv_squared), float(f)])
                .map_err(|e| CliError::Usage(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    out.write_csv("ndr_floors.csv", &["xi", "cv2", "noise_floor"], &floors)?;
    if args.dump {
        let trials: Vec<TrialRecord> = sweep.records.iter().map(|r| r.trial.clone()).collect();
        dump(&mut out, &trials)?;
    }

    let failing: Vec<usize> = sweep
        .records
        .iter()
        .filter(|r| !r.passes() || r.trial.violates())
        .map(|r| r.trial.trial_index)
        .collect();
    let summary = json!({
        "accepted": sweep.records.len(),
        "attempts": sweep.attempts,
        "failures": sweep.failures,
        "std_a": sweep.std_a,
        "std_b": sweep.std_b,
        "commutator_mean_abs": sweep.commutator_mean_abs,
        "kappa": kappa,
        "cv2": sweep.cv_squared,
        "failing": failing,
    });
    println!("ndr: {summary}");
    let b_name = b.to_possible_value().map(|v| v.get_name().to_string());
    let options = json!({ "dump": args.dump, "b": b_name, "xi": xi_lines });
    out.finish(manifest("ndr", &config, args, options, qubit_conventions(), summary))?;
    if failing.is_empty() {
        Ok(())
    } else {
        Err(CliError::Physics(format!(
            "noise-disturbance relation or noise floor violated in trials {failing:?}"
        )))
    }
}
