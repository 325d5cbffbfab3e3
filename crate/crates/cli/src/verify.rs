//! Single-scheme audit.

use std::path::Path;

use qmeter::bound::{tur_bound_with_kraus, Activity, BoundOptions, KrausLabel};
use qmeter::experiments::variance_split_tolerance;
use qmeter::measurement::{heisenberg_moments, meter_moments_from_kraus, variance_decomposition};
use qmeter::quantum::COMPLETENESS_TOL;
use qmeter::schema::{parse_scheme, parse_state};
use qmeter::{derive_unbiased_observable, kraus_from_scheme, purify_and_verify, Error, PurificationReport};
use serde::Serialize;
use serde_json::json;

use crate::output::{float, timestamp, OutputDir, RunManifest};
use crate::{CliError, Format};

/// Kraus-sum and full-space meter moments must agree to this.
const MOMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

#[derive(Debug, Clone, Serialize)]
struct Audit {
    #[serde(rename = "d_S")]
    d_s: usize,
    #[serde(rename = "d_P")]
    d_p: usize,
    target: &'static str,
    residual: Option<f64>,
    var_n: Option<f64>,
    xi: Option<Activity>,
    selected_l: Option<KrausLabel>,
    lhs: Option<f64>,
    rhs: Option<f64>,
    kraus_completeness: Option<f64>,
    moment_error: Option<f64>,
    split_discrepancy: Option<f64>,
    purification: Option<Purification>,
    checks: Vec<Check>,
}

#[derive(Debug, Clone, Copy, Serialize)]
struct Purification {
    norm_error: f64,
    mean_error: f64,
    variance_error: f64,
    state_error: f64,
}

impl From<PurificationReport> for Purification {
    fn from(r: PurificationReport) -> Self {
        Self {
            norm_error: r.norm_error,
            mean_error: r.mean_error,
            variance_error: r.variance_error,
            state_error: r.state_error,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn audit(scheme_text: &str, state_text: &str, opts: &BoundOptions) -> Result<Audit, CliError> {
    let loaded = parse_scheme(scheme_text).map_err(|e| CliError::Usage(e.to_string()))?;
    let rho_s = parse_state(state_text).map_err(|e| CliError::Usage(e.to_string()))?;
    let scheme = loaded.scheme;
    if rho_s.dim() != scheme.d_s() {
        return Err(CliError::Usage(
            Error::DimensionMismatch {
                expected: scheme.d_s(),
                found: rho_s.dim(),
            }
            .to_string()
                + " (rho_S)",
        ));
    }
    let (target, source) = match loaded.target {
        Some(a) => (a, "file"),
        None => (
            derive_unbiased_observable(&scheme).map_err(|e| CliError::Physics(e.to_string()))?,
            "derived",
        ),
    };

    let mut audit = Audit {
        d_s: scheme.d_s(),
        d_p: scheme.d_p(),
        target: source,
        residual: None,
        var_n: None,
        xi: None,
        selected_l: None,
        lhs: None,
        rhs: None,
        kraus_completeness: None,
        moment_error: None,
        split_discrepancy: None,
        purification: None,
        checks: Vec::new(),
    };
    let check = |audit: &mut Audit, name, passed, detail: String| {
        audit.checks.push(Check { name, passed, detail });
    };

    let kraus = match kraus_from_scheme(&scheme) {
        Ok(k) => k,
        Err(e) => {
            check(&mut audit, "kraus completeness", false, e.to_string());
            return Ok(audit);
        }
    };
    let completeness = kraus.completeness_residual();
    audit.kraus_completeness = Some(completeness);
    check(&mut audit, "kraus completeness", completeness <= COMPLETENESS_TOL, float(completeness));

    let internal = |e: Error| CliError::Physics(e.to_string());
    let from_kraus = meter_moments_from_kraus(&kraus, &rho_s).map_err(internal)?;
    let full = heisenberg_moments(&scheme, &rho_s).map_err(internal)?;
    let moment_error = (from_kraus.mean - full.mean)
        .abs()
        .max((from_kraus.variance - full.variance).abs());
    audit.moment_error = Some(moment_error);
    check(&mut audit, "meter moments", moment_error <= MOMENT_TOL, float(moment_error));

    match purify_and_verify(&kraus, &rho_s) {
        Ok((_, report)) => {
            audit.purification = Some(report.into());
            check(&mut audit, "purification", true, float(report.max_error()));
        }
        Err(Error::InternalConsistency { check: name, error }) => {
            check(&mut audit, name, false, float(error));
        }
        Err(e) => return Err(internal(e)),
    }

    let residual = qmeter::unbiasedness_residual(&scheme, &target).map_err(internal)?;
    audit.residual = Some(residual);
    let split = variance_decomposition(&scheme, &target, &rho_s).map_err(internal)?;
    audit.var_n = Some(split.noise_variance);
    audit.split_discrepancy = Some(split.discrepancy);
    let tol = variance_split_tolerance(split.meter_variance, residual, target.matrix().frobenius_norm());
    check(&mut audit, "variance decomposition", split.discrepancy <= tol, float(split.discrepancy));

    match tur_bound_with_kraus(&scheme, &kraus, &target, &rho_s, opts) {
        Ok(report) => {
            audit.xi = Some(report.xi);
            audit.selected_l = report.selected_l;
            audit.lhs = Some(report.lhs);
            audit.rhs = Some(report.rhs);
            check(&mut audit, "unbiasedness", true, float(residual));
            let detail = if report.xi.is_unbounded() {
                "vacuous: unbounded survival activity".to_string()
            } else {
                format!("{} >= {}", float(report.lhs), float(report.rhs))
            };
            check(&mut audit, "trade-off bound", report.satisfied, detail);
            check(
                &mut audit,
                "meter trade-off bound",
                report.meter_satisfied,
                float(report.meter_ratio),
            );
        }
        Err(Error::Unbiasedness { residual, tol }) => {
            check(&mut audit, "unbiasedness", false, format!("{} > {}", float(residual), float(tol)));
        }
        Err(Error::Degenerate { variance }) => {
            check(&mut audit, "target variance", false, float(variance));
        }
        Err(e) => check(&mut audit, "trade-off bound", false, e.to_string()),
    }
    Ok(audit)
}

fn print(audit: &Audit) {
    let opt = |x: Option<f64>| x.map(float).unwrap_or_else(|| "-".into());
    println!("scheme: d_S = {}, d_P = {}, target {}", audit.d_s, audit.d_p, audit.target);
    println!("unbiasedness residual: {}", opt(audit.residual));
    println!("noise variance: {}", opt(audit.var_n));
    match (audit.xi, audit.selected_l) {
        (Some(Activity::Finite(x)), Some(l)) => println!("survival activity: {} (l = {l:?})", float(x)),
        (Some(Activity::Finite(x)), None) => println!("survival activity: {}", float(x)),
        (Some(Activity::Unbounded), _) => println!("survival activity: unbounded"),
        (None, _) => println!("survival activity: -"),
    }
    println!("bound lhs: {}", opt(audit.lhs));
    println!("bound rhs: {}", opt(audit.rhs));
    println!("variance decomposition discrepancy: {}", opt(audit.split_discrepancy));
    if let Some(p) = audit.purification {
        println!(
            "purification errors: norm {}, mean {}, variance {}, state {}",
            float(p.norm_error),
            float(p.mean_error),
            float(p.variance_error),
            float(p.state_error)
        );
    }
    for c in &audit.checks {
        let mark = if c.passed { "pass" } else { "FAIL" };
        println!("[{mark}] {}: {}", c.name, c.detail);
    }
}

pub fn verify(
    scheme_path: &Path,
    state_path: &Path,
    unbias_tol: Option<f64>,
    reg_tol: Option<f64>,
    out: Option<&Path>,
    format: Format,
) -> Result<(), CliError> {
    let mut opts = BoundOptions::default();
    if let Some(t) = unbias_tol {
        opts.unbias_tol = t;
    }
    if let Some(t) = reg_tol {
        opts.reg_tol = t;
    }
    if !(opts.unbias_tol > 0.0 && opts.reg_tol > 0.0) {
        return Err(CliError::Usage("tolerances must be positive".into()));
    }
    let audit = audit(&read(scheme_path)?, &read(state_path)?, &opts)?;
    print(&audit);

    if let Some(dir) = out {
        let mut files = OutputDir::create(dir)?;
        match format {
            Format::Json => files.write_json("audit.json", &audit)?,
            Format::Csv => {
                let rows: Vec<Vec<String>> = audit
                    .checks
                    .iter()
                    .map(|c| vec![c.name.to_string(), c.passed.to_string(), c.detail.clone()])
                    .collect();
                files.write_csv("audit.csv", &["check", "passed", "detail"], &rows)?;
            }
        }
        files.finish(RunManifest {
            tool: "qmeter",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: "verify",
            master_seed: None,
            config: None,
            format: format.as_str(),
            options: json!({
                "scheme": scheme_path.display().to_string(),
                "state": state_path.display().to_string(),
                "unbias_tol": opts.unbias_tol,
                "reg_tol": opts.reg_tol,
            }),
            conventions: None,
            timestamp: timestamp(),
            outputs: Vec::new(),
            summary: json!({ "passed": audit.checks.iter().all(|c| c.passed) }),
        })?;
    }

    let failed: Vec<&str> = audit.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Physics(failed.join(", ")))
    }
}
