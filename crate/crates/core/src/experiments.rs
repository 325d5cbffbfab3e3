//! Randomised experiment drivers.
//!
//! * [`run_random_sweep`]: random schemes of random dimension, each checked
//!   against the trade-off bound.
//! * [`run_qubit_tradeoff`]: qubit schemes numerically tuned to be unbiased
//!   for a fixed observable and state, so the coefficient of variation is
//!   fixed and only `Ξ` and the noise vary.
//! * [`run_ndr_sweep`]: the same qubit schemes evaluated against the
//!   noise-disturbance relation and the noise floor.
//!
//! Every trial draws from its own RNG stream keyed by `(master_seed,
//! index)`, so results do not depend on how trials are scheduled.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bound::{
    commutator_mean_abs, disturbance_operator, ndr_check, noise_floor, tur_bound_with_kraus,
    Activity, BoundOptions, NdrCheck, TurReport, DEFAULT_UNBIAS_TOL,
};
use crate::error::{Error, Result};
use crate::linalg::{pauli, tensor, ComplexMatrix, DEFAULT_REG_TOL};
use crate::measurement::{
    derive_unbiased_observable, kraus_from_scheme, purify_and_verify, unbiased_matrix,
    variance_decomposition, MeasurementScheme,
};
use crate::optimize::NelderMead;
use crate::quantum::{variance_of, DensityOperator, Observable, UnitaryOperator};
use crate::random::{
    haar_unitary, random_density, random_meter_with_kernel, trial_rng, trial_seed, TrialRng,
};

pub const DEFAULT_SEED: u64 = 271_828;
/// Relative tolerance for `ΔM² = ΔA² + ΔN²` on exactly unbiased schemes.
pub const VARIANCE_SPLIT_TOL: f64 = 1e-9;
/// Slack allowed on the noise-floor comparison.
pub const FLOOR_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub trials: usize,
    pub master_seed: u64,
    pub dim_range: Vec<usize>,
    pub unbias_tol: f64,
    pub reg_tol: f64,
    pub max_restarts: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            master_seed: DEFAULT_SEED,
            dim_range: vec![2, 3, 4, 5],
            unbias_tol: DEFAULT_UNBIAS_TOL,
            reg_tol: DEFAULT_REG_TOL,
            max_restarts: 50,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidInput(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.dim_range.is_empty() || self.dim_range.iter().any(|&d| d < 2) {
            return bad("dim_range must be a non-empty set of dimensions >= 2");
        }
        if self.dim_range.iter().any(|&d| d > 5) {
            // Joint operators stay at most 25-dimensional.
            return bad("dim_range entries must not exceed 5");
        }
        if !(self.unbias_tol > 0.0) || !(self.reg_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_restarts == 0 {
            return bad("max_restarts must be at least 1");
        }
        Ok(())
    }

    pub fn bound_options(&self) -> BoundOptions {
        BoundOptions {
            unbias_tol: self.unbias_tol,
            reg_tol: self.reg_tol,
        }
    }

    /// Parses either a JSON object or `key = value` lines (`#` comments).
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_over(text, Self::default())
    }

    /// Like [`parse`](Self::parse), with keys absent from `text` taken
    /// from `base`.
    pub fn parse_over(text: &str, base: Self) -> Result<Self> {
        let trimmed = text.trim_start();
        let config: Self = if trimmed.starts_with('{') {
            let mut merged = serde_json::to_value(&base)?;
            let given: serde_json::Value = serde_json::from_str(trimmed)?;
            let serde_json::Value::Object(given) = given else {
                return Err(Error::InvalidInput("config must be a JSON object".into()));
            };
            for (key, value) in given {
                let key = if key == "seed" { "master_seed".to_string() } else { key };
                merged[key] = value;
            }
            serde_json::from_value(merged)?
        } else {
            let mut config = base;
            for (n, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    Error::InvalidInput(format!("line {}: expected key = value", n + 1))
                })?;
                config.set(key.trim(), value.trim())?;
            }
            config
        };
        config.validate()?;
        Ok(config)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::InvalidInput(format!("{key}: cannot parse `{v}`")))
        }
        match key {
            "trials" => self.trials = num(key, value)?,
            "master_seed" | "seed" => self.master_seed = num(key, value)?,
            "unbias_tol" => self.unbias_tol = num(key, value)?,
            "reg_tol" => self.reg_tol = num(key, value)?,
            "max_restarts" => self.max_restarts = num(key, value)?,
            "dim_range" => {
                self.dim_range = value
                    .trim_matches(|c| c == '{' || c == '}' || c == '[' || c == ']')
                    .split(',')
                    .map(|v| num(key, v.trim()))
                    .collect::<Result<_>>()?
            }
            other => return Err(Error::InvalidInput(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrialStatus {
    Ok,
    Degenerate,
    Unbounded,
    Failed,
}

impl TrialStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            TrialStatus::Ok => "ok",
            TrialStatus::Degenerate => "degenerate",
            TrialStatus::Unbounded => "unbounded",
            TrialStatus::Failed => "failed",
        }
    }
}

/// Objects a trial was run on, kept for dumping.
#[derive(Debug, Clone)]
pub struct TrialArtifacts {
    pub scheme: MeasurementScheme,
    pub target: Observable,
    pub rho_s: DensityOperator,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    /// Index of the RNG stream the trial was drawn from.
    pub attempt_index: usize,
    #[serde(rename = "d_S")]
    pub d_s: usize,
    #[serde(rename = "d_P")]
    pub d_p: usize,
    pub seed: u64,
    /// Dimension of the meter's zero eigenspace.
    pub kernel_dim: usize,
    pub status: TrialStatus,
    pub residual: f64,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub report: Option<TurReport>,
    /// `|ΔM² − (ΔA² + ΔN²)|`.
    pub variance_discrepancy: Option<f64>,
    /// Tolerance the discrepancy was checked against.
    pub variance_tolerance: Option<f64>,
    pub purification_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub artifacts: Option<Arc<TrialArtifacts>>,
}

impl TrialRecord {
    fn new(trial_index: usize, attempt_index: usize, seed: u64, d_s: usize, d_p: usize) -> Self {
        Self {
            trial_index,
            attempt_index,
            d_s,
            d_p,
            seed,
            kernel_dim: 0,
            status: TrialStatus::Failed,
            residual: f64::NAN,
            report: None,
            variance_discrepancy: None,
            variance_tolerance: None,
            purification_error: None,
            error: None,
            artifacts: None,
        }
    }

    pub fn satisfied(&self) -> Option<bool> {
        self.report.map(|r| r.satisfied)
    }

    /// A bound-checked record whose bound fails.
    pub fn violates(&self) -> bool {
        matches!(self.status, TrialStatus::Ok | TrialStatus::Unbounded)
            && self.report.is_some_and(|r| !r.satisfied)
    }
}

/// Allowed `|ΔM² − (ΔA² + ΔN²)|`. The split is exact for unbiased
/// schemes and degrades linearly with the unbiasedness residual.
pub fn variance_split_tolerance(meter_variance: f64, residual: f64, target_norm: f64) -> f64 {
    let scale = 1.0 + meter_variance;
    VARIANCE_SPLIT_TOL * scale + 10.0 * residual * scale * (1.0 + target_norm)
}

/// Runs the consistency checks every emitted record must pass, then the
/// bound itself, and fills in `record`.
fn evaluate(
    record: &mut TrialRecord,
    scheme: MeasurementScheme,
    target: Observable,
    rho_s: DensityOperator,
    opts: &BoundOptions,
) {
    let outcome = (|| -> Result<()> {
        record.kernel_dim = scheme.meter().projectors()[0].trace().re.round() as usize;
        let kraus = kraus_from_scheme(&scheme)?;
        let (_, purification) = purify_and_verify(&kraus, &rho_s)?;
        record.purification_error = Some(purification.max_error());

        let report = tur_bound_with_kraus(&scheme, &kraus, &target, &rho_s, opts);
        let split = variance_decomposition(&scheme, &target, &rho_s)?;
        record.residual = crate::measurement::unbiasedness_residual(&scheme, &target)?;
        let tol = variance_split_tolerance(
            split.meter_variance,
            record.residual,
            target.matrix().frobenius_norm(),
        );
        record.variance_discrepancy = Some(split.discrepancy);
        record.variance_tolerance = Some(tol);
        if split.discrepancy > tol {
            return Err(Error::InternalConsistency {
                check: "variance decomposition",
                error: split.discrepancy,
            });
        }
        let report = report?;
        record.status = if report.xi.is_unbounded() {
            TrialStatus::Unbounded
        } else {
            TrialStatus::Ok
        };
        record.report = Some(report);
        Ok(())
    })();
    match outcome {
        Ok(()) => {}
        Err(Error::Degenerate { .. }) => record.status = TrialStatus::Degenerate,
        Err(e) => {
            record.status = TrialStatus::Failed;
            record.error = Some(e.to_string());
        }
    }
    record.artifacts = Some(Arc::new(TrialArtifacts {
        scheme,
        target,
        rho_s,
    }));
}

/// One random trial: dimensions from `dim_range`, Hilbert-Schmidt `ρ_P`
/// and `ρ_S`, Haar `U`, and a zero-grounded GUE meter whose zero
/// eigenspace has a random dimension in `[d_S, d_S·d_P)`.
pub fn random_trial(config: &ExperimentConfig, index: usize) -> TrialRecord {
    let seed = trial_seed(config.master_seed, index as u64);
    let mut rng = trial_rng(config.master_seed, index as u64);
    let dims = &config.dim_range;
    let d_s = dims[rng.random_range(0..dims.len())];
    let d_p = dims[rng.random_range(0..dims.len())];
    let mut record = TrialRecord::new(index, index, seed, d_s, d_p);

    let d = d_s * d_p;
    let rho_p = random_density(d_p, &mut rng);
    let u = haar_unitary(d, &mut rng);
    let kernel = rng.random_range(d_s..d);
    let meter = random_meter_with_kernel(d, kernel, &mut rng);
    let rho_s = random_density(d_s, &mut rng);

    let scheme = match MeasurementScheme::new(d_s, d_p, u, meter, rho_p) {
        Ok(s) => s,
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    let target = match derive_unbiased_observable(&scheme) {
        Ok(a) => a,
        Err(e) => {
            record.error = Some(e.to_string());
            return record;
        }
    };
    evaluate(&mut record, scheme, target, rho_s, &config.bound_options());
    record
}

pub fn run_random_sweep(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    Ok((0..config.trials)
        .into_par_iter()
        .map(|i| random_trial(config, i))
        .collect())
}

/// `(I + σ_y)/2`, the fixed system state of the qubit experiments.
pub fn qubit_system_state() -> DensityOperator {
    DensityOperator::new((&ComplexMatrix::identity(2) + &pauli::y()).scale(0.5))
        .expect("fixed state is valid")
}

/// `σ_z/2 + I`, the fixed target of the qubit experiments.
pub fn qubit_target() -> Observable {
    Observable::new(&pauli::z().scale(0.5) + &ComplexMatrix::identity(2))
        .expect("fixed target is Hermitian")
}

/// Parametrisation of the tunable part of a qubit scheme: a Bloch vector
/// for `ρ_P` (squashed into the unit ball) and a rank-one probe meter
/// `m·|v⟩⟨v|` with `m ≥ 0`, so the meter `I ⊗ m|v⟩⟨v|` has a zero
/// eigenvalue by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitParams {
    pub bloch: [f64; 3],
    pub strength: f64,
    pub theta: f64,
    pub phi: f64,
}

impl QubitParams {
    pub const LEN: usize = 6;

    pub fn from_raw(x: &[f64]) -> Self {
        let w = [x[0], x[1], x[2]];
        let norm = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
        let squash = if norm > 0.0 { norm.tanh() / norm } else { 1.0 };
        // Softplus keeps the meter strength positive.
        let strength = if x[3] > 30.0 {
            x[3]
        } else {
            x[3].exp().ln_1p()
        };
        Self {
            bloch: [w[0] * squash, w[1] * squash, w[2] * squash],
            strength,
            theta: x[4],
            phi: x[5],
        }
    }

    pub fn probe_state_matrix(&self) -> ComplexMatrix {
        let [bx, by, bz] = self.bloch;
        let m = &(&ComplexMatrix::identity(2) + &pauli::x().scale(bx))
            + &(&pauli::y().scale(by) + &pauli::z().scale(bz));
        m.scale(0.5)
    }

    pub fn probe_meter_matrix(&self) -> ComplexMatrix {
        let v = [
            num_complex::Complex64::new(self.theta.cos(), 0.0),
            num_complex::Complex64::from_polar(self.theta.sin(), self.phi),
        ];
        ComplexMatrix::outer(&v, &v).scale(self.strength)
    }

    pub fn meter_matrix(&self) -> ComplexMatrix {
        tensor(&ComplexMatrix::identity(2), &self.probe_meter_matrix())
    }

    pub fn scheme(&self, u: &UnitaryOperator) -> Result<MeasurementScheme> {
        let meter = crate::quantum::shift_to_zero_ground(&Observable::new(self.meter_matrix())?);
        let rho_p = DensityOperator::from_computed(&self.probe_state_matrix())?;
        MeasurementScheme::new(2, 2, u.clone(), meter, rho_p)
    }
}

/// Unbiasedness residual of the qubit scheme `(u, params)` against `target`.
pub fn qubit_residual(u: &ComplexMatrix, target: &ComplexMatrix, raw: &[f64]) -> f64 {
    let p = QubitParams::from_raw(raw);
    let a = unbiased_matrix(u, &p.meter_matrix(), &p.probe_state_matrix(), 2, 2);
    a.distance(target)
}

#[derive(Debug, Clone)]
pub struct OptimizedScheme {
    pub scheme: MeasurementScheme,
    pub params: QubitParams,
    pub residual: f64,
    pub restarts: usize,
}

#[derive(Debug, Clone)]
pub enum SchemeSearch {
    Accepted(Box<OptimizedScheme>),
    Failed { best_residual: f64 },
}

fn random_start<R: Rng + ?Sized>(rng: &mut R) -> Vec<f64> {
    vec![
        rng.random_range(-1.5..1.5),
        rng.random_range(-1.5..1.5),
        rng.random_range(-1.5..1.5),
        rng.random_range(-1.0..3.0),
        rng.random_range(0.0..PI),
        rng.random_range(0.0..2.0 * PI),
    ]
}

/// Searches for `ρ_P` and a probe meter that make the qubit scheme with
/// interaction `u` unbiased for [`qubit_target`], minimising the residual
/// by Nelder-Mead from up to `max_restarts` random starts.
pub fn optimize_qubit_scheme<R: Rng + ?Sized>(
    u: &UnitaryOperator,
    rng: &mut R,
    config: &ExperimentConfig,
) -> Result<SchemeSearch> {
    u.matrix().ensure_dim(4)?;
    let target = qubit_target().matrix().clone();
    let nm = NelderMead {
        tol: 1e-9,
        max_iter: 4_000,
        initial_step: 0.3,
    };
    let mut best_residual = f64::INFINITY;
    for restart in 0..config.max_restarts {
        let start = random_start(rng);
        let found = nm.minimize_restarted(|x| qubit_residual(u.matrix(), &target, x), &start, 5)?;
        best_residual = best_residual.min(found.value);
        if found.value <= config.unbias_tol {
            let params = QubitParams::from_raw(&found.point);
            let scheme = params.scheme(u)?;
            let residual = crate::measurement::unbiasedness_residual(&scheme, &qubit_target())?;
            if residual <= config.unbias_tol {
                return Ok(SchemeSearch::Accepted(Box::new(OptimizedScheme {
                    scheme,
                    params,
                    residual,
                    restarts: restart + 1,
                })));
            }
        }
    }
    Ok(SchemeSearch::Failed { best_residual })
}

/// Outcome of a qubit sweep: one record per accepted scheme plus the
/// number of interactions for which no scheme was found.
#[derive(Debug, Clone)]
pub struct QubitSweep {
    pub records: Vec<TrialRecord>,
    pub attempts: usize,
    pub failures: usize,
}

impl QubitSweep {
    /// `max Ξ / min Ξ` over finite activities.
    pub fn xi_spread(&self) -> Option<f64> {
        let xs: Vec<f64> = self
            .records
            .iter()
            .filter_map(|r| r.report.and_then(|t| t.xi.finite()))
            .filter(|&x| x > 0.0)
            .collect();
        let max = xs.iter().cloned().fold(f64::NAN, f64::max);
        let min = xs.iter().cloned().fold(f64::NAN, f64::min);
        (!xs.is_empty()).then(|| max / min)
    }
}

fn qubit_attempt(config: &ExperimentConfig, attempt: usize) -> Option<TrialRecord> {
    let seed = trial_seed(config.master_seed, attempt as u64);
    let mut rng: TrialRng = trial_rng(config.master_seed, attempt as u64);
    let u = haar_unitary(4, &mut rng);
    let mut record = TrialRecord::new(0, attempt, seed, 2, 2);
    match optimize_qubit_scheme(&u, &mut rng, config) {
        Ok(SchemeSearch::Accepted(found)) => {
            evaluate(
                &mut record,
                found.scheme,
                qubit_target(),
                qubit_system_state(),
                &config.bound_options(),
            );
            Some(record)
        }
        Ok(SchemeSearch::Failed { .. }) => None,
        Err(e) => {
            record.error = Some(e.to_string());
            Some(record)
        }
    }
}

/// Draws Haar interactions until `config.trials` schemes have been
/// accepted. Attempts run in parallel batches but are consumed in index
/// order.
pub fn run_qubit_tradeoff(config: &ExperimentConfig) -> Result<QubitSweep> {
    config.validate()?;
    let mut records = Vec::with_capacity(config.trials);
    let mut failures = 0;
    let mut next = 0;
    let batch = rayon::current_num_threads().max(1) * 4;
    'outer: loop {
        let outcomes: Vec<Option<TrialRecord>> = (next..next + batch)
            .into_par_iter()
            .map(|a| qubit_attempt(config, a))
            .collect();
        for outcome in outcomes {
            next += 1;
            match outcome {
                Some(mut record) => {
                    record.trial_index = records.len();
                    records.push(record);
                    if records.len() == config.trials {
                        break 'outer;
                    }
                }
                None => failures += 1,
            }
        }
        if next >= config.trials.saturating_mul(1000).max(1000) {
            return Err(Error::InvalidInput(format!(
                "only {} of {} schemes found after {next} interactions",
                records.len(),
                config.trials
            )));
        }
    }
    Ok(QubitSweep {
        records,
        attempts: next,
        failures,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NdrRecord {
    pub trial: TrialRecord,
    /// `ΔN_A`.
    pub noise_std: f64,
    /// `ΔD_B`.
    pub disturbance_std: f64,
    /// `ΔN_A/ΔA`.
    pub noise_ratio_std: f64,
    /// `ΔD_B/ΔB`.
    pub disturbance_ratio: f64,
    pub noise_floor: Option<f64>,
    pub holds_additive: bool,
    pub holds_reciprocal: bool,
    pub ndr_slack: f64,
    /// `ΔN_A/ΔA ≥ floor − 1e-7`.
    pub floor_respected: bool,
}

impl NdrRecord {
    pub fn passes(&self) -> bool {
        self.holds_additive && self.holds_reciprocal && self.floor_respected
    }
}

#[derive(Debug, Clone)]
pub struct NdrSweep {
    pub records: Vec<NdrRecord>,
    pub attempts: usize,
    pub failures: usize,
    pub std_a: f64,
    pub std_b: f64,
    pub commutator_mean_abs: f64,
    pub cv_squared: f64,
}

impl NdrSweep {
    /// `|⟨[A,B]⟩|/(2ΔAΔB)`, the constant on the right of the reciprocal form.
    pub fn kappa(&self) -> f64 {
        self.commutator_mean_abs / (2.0 * self.std_a * self.std_b)
    }
}

/// Evaluates the noise-disturbance relation and the noise floor for one
/// accepted qubit scheme, with `b` as the disturbed observable.
pub fn ndr_record(trial: TrialRecord, b: &Observable) -> Result<NdrRecord> {
    let artifacts = trial
        .artifacts
        .clone()
        .ok_or_else(|| Error::InvalidInput("trial has no scheme".into()))?;
    let report = trial
        .report
        .ok_or_else(|| Error::InvalidInput("trial has no bound report".into()))?;
    let scheme = &artifacts.scheme;
    let rho_s = &artifacts.rho_s;
    let joint = scheme.joint_state(rho_s)?;
    let std_a = report.var_a.sqrt();
    let std_b = variance_of(b.matrix(), rho_s.matrix())?.sqrt();
    let noise_std = report.var_n.sqrt();
    let d_b = disturbance_operator(scheme.unitary(), b, scheme.d_s(), scheme.d_p())?;
    let disturbance_std = variance_of(&d_b, &joint)?.sqrt();
    let commutator = commutator_mean_abs(&artifacts.target, b, rho_s)?;
    let NdrCheck {
        holds_additive,
        holds_reciprocal,
        slack,
    } = ndr_check(noise_std, disturbance_std, std_a, std_b, commutator)?;
    let floor = match report.xi {
        Activity::Finite(xi) if xi > 0.0 => Some(noise_floor(xi, report.cv_squared)?),
        Activity::Finite(_) => None,
        Activity::Unbounded => Some(0.0),
    };
    let noise_ratio_std = noise_std / std_a;
    Ok(NdrRecord {
        trial,
        noise_std,
        disturbance_std,
        noise_ratio_std,
        disturbance_ratio: disturbance_std / std_b,
        noise_floor: floor,
        holds_additive,
        holds_reciprocal,
        ndr_slack: slack,
        floor_respected: floor.is_none_or(|f| noise_ratio_std >= f - FLOOR_TOL),
    })
}

/// Qubit schemes from [`run_qubit_tradeoff`]'s generator, each evaluated
/// against the noise-disturbance relation for `b` (σ_x when `None`).
pub fn run_ndr_sweep(config: &ExperimentConfig, b: Option<&Observable>) -> Result<NdrSweep> {
    let default_b = Observable::new(pauli::x())?;
    let b = b.unwrap_or(&default_b);
    b.matrix().ensure_dim(2)?;
    let sweep = run_qubit_tradeoff(config)?;
    let rho_s = qubit_system_state();
    let a = qubit_target();
    let var_a = variance_of(a.matrix(), rho_s.matrix())?;
    let mean_a = crate::quantum::mean_of(a.matrix(), rho_s.matrix())?;
    let records = sweep
        .records
        .into_iter()
        .filter(|t| t.report.is_some())
        .map(|t| ndr_record(t, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(NdrSweep {
        records,
        attempts: sweep.attempts,
        failures: sweep.failures,
        std_a: var_a.sqrt(),
        std_b: variance_of(b.matrix(), rho_s.matrix())?.sqrt(),
        commutator_mean_abs: commutator_mean_abs(&a, b, &rho_s)?,
        cv_squared: mean_a * mean_a / var_a,
    })
}
