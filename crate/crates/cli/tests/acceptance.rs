//! Acceptance suite. Prints one line per criterion and fails if any does.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use qmeter::experiments::{
    random_trial, run_ndr_sweep, run_qubit_tradeoff, run_random_sweep, ExperimentConfig,
    TrialRecord, TrialStatus,
};
use qmeter::linalg::{partial_trace, tensor, ComplexMatrix, Subsystem};
use qmeter::measurement::{heisenberg_moments, meter_moments_from_kraus, variance_decomposition};
use qmeter::random::{ginibre, haar_unitary, random_density, trial_rng};
use qmeter::{
    kraus_from_scheme, ndr_check, ndr_frontier, noise_floor, post_measurement_state,
    purify_and_verify, Activity,
};

const SEED: u64 = 271_828;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict { passed, detail: detail.into() }
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn ok_records(records: &[TrialRecord]) -> impl Iterator<Item = &TrialRecord> {
    records.iter().filter(|r| r.status == TrialStatus::Ok)
}

#[allow(clippy::neg_cmp_op_on_partial_ord)]
fn main_bound(sweep: &[TrialRecord], seconds: f64) -> Verdict {
    let ok: Vec<_> = ok_records(sweep).collect();
    let failing = ok
        .iter()
        .filter(|r| {
            let t = r.report.unwrap();
            !(t.lhs >= t.rhs * (1.0 - 1e-7) - 1e-9)
        })
        .count();
    let statuses = sweep.iter().fold(BTreeMap::new(), |mut m, r| {
        *m.entry(r.status.as_str()).or_insert(0) += 1;
        m
    });
    let min_ratio = ok
        .iter()
        .map(|r| r.report.unwrap())
        .map(|t| t.lhs / t.rhs)
        .fold(f64::INFINITY, f64::min);
    verdict(
        sweep.len() == 1000 && !ok.is_empty() && failing == 0 && seconds < 60.0,
        format!(
            "{} of {} ok records satisfy the bound, statuses {statuses:?}, min lhs/rhs {min_ratio:.4}, {seconds:.1} s single-threaded",
            ok.len() - failing,
            ok.len()
        ),
    )
}

fn qubit_tradeoff(sweep: &qmeter::experiments::QubitSweep, seconds: f64) -> Verdict {
    let mut bad = 0;
    let mut worst_residual = 0.0f64;
    let mut worst_cv = 0.0f64;
    for r in &sweep.records {
        let Some(t) = r.report else {
            bad += 1;
            continue;
        };
        worst_residual = worst_residual.max(r.residual);
        worst_cv = worst_cv.max((t.cv_squared - 4.0).abs());
        let holds = match t.xi {
            Activity::Finite(xi) => t.one_plus_noise_ratio() >= t.cv_squared / xi - 1e-7,
            Activity::Unbounded => true,
        };
        if !(r.residual <= 1e-5 && (t.cv_squared - 4.0).abs() <= 1e-9 && holds) {
            bad += 1;
        }
    }
    let spread = sweep.xi_spread().unwrap_or(f64::NAN);
    verdict(
        sweep.records.len() == 100 && bad == 0 && seconds < 300.0,
        format!(
            "{} accepted from {} interactions ({} without a scheme), max residual {worst_residual:.1e}, max |cv2 - 4| {worst_cv:.1e}, xi spread {spread:.1}, {seconds:.1} s",
            sweep.records.len(),
            sweep.attempts,
            sweep.failures
        ),
    )
}

fn proof_consistency() -> Verdict {
    let config = ExperimentConfig { trials: 200, master_seed: SEED ^ 3, ..Default::default() };
    let mut worst = 0.0f64;
    let mut errors = 0;
    for i in 0..200 {
        let r = random_trial(&config, i);
        let art = r.artifacts.unwrap();
        let kraus = kraus_from_scheme(&art.scheme).unwrap();
        match purify_and_verify(&kraus, &art.rho_s) {
            Ok((run, _)) => {
                let m = meter_moments_from_kraus(&kraus, &art.rho_s).unwrap();
                let post = post_measurement_state(&kraus, &art.rho_s).unwrap();
                worst = worst
                    .max((run.meter_prime_mean() - m.mean).abs())
                    .max((run.meter_prime_variance() - m.variance).abs())
                    .max(run.reduced_system_state().distance(post.matrix()));
            }
            Err(_) => errors += 1,
        }
    }
    verdict(errors == 0 && worst <= 1e-9, format!("200 schemes, max purification error {worst:.1e}"))
}

fn variance_split(random: &[TrialRecord], qubit: &[TrialRecord]) -> Verdict {
    let mut checked = 0;
    let mut worst = 0.0f64;
    for r in random.iter().chain(qubit) {
        let Some(art) = &r.artifacts else { continue };
        let split = variance_decomposition(&art.scheme, &art.target, &art.rho_s).unwrap();
        worst = worst.max(split.discrepancy / (1.0 + split.meter_variance));
        checked += 1;
    }
    verdict(
        checked == random.len() + qubit.len() && worst <= 1e-9,
        format!("{checked} schemes, max discrepancy / (1 + var M) {worst:.1e}"),
    )
}

fn ndr(sweep: &qmeter::experiments::NdrSweep) -> Verdict {
    let all = sweep
        .records
        .iter()
        .all(|r| r.holds_additive && r.holds_reciprocal && r.ndr_slack >= 0.0);
    // A = σ_x, B = σ_y on |0⟩: ΔA = ΔB = 1 and |⟨[A,B]⟩| = 2.
    let below = ndr_check(0.0, 1.0 - 1e-6, 1.0, 1.0, 2.0).unwrap();
    let at = ndr_check(0.0, 1.0, 1.0, 1.0, 2.0).unwrap();
    let forced = !below.holds_additive && !below.holds_reciprocal && at.holds_additive && at.holds_reciprocal;
    let edge = ndr_frontier(0.0, 1.0) == 1.0;
    let min_slack = sweep.records.iter().map(|r| r.ndr_slack).fold(f64::INFINITY, f64::min);
    verdict(
        sweep.records.len() == 100 && all && forced && edge,
        format!(
            "{} records hold in both forms (min slack {min_slack:.3}); zero noise forces disturbance >= 1: {forced}",
            sweep.records.len()
        ),
    )
}

fn floor(sweep: &qmeter::experiments::NdrSweep) -> Verdict {
    let mut checked = 0;
    let mut ok = true;
    for r in &sweep.records {
        let t = r.trial.report.unwrap();
        if let Activity::Finite(xi) = t.xi {
            if xi > 0.0 && xi < t.cv_squared {
                checked += 1;
                ok &= r.noise_ratio_std >= (t.cv_squared / xi - 1.0).sqrt() - 1e-7;
            }
        }
    }
    let spot2 = noise_floor(2.0, 4.0).unwrap();
    let spot1 = noise_floor(1.0, 4.0).unwrap();
    let spots = (spot2 - 1.0).abs() < 1e-15 && (spot1 - 3f64.sqrt()).abs() < 1e-15;
    verdict(
        ok && spots,
        format!("{checked} records with xi < cv2 above their floor; floor(2, 4) = {spot2}, floor(1, 4) = {spot1:.15}"),
    )
}

fn kron_loops(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (na, nb) = (a.dim(), b.dim());
    let mut out = ComplexMatrix::zeros(na * nb);
    for i in 0..na {
        for j in 0..na {
            for k in 0..nb {
                for m in 0..nb {
                    out[(i * nb + k, j * nb + m)] = a[(i, j)] * b[(k, m)];
                }
            }
        }
    }
    out
}

fn trace_loops(x: &ComplexMatrix, ds: usize, dp: usize) -> (ComplexMatrix, ComplexMatrix) {
    let mut s = ComplexMatrix::zeros(ds);
    let mut p = ComplexMatrix::zeros(dp);
    for a in 0..ds {
        for b in 0..ds {
            for c in 0..dp {
                s[(a, b)] += x[(a * dp + c, b * dp + c)];
            }
        }
    }
    for c in 0..dp {
        for e in 0..dp {
            for a in 0..ds {
                p[(c, e)] += x[(a * dp + c, a * dp + e)];
            }
        }
    }
    (s, p)
}

fn oracles() -> Verdict {
    let config = ExperimentConfig { trials: 500, master_seed: SEED ^ 7, ..Default::default() };
    let mut moments = 0.0f64;
    for i in 0..500 {
        let art = random_trial(&config, i).artifacts.unwrap();
        let kraus = kraus_from_scheme(&art.scheme).unwrap();
        let a = meter_moments_from_kraus(&kraus, &art.rho_s).unwrap();
        let b = heisenberg_moments(&art.scheme, &art.rho_s).unwrap();
        moments = moments.max((a.mean - b.mean).abs()).max((a.variance - b.variance).abs());
    }
    let mut rng = trial_rng(SEED, 11);
    let mut index = 0.0f64;
    for i in 0..1000 {
        let (ds, dp) = (1 + i % 5, 1 + (i / 5) % 5);
        let (a, b) = (ginibre(ds, &mut rng), ginibre(dp, &mut rng));
        index = index.max(tensor(&a, &b).distance(&kron_loops(&a, &b)));
        let x = ginibre(ds * dp, &mut rng);
        let (s, p) = trace_loops(&x, ds, dp);
        index = index
            .max(partial_trace(&x, (ds, dp), Subsystem::System).unwrap().distance(&s))
            .max(partial_trace(&x, (ds, dp), Subsystem::Probe).unwrap().distance(&p));
    }
    verdict(
        moments <= 1e-9 && index <= 1e-12,
        format!("500 schemes, max moment gap {moments:.1e}; 1000 tensor/partial-trace instances, max gap {index:.1e}"),
    )
}

fn generators() -> Verdict {
    const N: usize = 10_000;
    let mut rng = trial_rng(SEED, 21);
    let haar = (0..N).map(|_| haar_unitary(2, &mut rng).matrix()[(0, 0)].norm_sqr()).sum::<f64>() / N as f64;
    let purity = (0..N).map(|_| random_density(2, &mut rng).purity()).sum::<f64>() / N as f64;
    verdict(
        (haar - 0.5).abs() < 0.02 && (purity - 0.8).abs() < 0.02,
        format!("mean |U00|^2 = {haar:.4} (0.5), mean purity = {purity:.4} (0.8)"),
    )
}

fn read_tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Verdict {
    let tmp = std::env::temp_dir().join(format!("qmeter-acceptance-{}", std::process::id()));
    let _ = fs::remove_dir_all(&tmp);
    fs::create_dir_all(&tmp).unwrap();
    let runs: [(&str, Vec<&str>); 5] = [
        ("random-sweep", vec!["random-sweep", "--trials", "200", "--seed", "42", "--dump"]),
        ("random-sweep-json", vec!["random-sweep", "--trials", "50", "--format", "json"]),
        ("qubit-tradeoff", vec!["qubit-tradeoff", "--trials", "10", "--seed", "7", "--dump"]),
        ("ndr", vec!["ndr", "--trials", "10", "--xi", "2", "--xi", "1"]),
        (
            "verify",
            vec!["verify", "../qubit-tradeoff-0/schemes/trial_0000.scheme.json", "../qubit-tradeoff-0/schemes/trial_0000.state.json"],
        ),
    ];
    let mut notes = Vec::new();
    let mut all = true;
    for (name, args) in &runs {
        let mut trees = Vec::new();
        let mut stdouts = Vec::new();
        for k in 0..2 {
            let out = format!("{name}-{k}");
            let dir = tmp.join(format!("cwd-{name}-{k}"));
            fs::create_dir_all(&dir).unwrap();
            let mut full: Vec<String> = args.iter().map(|s| s.to_string()).collect();
            full.extend(["--out".into(), format!("../{out}")]);
            let o = Command::new(env!("CARGO_BIN_EXE_qmeter"))
                .args(&full)
                .current_dir(&dir)
                .env_remove("QMETER_SEED")
                .env("SOURCE_DATE_EPOCH", "1700000000")
                .output()
                .unwrap();
            all &= o.status.code() == Some(0);
            stdouts.push(o.stdout);
            trees.push(read_tree(&tmp.join(out)));
        }
        let same = trees[0] == trees[1] && stdouts[0] == stdouts[1] && !trees[0].is_empty();
        all &= same;
        notes.push(format!("{name} {} files {}", trees[0].len(), if same { "identical" } else { "DIFFER" }));
    }
    let _ = fs::remove_dir_all(&tmp);
    verdict(all, notes.join(", "))
}

fn main() {
    let mut results: Vec<(usize, &str, Verdict)> = Vec::new();

    let config = ExperimentConfig { trials: 1000, master_seed: SEED, ..Default::default() };
    let t = Instant::now();
    let random = single_threaded(|| run_random_sweep(&config).unwrap());
    results.push((1, "main trade-off bound on random schemes", main_bound(&random, t.elapsed().as_secs_f64())));

    let qconfig = ExperimentConfig { trials: 100, master_seed: SEED, ..Default::default() };
    let t = Instant::now();
    let qubit = run_qubit_tradeoff(&qconfig).unwrap();
    results.push((2, "qubit trade-off", qubit_tradeoff(&qubit, t.elapsed().as_secs_f64())));

    results.push((3, "purification consistency", proof_consistency()));
    results.push((4, "variance decomposition", variance_split(&random, &qubit.records)));

    let ndr_sweep = run_ndr_sweep(&qconfig, None).unwrap();
    results.push((5, "noise-disturbance relation", ndr(&ndr_sweep)));
    results.push((6, "noise floor", floor(&ndr_sweep)));
    results.push((7, "oracle equivalences", oracles()));
    results.push((8, "generator statistics", generators()));
    results.push((9, "CLI determinism", determinism()));

    let mut failed = 0;
    for (n, name, v) in &results {
        let mark = if v.passed { "PASS" } else { "FAIL" };
        println!("criterion {n} [{mark}] {name}: {}", v.detail);
        failed += usize::from(!v.passed);
    }
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
