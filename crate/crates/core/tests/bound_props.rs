//! Survival activity, the trade-off bound and the noise-disturbance
//! relation on random inputs.

use num_complex::Complex64;
use proptest::prelude::*;
use qmeter::bound::{bound_holds, tur_bound_with_kraus};
use qmeter::experiments::{run_random_sweep, ExperimentConfig};
use qmeter::linalg::{hermitian_eig, ComplexMatrix};
use qmeter::random::{haar_unitary, random_density, random_meter_with_kernel, trial_rng, TrialRng};
use qmeter::{
    derive_unbiased_observable, kraus_from_scheme, ndr_check, noise_floor, survival_activity,
    Activity, BoundOptions, DensityOperator, KrausOperator, KrausOutcome, KrausSet,
    MeasurementScheme,
};
use rand::Rng;

fn seeded() -> impl Strategy<Value = TrialRng> {
    any::<u64>().prop_map(|s| trial_rng(s, 0))
}

/// `tr[H⁻¹ρ]` by Gauss-Jordan elimination on `[H | ρ]`.
fn trace_of_solve(h: &ComplexMatrix, rho: &ComplexMatrix) -> f64 {
    let n = h.dim();
    let mut a: Vec<Vec<Complex64>> = (0..n)
        .map(|i| (0..2 * n).map(|j| if j < n { h[(i, j)] } else { rho[(i, j - n)] }).collect())
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x][col].norm().partial_cmp(&a[y][col].norm()).unwrap()).unwrap();
        a.swap(col, pivot);
        let p = a[col][col];
        for v in a[col].iter_mut() {
            *v /= p;
        }
        for row in 0..n {
            if row != col {
                let f = a[row][col];
                let pivot_row = a[col].clone();
                for (x, y) in a[row].iter_mut().zip(pivot_row) {
                    *x -= f * y;
                }
            }
        }
    }
    (0..n).map(|i| a[i][n + i].re).sum()
}

/// Two-outcome family `{√P, √(I − P)}` with `P = W diag(p) W†`.
fn commuting_family(w: &ComplexMatrix, p: &[f64]) -> KrausSet {
    let conj = |diag: Vec<f64>| w.matmul(&ComplexMatrix::from_diagonal(&diag)).matmul(&w.adjoint());
    let v0 = conj(p.iter().map(|x| x.sqrt()).collect());
    let v1 = conj(p.iter().map(|x| (1.0 - x).sqrt()).collect());
    KrausSet::new(
        p.len(),
        vec![
            KrausOutcome { eigenvalue: 0.0, operators: vec![KrausOperator::untagged(v0)] },
            KrausOutcome { eigenvalue: 1.0, operators: vec![KrausOperator::untagged(v1)] },
        ],
    )
    .unwrap()
}

fn random_scheme(rng: &mut TrialRng) -> (MeasurementScheme, DensityOperator) {
    let ds = rng.random_range(2..=4);
    let dp = rng.random_range(2..=4);
    let d = ds * dp;
    let rho_p = random_density(dp, rng);
    let u = haar_unitary(d, rng);
    let kernel = rng.random_range(ds..d);
    let meter = random_meter_with_kernel(d, kernel, rng);
    (MeasurementScheme::new(ds, dp, u, meter, rho_p).unwrap(), random_density(ds, rng))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn survival_activity_is_monotone_in_the_effect(mut rng in seeded(), d in 1usize..6) {
        let w = haar_unitary(d, &mut rng).matrix().clone();
        let p: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
        let q: Vec<f64> = p.iter().map(|x| x * rng.random_range(0.1..1.0)).collect();
        let rho = random_density(d, &mut rng);
        let big = survival_activity(&commuting_family(&w, &p), &rho, 1e-8).unwrap();
        let small = survival_activity(&commuting_family(&w, &q), &rho, 1e-8).unwrap();
        let (Activity::Finite(xb), Activity::Finite(xs)) = (big.xi, small.xi) else {
            return Err(TestCaseError::fail("regular effects gave unbounded activity"));
        };
        prop_assert!(xb <= xs + 1e-12 * (1.0 + xs));
        prop_assert!(xb >= 0.0);
    }

    #[test]
    fn every_regular_candidate_has_non_negative_activity(mut rng in seeded()) {
        let (scheme, rho) = random_scheme(&mut rng);
        let kraus = kraus_from_scheme(&scheme).unwrap();
        let found = survival_activity(&kraus, &rho, 1e-8).unwrap();
        let mut best = f64::INFINITY;
        for v in &kraus.outcomes()[0].operators {
            let effect = v.matrix.adjoint().matmul(&v.matrix).hermitian_part();
            if hermitian_eig(&effect).unwrap().values[0] < 1e-8 {
                continue;
            }
            let xi_l = trace_of_solve(&effect, rho.matrix()) - 1.0;
            prop_assert!(xi_l >= -1e-9);
            best = best.min(xi_l.max(0.0));
        }
        match found.xi {
            Activity::Finite(x) => prop_assert!((x - best).abs() <= 1e-7 * (1.0 + best)),
            Activity::Unbounded => prop_assert!(best.is_infinite()),
        }
    }

    #[test]
    fn target_and_meter_forms_of_the_bound_agree(mut rng in seeded()) {
        let (scheme, rho) = random_scheme(&mut rng);
        let a = derive_unbiased_observable(&scheme).unwrap();
        let kraus = kraus_from_scheme(&scheme).unwrap();
        let Ok(report) = tur_bound_with_kraus(&scheme, &kraus, &a, &rho, &BoundOptions::default()) else {
            return Ok(());
        };
        if let Activity::Finite(xi) = report.xi {
            let target_form = xi * (1.0 + report.noise_ratio) - report.cv_squared;
            let meter_form = xi * report.meter_ratio - 1.0;
            // meter_form = target_form / CV² under exact unbiasedness.
            prop_assert!((meter_form - target_form / report.cv_squared).abs() <= 1e-9 * (1.0 + meter_form.abs()));
            prop_assert!(report.satisfied && report.meter_satisfied);
            prop_assert_eq!(report.satisfied, bound_holds(report.lhs, report.rhs));
        }
    }
}

#[test]
fn ndr_forms_agree_on_random_tuples() {
    let mut rng = trial_rng(0x4d2, 0);
    let mut on_edge = 0;
    for i in 0..100_000 {
        let std_a: f64 = rng.random_range(0.01..3.0);
        let std_b = rng.random_range(0.01..3.0);
        let comm = rng.random_range(0.0..2.0 * std_a * std_b);
        let noise = rng.random_range(0.0..2.0);
        let dist = if i % 2 == 0 {
            rng.random_range(0.0..2.0)
        } else {
            // Near the edge of the reciprocal relation.
            let kappa = comm / (2.0 * std_a * std_b);
            let edge: f64 = ((1.0 + kappa) / (noise / std_a + 1.0) - 1.0).max(0.0) * std_b;
            on_edge += 1;
            edge * (1.0 + rng.random_range(-1e-3..1e-3))
        };
        let check = ndr_check(noise, dist, std_a, std_b, comm).unwrap();
        assert_eq!(check.holds_additive, check.holds_reciprocal, "{noise} {dist} {std_a} {std_b} {comm}");
    }
    assert_eq!(on_edge, 50_000);
}

#[test]
fn sweep_records_respect_the_noise_floor() {
    let config = ExperimentConfig { trials: 300, master_seed: 99, ..Default::default() };
    for r in run_random_sweep(&config).unwrap() {
        let Some(report) = r.report else { continue };
        if let Activity::Finite(xi) = report.xi {
            if xi > 0.0 {
                let floor = noise_floor(xi, report.cv_squared).unwrap();
                assert!(report.noise_ratio.sqrt() >= floor - 1e-7, "trial {}", r.trial_index);
            }
        }
    }
}
