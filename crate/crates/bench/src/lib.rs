//! Fixtures shared by the benchmarks.

use qmeter::experiments::{qubit_system_state, qubit_target, ExperimentConfig};
use qmeter::linalg::ComplexMatrix;
use qmeter::random::{ginibre, haar_unitary, random_density, random_meter_with_kernel, trial_rng};
use qmeter::{DensityOperator, MeasurementScheme, Observable};

pub const SEED: u64 = 0xbe7c;

pub fn hermitian(d: usize) -> ComplexMatrix {
    ginibre(d, &mut trial_rng(SEED, d as u64)).hermitian_part()
}

/// A random scheme with `d_S = d_P = d` and half the joint space in the
/// meter's kernel, plus a system state.
pub fn scheme(d: usize) -> (MeasurementScheme, DensityOperator) {
    let mut rng = trial_rng(SEED, 100 + d as u64);
    let n = d * d;
    let rho_p = random_density(d, &mut rng);
    let u = haar_unitary(n, &mut rng);
    let meter = random_meter_with_kernel(n, n / 2, &mut rng);
    let rho_s = random_density(d, &mut rng);
    (MeasurementScheme::new(d, d, u, meter, rho_p).unwrap(), rho_s)
}

pub fn qubit_pair() -> (Observable, DensityOperator) {
    (qubit_target(), qubit_system_state())
}

pub fn quick_config() -> ExperimentConfig {
    ExperimentConfig { trials: 1, max_restarts: 50, ..Default::default() }
}
