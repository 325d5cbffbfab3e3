//! Indirect quantum measurement toolkit.
//!
//! A measurement scheme couples a system `S` to a probe `P` through a
//! unitary `U` and reads out a meter `M` on `S ⊗ P`. This crate extracts
//! the observable such a scheme is unbiased for, its noise operator and
//! its Kraus family on `S`, and evaluates the survival activity `Ξ` of
//! the zero-outcome block. With those it checks the trade-off
//!
//! ```text
//! Ξ · (1 + ΔN²/ΔA²) ≥ ⟨A⟩²/ΔA²
//! ```
//!
//! together with the noise-disturbance relation for an incompatible
//! observable, and drives randomized experiments that exercise both.

// Validation compares as `!(x <= tol)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bound;
pub mod error;
pub mod experiments;
pub mod linalg;
pub mod measurement;
pub mod optimize;
pub mod quantum;
pub mod random;
pub mod schema;

pub use bound::{
    commutator_mean_abs, disturbance_operator, ndr_check, ndr_frontier, noise_floor,
    survival_activity, tur_bound, Activity, BoundOptions, NdrCheck, TurReport,
};
pub use error::{Error, Result};
pub use linalg::{hermitian_eig, partial_trace, psd_inverse, tensor, ComplexMatrix, Subsystem};
pub use measurement::{
    derive_unbiased_observable, kraus_from_scheme, meter_statistics, noise_operator,
    post_measurement_state, purify_and_verify, unbiasedness_residual, MeasurementScheme,
    MeterMoments, PurificationReport, PurifiedRun,
};
pub use quantum::{
    expectation, shift_to_zero_ground, variance, DensityOperator, KrausOperator, KrausOutcome,
    KrausSet, Observable, UnitaryOperator,
};
