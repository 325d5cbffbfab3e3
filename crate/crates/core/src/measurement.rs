//! Indirect measurement schemes `(U, M, ρ_P)`: the observable they are
//! unbiased for, their noise operator, the induced Kraus family on the
//! system, and the purified (Naimark) picture of the same measurement.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{partial_trace, tensor, ComplexMatrix, Subsystem, ZERO};
use crate::quantum::{
    completeness_residual, mean_of, variance_of, DensityOperator, KrausOperator, KrausOutcome,
    KrausSet, Observable, UnitaryOperator, COMPLETENESS_TOL, UNITARY_TOL,
};

/// Tolerance on the lowest meter eigenvalue.
pub const ZERO_GROUND_TOL: f64 = 1e-10;
/// Kraus operators with a smaller Frobenius norm are dropped.
pub const KRAUS_DROP_TOL: f64 = 1e-12;
/// Tolerance for the purified-picture consistency checks.
pub const PURIFICATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct MeasurementScheme {
    d_s: usize,
    d_p: usize,
    unitary: UnitaryOperator,
    meter: Observable,
    probe_state: DensityOperator,
    probe_basis: ComplexMatrix,
}

impl MeasurementScheme {
    /// Scheme with the computational basis as probe basis.
    pub fn new(
        d_s: usize,
        d_p: usize,
        unitary: UnitaryOperator,
        meter: Observable,
        probe_state: DensityOperator,
    ) -> Result<Self> {
        Self::with_probe_basis(d_s, d_p, unitary, meter, probe_state, ComplexMatrix::identity(d_p))
    }

    /// `probe_basis` holds the basis vectors `|ψ_j⟩` as columns.
    pub fn with_probe_basis(
        d_s: usize,
        d_p: usize,
        unitary: UnitaryOperator,
        meter: Observable,
        probe_state: DensityOperator,
        probe_basis: ComplexMatrix,
    ) -> Result<Self> {
        if d_s == 0 || d_p == 0 {
            return Err(Error::InvalidInput("dimensions must be positive".into()));
        }
        let d = d_s * d_p;
        unitary.matrix().ensure_dim(d).map_err(|e| e.at("U"))?;
        meter.matrix().ensure_dim(d).map_err(|e| e.at("M"))?;
        probe_state.matrix().ensure_dim(d_p).map_err(|e| e.at("rho_P"))?;
        probe_basis.ensure_dim(d_p).map_err(|e| e.at("probe_basis"))?;
        let min = meter.min_eigenvalue();
        if min.abs() > ZERO_GROUND_TOL {
            return Err(Error::NotZeroGrounded { min_eigenvalue: min }.at("M"));
        }
        let basis_residual = probe_basis
            .adjoint()
            .matmul(&probe_basis)
            .distance(&ComplexMatrix::identity(d_p));
        if basis_residual > UNITARY_TOL {
            return Err(Error::NotUnitary {
                residual: basis_residual,
            }
            .at("probe_basis"));
        }
        Ok(Self {
            d_s,
            d_p,
            unitary,
            meter,
            probe_state,
            probe_basis,
        })
    }

    pub fn d_s(&self) -> usize {
        self.d_s
    }

    pub fn d_p(&self) -> usize {
        self.d_p
    }

    pub fn unitary(&self) -> &UnitaryOperator {
        &self.unitary
    }

    pub fn meter(&self) -> &Observable {
        &self.meter
    }

    pub fn probe_state(&self) -> &DensityOperator {
        &self.probe_state
    }

    pub fn probe_basis(&self) -> &ComplexMatrix {
        &self.probe_basis
    }

    pub fn with_basis(&self, basis: ComplexMatrix) -> Result<Self> {
        Self::with_probe_basis(
            self.d_s,
            self.d_p,
            self.unitary.clone(),
            self.meter.clone(),
            self.probe_state.clone(),
            basis,
        )
    }

    /// `U† M U` on `S ⊗ P`.
    pub fn evolved_meter(&self) -> ComplexMatrix {
        self.unitary.heisenberg(self.meter.matrix())
    }

    /// `ρ_S ⊗ ρ_P`.
    pub fn joint_state(&self, rho_s: &DensityOperator) -> Result<ComplexMatrix> {
        self.check_system(rho_s)?;
        Ok(tensor(rho_s.matrix(), self.probe_state.matrix()))
    }

    fn check_system(&self, rho_s: &DensityOperator) -> Result<()> {
        rho_s.matrix().ensure_dim(self.d_s)
    }

    fn lift(&self, a: &ComplexMatrix) -> ComplexMatrix {
        tensor(a, &ComplexMatrix::identity(self.d_p))
    }
}

/// `A = tr_P[U†MU (I_S ⊗ ρ_P)]`, the unique observable the scheme is
/// unbiased for.
pub fn derive_unbiased_observable(scheme: &MeasurementScheme) -> Result<Observable> {
    let a = unbiased_matrix(
        scheme.unitary.matrix(),
        scheme.meter.matrix(),
        scheme.probe_state.matrix(),
        scheme.d_s,
        scheme.d_p,
    );
    Observable::new(a)
}

/// Matrix form of [`derive_unbiased_observable`] without the spectral
/// decomposition; dimensions are the caller's responsibility.
pub fn unbiased_matrix(
    u: &ComplexMatrix,
    meter: &ComplexMatrix,
    rho_p: &ComplexMatrix,
    d_s: usize,
    d_p: usize,
) -> ComplexMatrix {
    let evolved = u.adjoint().matmul(meter).matmul(u);
    // tr_P[X (I ⊗ ρ_P)]_{ab} = Σ_{c,e} X_{(a,c),(b,e)} ρ_P[e][c]
    ComplexMatrix::from_fn(d_s, |a, b| {
        let mut acc = ZERO;
        for c in 0..d_p {
            for e in 0..d_p {
                acc += evolved[(a * d_p + c, b * d_p + e)] * rho_p[(e, c)];
            }
        }
        acc
    })
    .hermitian_part()
}

/// Frobenius distance between `a` and the observable the scheme is
/// unbiased for.
pub fn unbiasedness_residual(scheme: &MeasurementScheme, a: &Observable) -> Result<f64> {
    a.matrix().ensure_dim(scheme.d_s)?;
    let derived = derive_unbiased_observable(scheme)?;
    Ok(a.matrix().distance(derived.matrix()))
}

/// `N = U†MU − A ⊗ I_P`.
pub fn noise_operator(scheme: &MeasurementScheme, a: &Observable) -> Result<ComplexMatrix> {
    a.matrix().ensure_dim(scheme.d_s)?;
    Ok(&scheme.evolved_meter() - &scheme.lift(a.matrix()))
}

/// Kraus operators `V_{k,(j,m)} = √q_m ⟨ψ_j| Π_k U |φ_m⟩` grouped by meter
/// outcome, where `ρ_P = Σ_m q_m |φ_m⟩⟨φ_m|`.
pub fn kraus_from_scheme(scheme: &MeasurementScheme) -> Result<KrausSet> {
    let (ds, dp) = (scheme.d_s, scheme.d_p);
    let spectrum = scheme.probe_state.spectrum();
    let u = scheme.unitary.matrix();

    let mut all = Vec::new();
    for (&r, proj) in scheme.meter.eigenvalues().iter().zip(scheme.meter.projectors()) {
        let x = proj.matmul(u);
        let mut ops = Vec::new();
        for j in 0..dp {
            let psi = scheme.probe_basis.column(j);
            for (m, &q) in spectrum.values.iter().enumerate() {
                if q <= 0.0 {
                    continue;
                }
                let phi = spectrum.vector(m);
                let w = q.sqrt();
                let v = ComplexMatrix::from_fn(ds, |a, b| {
                    let mut acc = ZERO;
                    for c in 0..dp {
                        let row = a * dp + c;
                        let mut inner = ZERO;
                        for e in 0..dp {
                            inner += x[(row, b * dp + e)] * phi[e];
                        }
                        acc += psi[c].conj() * inner;
                    }
                    acc * w
                });
                ops.push(KrausOperator {
                    probe_index: j,
                    state_index: m,
                    matrix: v,
                });
            }
        }
        all.push((r, ops));
    }

    let residual = completeness_residual(ds, all.iter().flat_map(|(_, o)| o.iter().map(|v| &v.matrix)));
    if residual > COMPLETENESS_TOL {
        return Err(Error::InternalConsistency {
            check: "Kraus completeness",
            error: residual,
        });
    }

    let outcomes = all
        .into_iter()
        .map(|(eigenvalue, ops)| KrausOutcome {
            eigenvalue,
            operators: ops
                .into_iter()
                .filter(|v| v.matrix.frobenius_norm() >= KRAUS_DROP_TOL)
                .collect(),
        })
        .collect();
    KrausSet::new(ds, outcomes)
}

/// `Σ V ρ V†` over the whole family.
pub fn post_measurement_state(kraus: &KrausSet, rho_s: &DensityOperator) -> Result<DensityOperator> {
    rho_s.matrix().ensure_dim(kraus.dim())?;
    let mut out = ComplexMatrix::zeros(kraus.dim());
    for (_, v) in kraus.iter() {
        out = &out + &v.matrix.matmul(rho_s.matrix()).matmul(&v.matrix.adjoint());
    }
    DensityOperator::from_computed(&out)
}

/// `tr_P[Σ_k Π_k U (ρ_S ⊗ ρ_P) U† Π_k]`, evaluated on the full space.
pub fn post_measurement_full_space(
    scheme: &MeasurementScheme,
    rho_s: &DensityOperator,
) -> Result<DensityOperator> {
    let joint = scheme.joint_state(rho_s)?;
    let u = scheme.unitary.matrix();
    let evolved = u.matmul(&joint).matmul(&u.adjoint());
    let mut out = ComplexMatrix::zeros(joint.dim());
    for p in scheme.meter.projectors() {
        out = &out + &p.matmul(&evolved).matmul(p);
    }
    let reduced = partial_trace(&out, (scheme.d_s, scheme.d_p), Subsystem::System)?;
    DensityOperator::from_computed(&reduced)
}

/// Mean and variance of the meter readout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeterMoments {
    pub mean: f64,
    pub variance: f64,
}

/// Meter moments from the Kraus family:
/// `⟨M⟩ = Σ r_k tr[V†V ρ]`, `ΔM² = Σ r_k² tr[V†V ρ] − ⟨M⟩²`.
pub fn meter_moments_from_kraus(kraus: &KrausSet, rho_s: &DensityOperator) -> Result<MeterMoments> {
    rho_s.matrix().ensure_dim(kraus.dim())?;
    let (mut first, mut second) = (0.0, 0.0);
    for outcome in kraus.outcomes() {
        let r = outcome.eigenvalue;
        let p: f64 = outcome
            .operators
            .iter()
            .map(|v| v.matrix.adjoint().matmul(&v.matrix).trace_product(rho_s.matrix()).re)
            .sum();
        first += r * p;
        second += r * r * p;
    }
    Ok(MeterMoments {
        mean: first,
        variance: (second - first * first).max(0.0),
    })
}

pub fn meter_statistics(scheme: &MeasurementScheme, rho_s: &DensityOperator) -> Result<MeterMoments> {
    meter_moments_from_kraus(&kraus_from_scheme(scheme)?, rho_s)
}

/// Moments of `U†MU` on `ρ_S ⊗ ρ_P`, computed on the full space.
pub fn heisenberg_moments(scheme: &MeasurementScheme, rho_s: &DensityOperator) -> Result<MeterMoments> {
    let joint = scheme.joint_state(rho_s)?;
    let evolved = scheme.evolved_meter();
    Ok(MeterMoments {
        mean: mean_of(&evolved, &joint)?,
        variance: variance_of(&evolved, &joint)?,
    })
}

/// `ΔN²` of the noise operator on `ρ_S ⊗ ρ_P`.
pub fn noise_variance(
    scheme: &MeasurementScheme,
    a: &Observable,
    rho_s: &DensityOperator,
) -> Result<f64> {
    variance_of(&noise_operator(scheme, a)?, &scheme.joint_state(rho_s)?)
}

/// Result of splitting the meter variance into signal and noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceSplit {
    pub meter_variance: f64,
    pub target_variance: f64,
    pub noise_variance: f64,
    /// `|ΔM² − (ΔA² + ΔN²)|`.
    pub discrepancy: f64,
}

pub fn variance_decomposition(
    scheme: &MeasurementScheme,
    a: &Observable,
    rho_s: &DensityOperator,
) -> Result<VarianceSplit> {
    let joint = scheme.joint_state(rho_s)?;
    let meter_variance = variance_of(&scheme.evolved_meter(), &joint)?;
    let target_variance = variance_of(a.matrix(), rho_s.matrix())?;
    let noise_variance = variance_of(&noise_operator(scheme, a)?, &joint)?;
    Ok(VarianceSplit {
        meter_variance,
        target_variance,
        noise_variance,
        discrepancy: (meter_variance - target_variance - noise_variance).abs(),
    })
}

/// The measurement rewritten as a pure state on `S ⊗ S̄ ⊗ Q` with a
/// meter `M' = Σ r_k |k,l⟩⟨k,l|` that acts on `Q` alone.
#[derive(Debug, Clone)]
pub struct PurifiedRun {
    d_s: usize,
    /// Amplitudes indexed as `((a·d_S + μ)·|Q| + q)`.
    pub psi: Vec<Complex64>,
    /// Eigenvalue of `M'` on each basis vector `|k,l⟩` of `Q`.
    pub meter_prime_eigenvalues: Vec<f64>,
    /// `(k, j, m)` labels of each `|k,l⟩`, `l = (j, m)`.
    pub block_index: Vec<(usize, usize, usize)>,
}

impl PurifiedRun {
    fn q_dim(&self) -> usize {
        self.block_index.len()
    }

    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Weight `⟨Ψ| I ⊗ |k,l⟩⟨k,l| |Ψ⟩` of each ancilla basis vector.
    fn block_weights(&self) -> Vec<f64> {
        let nq = self.q_dim();
        let mut w = vec![0.0; nq];
        for (i, z) in self.psi.iter().enumerate() {
            w[i % nq] += z.norm_sqr();
        }
        w
    }

    pub fn meter_prime_mean(&self) -> f64 {
        self.block_weights()
            .iter()
            .zip(&self.meter_prime_eigenvalues)
            .map(|(w, r)| w * r)
            .sum()
    }

    pub fn meter_prime_variance(&self) -> f64 {
        let mean = self.meter_prime_mean();
        let second: f64 = self
            .block_weights()
            .iter()
            .zip(&self.meter_prime_eigenvalues)
            .map(|(w, r)| w * r * r)
            .sum();
        (second - mean * mean).max(0.0)
    }

    /// `tr_{S̄,Q} |Ψ⟩⟨Ψ|`.
    pub fn reduced_system_state(&self) -> ComplexMatrix {
        let ds = self.d_s;
        let inner = ds * self.q_dim();
        ComplexMatrix::from_fn(ds, |a, b| {
            (0..inner)
                .map(|t| self.psi[a * inner + t] * self.psi[b * inner + t].conj())
                .sum()
        })
    }
}

/// Errors of the purified picture against the Kraus-sum quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PurificationReport {
    pub norm_error: f64,
    pub mean_error: f64,
    pub variance_error: f64,
    pub state_error: f64,
}

impl PurificationReport {
    pub fn max_error(&self) -> f64 {
        self.norm_error
            .max(self.mean_error)
            .max(self.variance_error)
            .max(self.state_error)
    }
}

/// Builds `|Ψ⟩ = Σ √λ_μ (V_{k,l}|μ⟩) ⊗ |μ̄⟩ ⊗ |k,l⟩` and checks that `M'`
/// on it reproduces the meter mean and variance and that its reduced
/// state is the post-measurement state.
pub fn purify_and_verify(
    kraus: &KrausSet,
    rho_s: &DensityOperator,
) -> Result<(PurifiedRun, PurificationReport)> {
    let ds = kraus.dim();
    rho_s.matrix().ensure_dim(ds)?;
    let spectrum = rho_s.spectrum();

    let mut meter_prime_eigenvalues = Vec::with_capacity(kraus.len());
    let mut block_index = Vec::with_capacity(kraus.len());
    let mut images = Vec::with_capacity(kraus.len());
    for (k, outcome) in kraus.outcomes().iter().enumerate() {
        for v in &outcome.operators {
            meter_prime_eigenvalues.push(outcome.eigenvalue);
            block_index.push((k, v.probe_index, v.state_index));
            // Columns of V·[|μ⟩] for every μ.
            images.push(v.matrix.matmul(&spectrum.vectors));
        }
    }
    let nq = images.len();
    let mut psi = vec![ZERO; ds * ds * nq];
    for (mu, &lambda) in spectrum.values.iter().enumerate() {
        if lambda <= 0.0 {
            continue;
        }
        let w = lambda.sqrt();
        for (q, img) in images.iter().enumerate() {
            for a in 0..ds {
                psi[(a * ds + mu) * nq + q] = img[(a, mu)] * w;
            }
        }
    }
    let run = PurifiedRun {
        d_s: ds,
        psi,
        meter_prime_eigenvalues,
        block_index,
    };

    let moments = meter_moments_from_kraus(kraus, rho_s)?;
    let post = post_measurement_state(kraus, rho_s)?;
    let report = PurificationReport {
        norm_error: (run.norm() - 1.0).abs(),
        mean_error: (run.meter_prime_mean() - moments.mean).abs(),
        variance_error: (run.meter_prime_variance() - moments.variance).abs(),
        state_error: run.reduced_system_state().distance(post.matrix()),
    };
    let checks = [
        ("purification norm", report.norm_error),
        ("purified meter mean", report.mean_error),
        ("purified meter variance", report.variance_error),
        ("purified reduced state", report.state_error),
    ];
    for (check, error) in checks {
        if !(error <= PURIFICATION_TOL) {
            return Err(Error::InternalConsistency { check, error });
        }
    }
    Ok((run, report))
}
