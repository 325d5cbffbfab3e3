//! Validated quantum objects: states, observables, unitaries and Kraus
//! families, plus first and second moments over them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix, HermitianEig, MatrixJson};

/// Eigenvalues closer than this are merged into one eigenspace.
pub const EIGENSPACE_MERGE_TOL: f64 = 1e-8;
pub const STATE_TOL: f64 = 1e-10;
pub const UNITARY_TOL: f64 = 1e-10;
pub const COMPLETENESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    spectrum: HermitianEig,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and positivity. Eigenvalues in
    /// `[-1e-10, 0)` are clamped to zero and the state renormalised.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let residual = matrix.hermitian_residual();
        if residual > STATE_TOL * (1.0 + matrix.frobenius_norm()) {
            return Err(Error::NotHermitian { residual });
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > STATE_TOL || trace.im.abs() > STATE_TOL {
            return Err(Error::Trace { trace: trace.re });
        }
        let mut spectrum = hermitian_eig(&matrix)?;
        let min = spectrum.values[0];
        if min < -STATE_TOL {
            return Err(Error::NotPositive { min_eigenvalue: min });
        }
        if min < 0.0 {
            for x in spectrum.values.iter_mut() {
                *x = x.max(0.0);
            }
            let total: f64 = spectrum.values.iter().sum();
            for x in spectrum.values.iter_mut() {
                *x /= total;
            }
            let matrix = spectrum.reconstruct();
            return Ok(Self { matrix, spectrum });
        }
        Ok(Self { matrix, spectrum })
    }

    /// Like [`DensityOperator::new`] but first symmetrises away roundoff
    /// from upstream products.
    pub fn from_computed(matrix: &ComplexMatrix) -> Result<Self> {
        Self::new(matrix.hermitian_part())
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self::new(ComplexMatrix::identity(dim).scale(1.0 / dim as f64)).expect("valid state")
    }

    pub fn pure(psi: &[num_complex::Complex64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::InvalidInput("zero state vector".into()));
        }
        let unit: Vec<_> = psi.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&unit, &unit))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Eigen-decomposition `ρ = Σ λ_μ |μ⟩⟨μ|`, eigenvalues ascending.
    pub fn spectrum(&self) -> &HermitianEig {
        &self.spectrum
    }

    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).re
    }
}

impl TryFrom<MatrixJson> for DensityOperator {
    type Error = Error;

    fn try_from(json: MatrixJson) -> Result<Self> {
        check_kind(&json, "density")?;
        DensityOperator::new(json.try_into()?)
    }
}

impl From<DensityOperator> for MatrixJson {
    fn from(d: DensityOperator) -> Self {
        MatrixJson::from(&d.matrix).with_kind("density")
    }
}

fn check_kind(json: &MatrixJson, expected: &str) -> Result<()> {
    match json.kind.as_deref() {
        None => Ok(()),
        Some(k) if k == expected => Ok(()),
        Some(k) => Err(Error::InvalidInput(format!(
            "kind `{k}` where `{expected}` was expected"
        ))),
    }
}

/// Hermitian operator with its spectral decomposition grouped into
/// distinct eigenvalues `r_k` and projectors `Π_k`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct Observable {
    matrix: ComplexMatrix,
    eigenvalues: Vec<f64>,
    projectors: Vec<ComplexMatrix>,
}

impl Observable {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let eig = hermitian_eig(&matrix)?;
        let n = matrix.dim();
        let mut eigenvalues = Vec::new();
        let mut projectors = Vec::new();
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && eig.values[end] - eig.values[end - 1] < EIGENSPACE_MERGE_TOL {
                end += 1;
            }
            let mean = eig.values[start..end].iter().sum::<f64>() / (end - start) as f64;
            let mut proj = ComplexMatrix::zeros(n);
            for k in start..end {
                let v = eig.vector(k);
                proj = &proj + &ComplexMatrix::outer(&v, &v);
            }
            eigenvalues.push(mean);
            projectors.push(proj);
            start = end;
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
            eigenvalues,
            projectors,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Distinct eigenvalues, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[ComplexMatrix] {
        &self.projectors
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn squared(&self) -> Result<Observable> {
        Observable::new(self.matrix.matmul(&self.matrix))
    }
}

impl TryFrom<MatrixJson> for Observable {
    type Error = Error;

    fn try_from(json: MatrixJson) -> Result<Self> {
        check_kind(&json, "observable")?;
        Observable::new(json.try_into()?)
    }
}

impl From<Observable> for MatrixJson {
    fn from(o: Observable) -> Self {
        MatrixJson::from(&o.matrix).with_kind("observable")
    }
}

/// `obs − λ_min·I`, so that the lowest outcome is exactly zero.
pub fn shift_to_zero_ground(obs: &Observable) -> Observable {
    let shift = obs.eigenvalues[0];
    let n = obs.dim();
    Observable {
        matrix: &obs.matrix - &ComplexMatrix::identity(n).scale(shift),
        eigenvalues: obs.eigenvalues.iter().map(|&r| r - shift).collect(),
        projectors: obs.projectors.clone(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct UnitaryOperator {
    matrix: ComplexMatrix,
}

impl UnitaryOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let n = matrix.dim();
        let residual = matrix
            .adjoint()
            .matmul(&matrix)
            .distance(&ComplexMatrix::identity(n));
        if residual > UNITARY_TOL {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `U† X U`.
    pub fn heisenberg(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.matrix.adjoint().matmul(x).matmul(&self.matrix)
    }
}

impl TryFrom<MatrixJson> for UnitaryOperator {
    type Error = Error;

    fn try_from(json: MatrixJson) -> Result<Self> {
        check_kind(&json, "unitary")?;
        UnitaryOperator::new(json.try_into()?)
    }
}

impl From<UnitaryOperator> for MatrixJson {
    fn from(u: UnitaryOperator) -> Self {
        MatrixJson::from(&u.matrix).with_kind("unitary")
    }
}

/// One Kraus operator `V_{k,(j,m)}` tagged by the probe-basis index `j`
/// and the probe-state eigen-index `m` it came from.
#[derive(Debug, Clone)]
pub struct KrausOperator {
    pub probe_index: usize,
    pub state_index: usize,
    pub matrix: ComplexMatrix,
}

impl KrausOperator {
    pub fn untagged(matrix: ComplexMatrix) -> Self {
        Self {
            probe_index: 0,
            state_index: 0,
            matrix,
        }
    }
}

/// All Kraus operators attached to one meter outcome `r_k`.
#[derive(Debug, Clone)]
pub struct KrausOutcome {
    pub eigenvalue: f64,
    pub operators: Vec<KrausOperator>,
}

#[derive(Debug, Clone)]
pub struct KrausSet {
    dim: usize,
    outcomes: Vec<KrausOutcome>,
}

impl KrausSet {
    /// Checks `Σ V†V = I` and ascending outcome order.
    pub fn new(dim: usize, outcomes: Vec<KrausOutcome>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidInput("Kraus family has no outcomes".into()));
        }
        if outcomes
            .windows(2)
            .any(|w| !(w[0].eigenvalue < w[1].eigenvalue))
        {
            return Err(Error::InvalidInput(
                "Kraus outcomes must be strictly ascending".into(),
            ));
        }
        for op in outcomes.iter().flat_map(|o| &o.operators) {
            op.matrix.ensure_dim(dim)?;
        }
        let set = Self { dim, outcomes };
        let residual = set.completeness_residual();
        if residual > COMPLETENESS_TOL {
            return Err(Error::InternalConsistency {
                check: "Kraus completeness",
                error: residual,
            });
        }
        Ok(set)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn outcomes(&self) -> &[KrausOutcome] {
        &self.outcomes
    }

    /// `(r_k, V)` pairs over every operator in the family.
    pub fn iter(&self) -> impl Iterator<Item = (f64, &KrausOperator)> {
        self.outcomes
            .iter()
            .flat_map(|o| o.operators.iter().map(move |v| (o.eigenvalue, v)))
    }

    pub fn len(&self) -> usize {
        self.outcomes.iter().map(|o| o.operators.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `‖Σ V†V − I‖_F`.
    pub fn completeness_residual(&self) -> f64 {
        completeness_residual(self.dim, self.iter().map(|(_, v)| &v.matrix))
    }
}

pub(crate) fn completeness_residual<'a>(
    dim: usize,
    ops: impl Iterator<Item = &'a ComplexMatrix>,
) -> f64 {
    let mut acc = ComplexMatrix::zeros(dim);
    for v in ops {
        acc = &acc + &v.adjoint().matmul(v);
    }
    acc.distance(&ComplexMatrix::identity(dim))
}

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            found: b,
        });
    }
    Ok(())
}

/// `tr[h ρ]` for a Hermitian `h`.
pub fn mean_of(h: &ComplexMatrix, rho: &ComplexMatrix) -> Result<f64> {
    same_dim(rho.dim(), h.dim())?;
    Ok(h.trace_product(rho).re)
}

/// `tr[h² ρ] − tr[h ρ]²`, clamped at zero.
pub fn variance_of(h: &ComplexMatrix, rho: &ComplexMatrix) -> Result<f64> {
    let mean = mean_of(h, rho)?;
    let second = h.matmul(h).trace_product(rho).re;
    Ok((second - mean * mean).max(0.0))
}

pub fn expectation(obs: &Observable, state: &DensityOperator) -> Result<f64> {
    mean_of(obs.matrix(), state.matrix())
}

pub fn variance(obs: &Observable, state: &DensityOperator) -> Result<f64> {
    variance_of(obs.matrix(), state.matrix())
}
