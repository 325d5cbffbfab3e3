//! Survival activity, the activity/noise trade-off bound, the
//! noise-disturbance relation and the noise floor implied by combining
//! them.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{psd_inverse, tensor, ComplexMatrix, DEFAULT_REG_TOL};
use crate::measurement::{
    kraus_from_scheme, meter_moments_from_kraus, noise_variance, unbiasedness_residual,
    MeasurementScheme, ZERO_GROUND_TOL,
};
use crate::quantum::{mean_of, variance_of, DensityOperator, KrausSet, Observable, UnitaryOperator};

/// Relative slack allowed when comparing the two sides of the bound.
pub const BOUND_REL_TOL: f64 = 1e-7;
/// Absolute slack allowed when comparing the two sides of the bound.
pub const BOUND_ABS_TOL: f64 = 1e-9;
/// Target variances below this make the coefficient of variation undefined.
pub const MIN_TARGET_VARIANCE: f64 = 1e-10;
/// Default unbiasedness tolerance.
pub const DEFAULT_UNBIAS_TOL: f64 = 1e-5;

/// Survival activity: finite, or unbounded when no candidate `V_{0,l}†V_{0,l}`
/// is invertible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activity {
    Finite(f64),
    Unbounded,
}

impl Activity {
    pub fn finite(self) -> Option<f64> {
        match self {
            Activity::Finite(x) => Some(x),
            Activity::Unbounded => None,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    pub fn is_unbounded(self) -> bool {
        matches!(self, Activity::Unbounded)
    }
}

impl Serialize for Activity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Activity::Finite(x) => s.serialize_f64(*x),
            Activity::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

impl<'de> Deserialize<'de> for Activity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Activity::Finite(x)),
            Raw::Tag(t) if t == "unbounded" => Ok(Activity::Unbounded),
            Raw::Tag(t) => Err(serde::de::Error::custom(format!("unexpected activity `{t}`"))),
        }
    }
}

/// Which `V_{0,l}` attained the minimum: `[k, j, m]` with `k = 0`.
pub type KrausLabel = [usize; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalActivity {
    pub xi: Activity,
    pub selected_l: Option<KrausLabel>,
}

/// `Ξ = min_l { tr[(V_{0,l}†V_{0,l})⁻¹ ρ] − 1 }` over the zero-outcome
/// block, skipping candidates whose smallest eigenvalue is below `reg_tol`.
pub fn survival_activity(
    kraus: &KrausSet,
    rho_s: &DensityOperator,
    reg_tol: f64,
) -> Result<SurvivalActivity> {
    rho_s.matrix().ensure_dim(kraus.dim())?;
    let zero = &kraus.outcomes()[0];
    if zero.eigenvalue.abs() > ZERO_GROUND_TOL {
        return Err(Error::MissingZeroOutcome {
            lowest: zero.eigenvalue,
        });
    }
    let mut best: Option<(f64, KrausLabel)> = None;
    for v in &zero.operators {
        let effect = v.matrix.adjoint().matmul(&v.matrix);
        let inv = match psd_inverse(&effect, reg_tol) {
            Ok(inv) => inv,
            Err(Error::Singular { .. }) => continue,
            Err(e) => return Err(e),
        };
        let xi_l = inv.trace_product(rho_s.matrix()).re - 1.0;
        // V†V ⪯ I forces tr[(V†V)⁻¹ρ] ≥ 1.
        if xi_l < -1e-9 {
            return Err(Error::InternalConsistency {
                check: "non-negative survival activity",
                error: -xi_l,
            });
        }
        let xi_l = xi_l.max(0.0);
        if best.is_none_or(|(b, _)| xi_l < b) {
            best = Some((xi_l, [0, v.probe_index, v.state_index]));
        }
    }
    Ok(match best {
        Some((xi, label)) => SurvivalActivity {
            xi: Activity::Finite(xi),
            selected_l: Some(label),
        },
        None => SurvivalActivity {
            xi: Activity::Unbounded,
            selected_l: None,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundOptions {
    pub unbias_tol: f64,
    pub reg_tol: f64,
}

impl Default for BoundOptions {
    fn default() -> Self {
        Self {
            unbias_tol: DEFAULT_UNBIAS_TOL,
            reg_tol: DEFAULT_REG_TOL,
        }
    }
}

/// Both forms of the trade-off bound for one scheme and initial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurReport {
    pub xi: Activity,
    pub selected_l: Option<KrausLabel>,
    #[serde(rename = "cv2")]
    pub cv_squared: f64,
    pub noise_ratio: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    pub mean_a: f64,
    pub var_a: f64,
    pub var_n: f64,
    pub residual: f64,
    pub meter_mean: f64,
    pub meter_variance: f64,
    /// `Δ_pM² / ⟨M⟩_p²`; infinite when the meter mean vanishes.
    pub meter_ratio: f64,
    /// `Ξ · Δ_pM²/⟨M⟩_p² ≥ 1` (or unbounded activity).
    pub meter_satisfied: bool,
}

impl TurReport {
    /// `1 + ΔN²/ΔA²`.
    pub fn one_plus_noise_ratio(&self) -> f64 {
        1.0 + self.noise_ratio
    }
}

pub fn bound_holds(lhs: f64, rhs: f64) -> bool {
    lhs >= rhs * (1.0 - BOUND_REL_TOL) - BOUND_ABS_TOL
}

/// Evaluates `Ξ(1 + ΔN²/ΔA²) ≥ ⟨A⟩²/ΔA²` for the scheme read as a
/// measurement of `target`, together with the meter form
/// `Δ_pM²/⟨M⟩_p² ≥ 1/Ξ`.
pub fn tur_bound(
    scheme: &MeasurementScheme,
    target: &Observable,
    rho_s: &DensityOperator,
    opts: &BoundOptions,
) -> Result<TurReport> {
    let kraus = kraus_from_scheme(scheme)?;
    tur_bound_with_kraus(scheme, &kraus, target, rho_s, opts)
}

/// [`tur_bound`] reusing an already extracted Kraus family.
pub fn tur_bound_with_kraus(
    scheme: &MeasurementScheme,
    kraus: &KrausSet,
    target: &Observable,
    rho_s: &DensityOperator,
    opts: &BoundOptions,
) -> Result<TurReport> {
    let residual = unbiasedness_residual(scheme, target)?;
    if !(residual <= opts.unbias_tol) {
        return Err(Error::Unbiasedness {
            residual,
            tol: opts.unbias_tol,
        });
    }
    let var_a = variance_of(target.matrix(), rho_s.matrix())?;
    if var_a < MIN_TARGET_VARIANCE {
        return Err(Error::Degenerate { variance: var_a });
    }
    let mean_a = mean_of(target.matrix(), rho_s.matrix())?;
    let var_n = noise_variance(scheme, target, rho_s)?;
    let activity = survival_activity(kraus, rho_s, opts.reg_tol)?;
    let meter = meter_moments_from_kraus(kraus, rho_s)?;

    let cv_squared = mean_a * mean_a / var_a;
    let noise_ratio = var_n / var_a;
    let meter_ratio = if meter.mean == 0.0 {
        f64::INFINITY
    } else {
        meter.variance / (meter.mean * meter.mean)
    };
    let (lhs, satisfied, meter_satisfied) = match activity.xi {
        Activity::Finite(xi) => (
            xi * (1.0 + noise_ratio),
            bound_holds(xi * (1.0 + noise_ratio), cv_squared),
            bound_holds(xi * meter_ratio, 1.0),
        ),
        Activity::Unbounded => (f64::INFINITY, true, true),
    };
    Ok(TurReport {
        xi: activity.xi,
        selected_l: activity.selected_l,
        cv_squared,
        noise_ratio,
        lhs,
        rhs: cv_squared,
        satisfied,
        mean_a,
        var_a,
        var_n,
        residual,
        meter_mean: meter.mean,
        meter_variance: meter.variance,
        meter_ratio,
        meter_satisfied,
    })
}

/// `D_B = U†(B ⊗ I_P)U − B ⊗ I_P`.
pub fn disturbance_operator(
    u: &UnitaryOperator,
    b: &Observable,
    d_s: usize,
    d_p: usize,
) -> Result<ComplexMatrix> {
    u.matrix().ensure_dim(d_s * d_p)?;
    b.matrix().ensure_dim(d_s)?;
    let lifted = tensor(b.matrix(), &ComplexMatrix::identity(d_p));
    Ok(&u.heisenberg(&lifted) - &lifted)
}

/// `|⟨[A, B]⟩|` on `ρ`.
pub fn commutator_mean_abs(a: &Observable, b: &Observable, rho: &DensityOperator) -> Result<f64> {
    a.matrix().ensure_dim(rho.dim())?;
    b.matrix().ensure_dim(rho.dim())?;
    Ok(a.matrix().commutator(b.matrix()).trace_product(rho.matrix()).norm())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NdrCheck {
    pub holds_additive: bool,
    pub holds_reciprocal: bool,
    /// `ΔN_AΔD_B + ΔN_AΔB + ΔAΔD_B − ½|⟨[A,B]⟩|`.
    pub slack: f64,
}

const NDR_TOL: f64 = 1e-12;

/// Checks the noise-disturbance relation in its additive form and in the
/// equivalent reciprocal form
/// `(ΔN_A/ΔA + 1)(ΔD_B/ΔB + 1) ≥ 1 + |⟨[A,B]⟩|/(2ΔAΔB)`.
pub fn ndr_check(
    noise_a: f64,
    dist_b: f64,
    std_a: f64,
    std_b: f64,
    commutator_mean_abs: f64,
) -> Result<NdrCheck> {
    let inputs = [noise_a, dist_b, std_a, std_b, commutator_mean_abs];
    if inputs.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite NDR input".into()));
    }
    if inputs.iter().any(|&x| x < 0.0) || !(std_a > 0.0 && std_b > 0.0) {
        return Err(Error::InvalidInput(
            "NDR inputs must be non-negative with positive standard deviations".into(),
        ));
    }
    let lhs = noise_a * dist_b + noise_a * std_b + std_a * dist_b;
    let rhs = 0.5 * commutator_mean_abs;
    let slack = lhs - rhs;
    let holds_additive = slack >= -NDR_TOL * (1.0 + rhs);

    let recip_lhs = (noise_a / std_a + 1.0) * (dist_b / std_b + 1.0);
    let recip_rhs = 1.0 + commutator_mean_abs / (2.0 * std_a * std_b);
    let holds_reciprocal =
        recip_lhs - recip_rhs >= -NDR_TOL * (1.0 + rhs) / (std_a * std_b);
    Ok(NdrCheck {
        holds_additive,
        holds_reciprocal,
        slack,
    })
}

/// Lower edge of the reciprocal relation: the smallest `ΔD_B/ΔB` allowed
/// at `ΔN_A/ΔA = noise_ratio`, with `kappa = |⟨[A,B]⟩|/(2ΔAΔB)`.
pub fn ndr_frontier(noise_ratio: f64, kappa: f64) -> f64 {
    ((1.0 + kappa) / (noise_ratio + 1.0) - 1.0).max(0.0)
}

/// Floor on `ΔN/ΔA` implied by the trade-off bound: `√(CV²/Ξ − 1)` when
/// `CV² > Ξ`, zero otherwise.
pub fn noise_floor(xi: f64, cv_squared: f64) -> Result<f64> {
    if !(xi > 0.0) {
        return Err(Error::InvalidInput(format!(
            "survival activity must be positive, got {xi}"
        )));
    }
    Ok(if cv_squared > xi {
        (cv_squared / xi - 1.0).sqrt()
    } else {
        0.0
    })
}
