//! Scheme and state files.
//!
//! A scheme file is
//! `{"d_S": n, "d_P": n, "U": matrix, "M": matrix, "rho_P": matrix,
//! "probe_basis": matrix?, "A": matrix?}` where every matrix uses the
//! `{"dim", "re", "im"}` encoding and `probe_basis` holds basis vectors as
//! columns. The optional `A` names the target observable when it is not
//! the one derived from the scheme. Validation errors carry the path of
//! the offending field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, MatrixJson};
use crate::measurement::MeasurementScheme;
use crate::quantum::{DensityOperator, Observable, UnitaryOperator};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeFile {
    #[serde(rename = "d_S")]
    pub d_s: usize,
    #[serde(rename = "d_P")]
    pub d_p: usize,
    #[serde(rename = "U")]
    pub unitary: MatrixJson,
    #[serde(rename = "M")]
    pub meter: MatrixJson,
    #[serde(rename = "rho_P")]
    pub rho_p: MatrixJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_basis: Option<MatrixJson>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub target: Option<MatrixJson>,
}

/// Parsed scheme file: the scheme and the optional explicit target.
#[derive(Debug, Clone)]
pub struct LoadedScheme {
    pub scheme: MeasurementScheme,
    pub target: Option<Observable>,
}

fn matrix(json: &MatrixJson, path: &str) -> Result<ComplexMatrix> {
    ComplexMatrix::try_from(json.clone()).map_err(|e| e.at(path))
}

fn check_kind(json: &MatrixJson, path: &str, expected: &str) -> Result<()> {
    match json.kind.as_deref() {
        Some(k) if k != expected => Err(Error::InvalidInput(format!(
            "kind `{k}` where `{expected}` was expected"
        ))
        .at(path)),
        _ => Ok(()),
    }
}

impl SchemeFile {
    pub fn from_scheme(scheme: &MeasurementScheme, target: Option<&Observable>) -> Self {
        let basis = scheme.probe_basis();
        let computational = *basis == ComplexMatrix::identity(scheme.d_p());
        SchemeFile {
            d_s: scheme.d_s(),
            d_p: scheme.d_p(),
            unitary: MatrixJson::from(scheme.unitary().matrix()).with_kind("unitary"),
            meter: MatrixJson::from(scheme.meter().matrix()).with_kind("observable"),
            rho_p: MatrixJson::from(scheme.probe_state().matrix()).with_kind("density"),
            probe_basis: (!computational).then(|| MatrixJson::from(basis)),
            target: target.map(|a| MatrixJson::from(a.matrix()).with_kind("observable")),
        }
    }

    pub fn load(&self) -> Result<LoadedScheme> {
        let d = self.d_s * self.d_p;
        if self.d_s == 0 {
            return Err(Error::InvalidInput("must be positive".into()).at("d_S"));
        }
        if self.d_p == 0 {
            return Err(Error::InvalidInput("must be positive".into()).at("d_P"));
        }
        let dims = [
            ("U", &self.unitary, d),
            ("M", &self.meter, d),
            ("rho_P", &self.rho_p, self.d_p),
        ];
        for (path, json, expected) in dims {
            if json.dim != expected {
                return Err(Error::DimensionMismatch {
                    expected,
                    found: json.dim,
                }
                .at(path));
            }
        }
        check_kind(&self.unitary, "U", "unitary")?;
        check_kind(&self.meter, "M", "observable")?;
        check_kind(&self.rho_p, "rho_P", "density")?;

        let unitary = UnitaryOperator::new(matrix(&self.unitary, "U")?).map_err(|e| e.at("U"))?;
        let meter = Observable::new(matrix(&self.meter, "M")?).map_err(|e| e.at("M"))?;
        let probe_state =
            DensityOperator::new(matrix(&self.rho_p, "rho_P")?).map_err(|e| e.at("rho_P"))?;
        let basis = match &self.probe_basis {
            Some(b) => matrix(b, "probe_basis")?,
            None => ComplexMatrix::identity(self.d_p),
        };
        let scheme =
            MeasurementScheme::with_probe_basis(self.d_s, self.d_p, unitary, meter, probe_state, basis)?;
        let target = match &self.target {
            Some(a) => {
                check_kind(a, "A", "observable")?;
                if a.dim != self.d_s {
                    return Err(Error::DimensionMismatch {
                        expected: self.d_s,
                        found: a.dim,
                    }
                    .at("A"));
                }
                Some(Observable::new(matrix(a, "A")?).map_err(|e| e.at("A"))?)
            }
            None => None,
        };
        Ok(LoadedScheme { scheme, target })
    }
}

pub fn parse_scheme(text: &str) -> Result<LoadedScheme> {
    let file: SchemeFile = serde_json::from_str(text).map_err(|e| Error::Json(e).at("scheme"))?;
    file.load()
}

pub fn scheme_to_json(scheme: &MeasurementScheme, target: Option<&Observable>) -> String {
    serde_json::to_string_pretty(&SchemeFile::from_scheme(scheme, target))
        .expect("scheme serialises")
}

/// Parses a system state file (matrix encoding, optional `"kind": "density"`).
pub fn parse_state(text: &str) -> Result<DensityOperator> {
    let json: MatrixJson = serde_json::from_str(text).map_err(|e| Error::Json(e).at("rho_S"))?;
    check_kind(&json, "rho_S", "density")?;
    DensityOperator::new(matrix(&json, "rho_S")?).map_err(|e| e.at("rho_S"))
}

pub fn state_to_json(state: &DensityOperator) -> String {
    serde_json::to_string_pretty(state).expect("state serialises")
}
