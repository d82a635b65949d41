//! State files (JSON) and simulation parameter files (flat `key = value`).
//!
//! ```json
//! {"format_version": 1, "dims": [2, 2], "label": "bell:phi+",
//!  "amplitudes": [[0.7071067811865476, 0.0], [0.0, 0.0], [0.0, 0.0], [0.7071067811865476, 0.0]]}
//! ```
//!
//! Amplitudes are `[re, im]` pairs in row-major site order (last site
//! fastest). States that are not normalized must say `"unnormalized": true`.

use std::path::Path;

use ndarray::Array1;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::cavity::LambdaParams;
use crate::error::{Error, Result};
use crate::hilbert::{HilbertShape, StateVector};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub format_version: u32,
    pub dims: Vec<usize>,
    pub amplitudes: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub unnormalized: bool,
}

impl StateFile {
    pub fn from_state(psi: &StateVector, label: Option<String>) -> Self {
        StateFile {
            format_version: FORMAT_VERSION,
            dims: psi.shape().dims().to_vec(),
            amplitudes: psi.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
            label,
            unnormalized: !psi.is_normalized(),
        }
    }

    pub fn to_state(&self) -> Result<StateVector> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Parse(format!("unsupported format_version {}", self.format_version)));
        }
        let shape = HilbertShape::new(self.dims.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        if self.amplitudes.len() != shape.total_dim() {
            return Err(Error::Parse(format!(
                "{} amplitudes for dims {:?} (expected {})",
                self.amplitudes.len(),
                self.dims,
                shape.total_dim()
            )));
        }
        let amps: Array1<C64> = self.amplitudes.iter().map(|&[re, im]| C64::new(re, im)).collect();
        if self.unnormalized {
            StateVector::unnormalized(shape, amps)
        } else {
            StateVector::new(shape, amps)
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

pub fn read_state(path: &Path) -> Result<StateVector> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    StateFile::from_json(&text)?.to_state()
}

pub fn write_state(path: &Path, psi: &StateVector, label: Option<String>) -> Result<()> {
    std::fs::write(path, StateFile::from_state(psi, label).to_json() + "\n")
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// Parses a flat `key = value` parameter file; missing keys take defaults.
pub fn parse_params(text: &str) -> Result<LambdaParams> {
    let p: LambdaParams = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    p.validate()?;
    Ok(p)
}

pub fn read_params(path: &Path) -> Result<LambdaParams> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_params(&text)
}

pub fn params_to_string(p: &LambdaParams) -> String {
    toml::to_string(p).expect("flat params serialize")
}
