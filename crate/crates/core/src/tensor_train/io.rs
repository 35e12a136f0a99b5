//! JSON storage of value models.
//!
//! Floats are written in shortest round-trip form and parsed with exact
//! rounding, so a write/read cycle reproduces every core entry bit for bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Core, ModelError, TensorTrain, TensorTrainError, ValueModel};
use crate::basis::{BasisError, BasisKind, BasisSet};

pub const FORMAT_NAME: &str = "ttpi-value-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported model format {name} version {version}")]
    Format { name: String, version: u32 },
    #[error("model contains non-finite entries")]
    NonFinite,
    #[error("inconsistent model file: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    TensorTrain(#[from] TensorTrainError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisRecord {
    pub degree: usize,
    pub interval: [f64; 2],
    pub kind: BasisKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub order: usize,
    pub modes: Vec<usize>,
    pub ranks: Vec<usize>,
    /// Core entries in row-major `(left, mode, right)` order.
    pub cores: Vec<Vec<f64>>,
    pub bases: Vec<BasisRecord>,
    pub domain: Vec<[f64; 2]>,
}

impl ModelFile {
    pub fn from_model(model: &ValueModel) -> Self {
        let tt = model.tt();
        Self {
            format: FORMAT_NAME.into(),
            version: FORMAT_VERSION,
            order: tt.order(),
            modes: tt.modes(),
            ranks: tt.ranks(),
            cores: tt.cores().iter().map(|c| c.data().to_vec()).collect(),
            bases: model
                .bases()
                .iter()
                .map(|b| BasisRecord { degree: b.degree(), interval: [b.interval().0, b.interval().1], kind: b.kind() })
                .collect(),
            domain: model.domain().iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    pub fn to_model(&self) -> Result<ValueModel, ModelIoError> {
        if self.format != FORMAT_NAME || self.version != FORMAT_VERSION {
            return Err(ModelIoError::Format { name: self.format.clone(), version: self.version });
        }
        let n = self.order;
        if self.modes.len() != n || self.cores.len() != n || self.bases.len() != n || self.domain.len() != n {
            return Err(ModelIoError::Inconsistent(format!("arrays disagree with order {n}")));
        }
        if self.ranks.len() + 1 != n {
            return Err(ModelIoError::Inconsistent(format!("{} ranks for order {n}", self.ranks.len())));
        }
        let full: Vec<usize> = std::iter::once(1).chain(self.ranks.iter().copied()).chain(std::iter::once(1)).collect();
        let cores = (0..n)
            .map(|d| {
                let expected = full[d] * self.modes[d] * full[d + 1];
                if self.cores[d].len() != expected {
                    return Err(ModelIoError::Inconsistent(format!(
                        "core {d} has {} entries, expected {expected}",
                        self.cores[d].len()
                    )));
                }
                Ok(Core::new(full[d], self.modes[d], full[d + 1], self.cores[d].clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let tt = TensorTrain::new(cores)?;
        let bases = self
            .bases
            .iter()
            .map(|b| BasisSet::new(b.degree, (b.interval[0], b.interval[1]), b.kind))
            .collect::<Result<Vec<_>, _>>()?;
        let domain = self.domain.iter().map(|d| (d[0], d[1])).collect();
        Ok(ValueModel::new(tt, bases, domain)?)
    }

    pub fn to_json(&self) -> Result<String, ModelIoError> {
        if self.cores.iter().flatten().any(|v| !v.is_finite()) {
            return Err(ModelIoError::NonFinite);
        }
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, ModelIoError> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn write_model(model: &ValueModel, path: &Path) -> Result<(), ModelIoError> {
    let text = ModelFile::from_model(model).to_json()?;
    fs::write(path, text + "\n").map_err(|source| ModelIoError::Io { path: path.display().to_string(), source })
}

pub fn read_model(path: &Path) -> Result<ValueModel, ModelIoError> {
    let text =
        fs::read_to_string(path).map_err(|source| ModelIoError::Io { path: path.display().to_string(), source })?;
    ModelFile::from_json(&text)?.to_model()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_model() -> ValueModel {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let tt = TensorTrain::random(&[4, 4, 4], &[3, 2], &mut rng);
        let b = BasisSet::new(3, (-1.0, 1.0), BasisKind::OrthonormalH1).unwrap();
        ValueModel::new(tt, vec![b; 3], vec![(-2.0, 2.0), (-1.5, 0.5), (0.0, 1.0)]).unwrap()
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let model = sample_model();
        let text = ModelFile::from_model(&model).to_json().unwrap();
        let back = ModelFile::from_json(&text).unwrap().to_model().unwrap();
        for (a, b) in model.tt().cores().iter().zip(back.tt().cores()) {
            let bits_a: Vec<u64> = a.data().iter().map(|v| v.to_bits()).collect();
            let bits_b: Vec<u64> = b.data().iter().map(|v| v.to_bits()).collect();
            assert_eq!(bits_a, bits_b);
        }
        assert_eq!(model.domain(), back.domain());
        assert_eq!(model.bases(), back.bases());
    }

    #[test]
    fn rejects_wrong_core_size() {
        let mut file = ModelFile::from_model(&sample_model());
        file.cores[1].pop();
        assert!(matches!(file.to_model(), Err(ModelIoError::Inconsistent(_))));
    }

    #[test]
    fn rejects_unknown_format() {
        let mut file = ModelFile::from_model(&sample_model());
        file.version = 99;
        assert!(matches!(file.to_model(), Err(ModelIoError::Format { .. })));
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = ModelFile::from_model(&sample_model()).to_json().unwrap();
        let patched = text.replacen('{', "{\"extra\": 1,", 1);
        assert!(ModelFile::from_json(&patched).is_err());
    }
}
