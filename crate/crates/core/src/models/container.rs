//! Self-describing binary model container.
//!
//! Layout: magic `PCGM`, version byte, kind byte, a JSON architecture
//! descriptor (length-prefixed), named f64 little-endian tensors
//! (length-prefixed), and a trailing SHA-256 over everything before it.
//! Standardization statistics travel as ordinary tensors. Optimizer state is
//! not stored; loading a model for further training starts Adam fresh.

use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::cnn::{CnnModel, CONV_CHANNELS, DENSE_UNITS, TENSOR_NAMES};
use super::svm::LinearModel;
use super::ModelError;
use crate::features::FeatureKind;

const MAGIC: &[u8; 4] = b"PCGM";
const VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    SvmLinear,
    Cnn,
}

impl ModelKind {
    fn byte(self) -> u8 {
        match self {
            ModelKind::SvmLinear => 1,
            ModelKind::Cnn => 2,
        }
    }

    fn from_byte(b: u8) -> Result<Self, ModelError> {
        match b {
            1 => Ok(ModelKind::SvmLinear),
            2 => Ok(ModelKind::Cnn),
            other => Err(ModelError::Container(format!("unknown model kind byte {other}"))),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SvmDescriptor {
    dim: usize,
    feature_kind: Option<FeatureKind>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CnnDescriptor {
    input_h: usize,
    input_w: usize,
    conv_channels: Vec<usize>,
    dense_units: usize,
    classes: usize,
    feature_kind: Option<FeatureKind>,
    stats_set: bool,
}

struct ContainerWriter {
    buf: Vec<u8>,
}

impl ContainerWriter {
    fn new(kind: ModelKind, descriptor: &impl Serialize) -> Result<Self, ModelError> {
        let mut buf = Vec::new();
        buf.extend_from_slice(MAGIC);
        buf.push(VERSION);
        buf.push(kind.byte());
        let header = serde_json::to_vec(descriptor)?;
        buf.extend_from_slice(&(header.len() as u32).to_le_bytes());
        buf.extend_from_slice(&header);
        Ok(Self { buf })
    }

    fn tensor(&mut self, name: &str, values: &[f64]) {
        self.buf.extend_from_slice(&(name.len() as u16).to_le_bytes());
        self.buf.extend_from_slice(name.as_bytes());
        self.buf.extend_from_slice(&(values.len() as u64).to_le_bytes());
        for &v in values {
            self.buf.extend_from_slice(&v.to_le_bytes());
        }
    }

    fn finish(mut self, path: &Path) -> Result<(), ModelError> {
        let digest = Sha256::digest(&self.buf);
        self.buf.extend_from_slice(&digest);
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.buf)?;
        Ok(())
    }
}

struct ContainerReader {
    bytes: Vec<u8>,
    pos: usize,
}

impl ContainerReader {
    fn open(path: &Path, expected: ModelKind) -> Result<(Self, Vec<u8>), ModelError> {
        let bytes = std::fs::read(path)?;
        if bytes.len() < 4 + 1 + 1 + 4 + 32 {
            return Err(ModelError::Container("file too small".into()));
        }
        if &bytes[0..4] != MAGIC {
            return Err(ModelError::Container("bad magic".into()));
        }
        let body_len = bytes.len() - 32;
        let digest = Sha256::digest(&bytes[..body_len]);
        if digest[..] != bytes[body_len..] {
            return Err(ModelError::Checksum);
        }
        if bytes[4] != VERSION {
            return Err(ModelError::VersionMismatch { expected: VERSION, found: bytes[4] });
        }
        let kind = ModelKind::from_byte(bytes[5])?;
        if kind != expected {
            return Err(ModelError::Architecture(format!(
                "expected a {expected:?} container, found {kind:?}"
            )));
        }
        let header_len =
            u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
        if 10 + header_len > body_len {
            return Err(ModelError::Container("descriptor overruns file".into()));
        }
        let header = bytes[10..10 + header_len].to_vec();
        let pos = 10 + header_len;
        Ok((Self { bytes: bytes[..body_len].to_vec(), pos }, header))
    }

    fn tensor(&mut self, expected_name: &str) -> Result<Vec<f64>, ModelError> {
        let err = |msg: &str| ModelError::Container(format!("tensor {expected_name}: {msg}"));
        if self.pos + 2 > self.bytes.len() {
            return Err(err("truncated name length"));
        }
        let name_len =
            u16::from_le_bytes(self.bytes[self.pos..self.pos + 2].try_into().unwrap()) as usize;
        self.pos += 2;
        if self.pos + name_len > self.bytes.len() {
            return Err(err("truncated name"));
        }
        let name = std::str::from_utf8(&self.bytes[self.pos..self.pos + name_len])
            .map_err(|_| err("name is not utf-8"))?;
        if name != expected_name {
            return Err(ModelError::Container(format!(
                "expected tensor {expected_name:?}, found {name:?}"
            )));
        }
        self.pos += name_len;
        if self.pos + 8 > self.bytes.len() {
            return Err(err("truncated length"));
        }
        let len =
            u64::from_le_bytes(self.bytes[self.pos..self.pos + 8].try_into().unwrap()) as usize;
        self.pos += 8;
        if self.pos + len * 8 > self.bytes.len() {
            return Err(err("truncated payload"));
        }
        let values = self.bytes[self.pos..self.pos + len * 8]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        self.pos += len * 8;
        Ok(values)
    }
}

/// Reads just the kind byte (after integrity checks of the prefix).
pub fn peek_model_kind(path: impl AsRef<Path>) -> Result<ModelKind, ModelError> {
    let bytes = std::fs::read(path.as_ref())?;
    if bytes.len() < 6 || &bytes[0..4] != MAGIC {
        return Err(ModelError::Container("not a model container".into()));
    }
    ModelKind::from_byte(bytes[5])
}

impl LinearModel {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let descriptor = SvmDescriptor { dim: self.dim(), feature_kind: self.feature_kind };
        let mut w = ContainerWriter::new(ModelKind::SvmLinear, &descriptor)?;
        w.tensor("weights", &self.weights);
        w.tensor("bias", &[self.bias]);
        w.tensor("mean", &self.mean);
        w.tensor("std", &self.std);
        w.finish(path.as_ref())
    }
}

pub fn load_linear(path: impl AsRef<Path>) -> Result<LinearModel, ModelError> {
    let (mut r, header) = ContainerReader::open(path.as_ref(), ModelKind::SvmLinear)?;
    let descriptor: SvmDescriptor = serde_json::from_slice(&header)?;
    let weights = r.tensor("weights")?;
    let bias = r.tensor("bias")?;
    let mean = r.tensor("mean")?;
    let std = r.tensor("std")?;
    if weights.len() != descriptor.dim
        || mean.len() != descriptor.dim
        || std.len() != descriptor.dim
        || bias.len() != 1
    {
        return Err(ModelError::Container("tensor sizes disagree with descriptor".into()));
    }
    Ok(LinearModel {
        weights,
        bias: bias[0],
        feature_kind: descriptor.feature_kind,
        mean,
        std,
    })
}

impl CnnModel {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let (input_h, input_w) = self.input_shape();
        let descriptor = CnnDescriptor {
            input_h,
            input_w,
            conv_channels: CONV_CHANNELS.to_vec(),
            dense_units: DENSE_UNITS,
            classes: super::cnn::CLASSES,
            feature_kind: self.feature_kind(),
            stats_set: self.standardization().is_some(),
        };
        let mut w = ContainerWriter::new(ModelKind::Cnn, &descriptor)?;
        for (name, values) in TENSOR_NAMES.iter().zip(self.params()) {
            w.tensor(name, values);
        }
        let (mean, std) = self.standardization().unwrap_or((0.0, 1.0));
        w.tensor("feat_mean", &[mean]);
        w.tensor("feat_std", &[std]);
        w.finish(path.as_ref())
    }
}

pub fn load_cnn(path: impl AsRef<Path>) -> Result<CnnModel, ModelError> {
    let (mut r, header) = ContainerReader::open(path.as_ref(), ModelKind::Cnn)?;
    let descriptor: CnnDescriptor = serde_json::from_slice(&header)?;
    if descriptor.conv_channels != CONV_CHANNELS.to_vec()
        || descriptor.dense_units != DENSE_UNITS
        || descriptor.classes != super::cnn::CLASSES
    {
        return Err(ModelError::Architecture(format!(
            "unsupported cnn layout: conv {:?}, dense {}, classes {}",
            descriptor.conv_channels, descriptor.dense_units, descriptor.classes
        )));
    }
    // Seed value is irrelevant: every tensor is overwritten below.
    let mut model = CnnModel::init(descriptor.input_h, descriptor.input_w, 0)?;
    for (idx, name) in TENSOR_NAMES.iter().enumerate() {
        let values = r.tensor(name)?;
        let mut params = model.params_mut();
        if params[idx].len() != values.len() {
            return Err(ModelError::Container(format!(
                "tensor {name} has {} values, expected {}",
                values.len(),
                params[idx].len()
            )));
        }
        *params[idx] = values;
    }
    let mean = r.tensor("feat_mean")?;
    let std = r.tensor("feat_std")?;
    if descriptor.stats_set {
        model.set_standardization(mean[0], std[0]);
    }
    model.set_feature_kind(descriptor.feature_kind);
    Ok(model)
}
