//! Noise synthesis and the noise catalog.
//!
//! Color noises (white, pink, red) are generated by frequency-domain shaping
//! of seeded Gaussian noise, so their spectral slopes are exact by
//! construction. Recorded noise types (movement, internal, ambient) are
//! user-supplied files; for data-free runs the catalog ships synthetic
//! stand-ins — parametric sketches that mimic each source's coarse spectral
//! and temporal character, not the real recordings.

mod color;
mod psd;
mod standin;

pub use color::{gen_pink, gen_red, gen_white};
pub use psd::{psd_slope, welch_psd, WelchPsd};

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::signal::{read_wav, resample, SignalError, Waveform};

#[derive(Error, Debug)]
pub enum NoiseError {
    #[error("invalid band: {0}")]
    InvalidBand(String),
    #[error("unknown noise type: {0}")]
    UnknownNoise(String),
    #[error("catalog schema error: {0}")]
    Schema(String),
    #[error("duplicate noise name: {0}")]
    DuplicateName(String),
    #[error("missing noise asset: {0}")]
    MissingAsset(PathBuf),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Source taxonomy of a noise type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grouping {
    Color,
    Movement,
    Internal,
    Ambient,
}

impl fmt::Display for Grouping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Grouping::Color => "color",
            Grouping::Movement => "movement",
            Grouping::Internal => "internal",
            Grouping::Ambient => "ambient",
        };
        f.write_str(s)
    }
}

impl FromStr for Grouping {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "color" => Ok(Grouping::Color),
            "movement" => Ok(Grouping::Movement),
            "internal" => Ok(Grouping::Internal),
            "ambient" => Ok(Grouping::Ambient),
            other => Err(format!("unknown grouping {other:?}")),
        }
    }
}

/// Length class of a noise type. Long noises cover the whole recording,
/// short ones are placed at a random offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DurationClass {
    Short,
    Long,
}

impl fmt::Display for DurationClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DurationClass::Short => "short",
            DurationClass::Long => "long",
        })
    }
}

impl FromStr for DurationClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "short" => Ok(DurationClass::Short),
            "long" => Ok(DurationClass::Long),
            other => Err(format!("unknown duration class {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NoiseSource {
    Synthetic,
    File(PathBuf),
}

/// One noise type: identifier, source taxonomy, duration class, and where
/// its audio comes from.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub name: String,
    pub grouping: Grouping,
    pub duration_class: DurationClass,
    pub source: NoiseSource,
}

impl NoiseSpec {
    /// Validates that canonical names keep their catalog grouping and
    /// duration class.
    pub fn new(
        name: impl Into<String>,
        grouping: Grouping,
        duration_class: DurationClass,
        source: NoiseSource,
    ) -> Result<Self, NoiseError> {
        let name = name.into();
        if let Some(&(_, g, d)) = CANONICAL_TYPES.iter().find(|(n, _, _)| *n == name) {
            if g != grouping || d != duration_class {
                return Err(NoiseError::Schema(format!(
                    "noise {name:?} must be {g}/{d}, got {grouping}/{duration_class}"
                )));
            }
        } else if source == NoiseSource::Synthetic {
            return Err(NoiseError::Schema(format!(
                "no synthetic generator for non-canonical noise {name:?}"
            )));
        }
        Ok(Self { name, grouping, duration_class, source })
    }
}

/// The 21 canonical noise types: name, grouping, duration class.
pub const CANONICAL_TYPES: [(&str, Grouping, DurationClass); 21] = [
    ("white", Grouping::Color, DurationClass::Long),
    ("pink", Grouping::Color, DurationClass::Long),
    ("red", Grouping::Color, DurationClass::Long),
    ("sensor_movement", Grouping::Movement, DurationClass::Short),
    ("body_movement", Grouping::Movement, DurationClass::Short),
    ("deep_breathing", Grouping::Internal, DurationClass::Long),
    ("fast_breathing", Grouping::Internal, DurationClass::Long),
    ("coughing", Grouping::Internal, DurationClass::Short),
    ("digestive_sound", Grouping::Internal, DurationClass::Short),
    ("talking", Grouping::Ambient, DurationClass::Long),
    ("door_open_close", Grouping::Ambient, DurationClass::Short),
    ("phone_ringing", Grouping::Ambient, DurationClass::Long),
    ("music", Grouping::Ambient, DurationClass::Long),
    ("water_flow", Grouping::Ambient, DurationClass::Long),
    ("tv", Grouping::Ambient, DurationClass::Long),
    ("dishwasher", Grouping::Ambient, DurationClass::Long),
    ("washing_machine", Grouping::Ambient, DurationClass::Long),
    ("kettle", Grouping::Ambient, DurationClass::Long),
    ("vacuum_cleaner", Grouping::Ambient, DurationClass::Long),
    ("dog_barking", Grouping::Ambient, DurationClass::Short),
    ("bird_singing", Grouping::Ambient, DurationClass::Long),
];

/// Ordered collection of noise specs with unique names.
#[derive(Debug, Clone, Default)]
pub struct NoiseCatalog {
    entries: Vec<NoiseSpec>,
    index: HashMap<String, usize>,
}

impl NoiseCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    /// The bundled default: all 21 canonical types, synthetic.
    pub fn builtin() -> Self {
        let mut cat = Self::new();
        for (name, grouping, duration) in CANONICAL_TYPES {
            cat.insert(NoiseSpec::new(name, grouping, duration, NoiseSource::Synthetic).unwrap())
                .unwrap();
        }
        cat
    }

    pub fn insert(&mut self, spec: NoiseSpec) -> Result<(), NoiseError> {
        if self.index.contains_key(&spec.name) {
            return Err(NoiseError::DuplicateName(spec.name));
        }
        self.index.insert(spec.name.clone(), self.entries.len());
        self.entries.push(spec);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&NoiseSpec> {
        self.index.get(name).map(|&i| &self.entries[i])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Specs in insertion (manifest) order.
    pub fn entries(&self) -> &[NoiseSpec] {
        &self.entries
    }

    /// Produces the audio for a noise type, deterministic in `seed`.
    ///
    /// Synthetic entries are generated at exactly `requested_samples`;
    /// file-backed entries are read and resampled to `rate` at their natural
    /// length (placement and loop policy are the mixer's job).
    pub fn render(
        &self,
        name: &str,
        rate: u32,
        requested_samples: usize,
        seed: u64,
    ) -> Result<Waveform, NoiseError> {
        let spec = self
            .get(name)
            .ok_or_else(|| NoiseError::UnknownNoise(name.to_string()))?;
        match &spec.source {
            NoiseSource::Synthetic => render_synthetic(name, requested_samples, rate, seed),
            NoiseSource::File(path) => {
                let w = read_wav(path)?;
                Ok(resample(&w, rate)?)
            }
        }
    }
}

fn render_synthetic(name: &str, n: usize, rate: u32, seed: u64) -> Result<Waveform, NoiseError> {
    match name {
        "white" => Ok(gen_white(n, rate, seed)),
        "pink" => Ok(gen_pink(n, rate, seed)),
        "red" => Ok(gen_red(n, rate, seed)),
        other => standin::gen_standin(other, n, rate, seed)
            .ok_or_else(|| NoiseError::UnknownNoise(other.to_string())),
    }
}

/// Loads a catalog from a CSV manifest with header
/// `name,grouping,duration_class,source`. The `source` column holds either
/// the literal `synthetic` or a path (relative paths resolve against `dir`).
pub fn catalog_load(dir: impl AsRef<Path>, manifest: impl AsRef<Path>) -> Result<NoiseCatalog, NoiseError> {
    let dir = dir.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(manifest.as_ref())?;

    let headers = reader.headers()?.clone();
    let expected = ["name", "grouping", "duration_class", "source"];
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(NoiseError::Schema(format!(
            "manifest header must be {:?}, got {:?}",
            expected.join(","),
            got.join(",")
        )));
    }

    let mut catalog = NoiseCatalog::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != 4 {
            return Err(NoiseError::Schema(format!(
                "expected 4 columns, got {}",
                record.len()
            )));
        }
        let name = record[0].to_string();
        let grouping = Grouping::from_str(&record[1]).map_err(NoiseError::Schema)?;
        let duration = DurationClass::from_str(&record[2]).map_err(NoiseError::Schema)?;
        let source = match &record[3] {
            "synthetic" => NoiseSource::Synthetic,
            path => {
                let p = Path::new(path);
                let resolved = if p.is_absolute() { p.to_path_buf() } else { dir.join(p) };
                if !resolved.is_file() {
                    return Err(NoiseError::MissingAsset(resolved));
                }
                NoiseSource::File(resolved)
            }
        };
        catalog.insert(NoiseSpec::new(name, grouping, duration, source)?)?;
    }
    Ok(catalog)
}
