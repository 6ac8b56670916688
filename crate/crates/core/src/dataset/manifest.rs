//! The dataset manifest: one row per generated recording, the join key for
//! every faceted report.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{DatasetError, HeartClass};
use crate::noise::{DurationClass, Grouping};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

impl FromStr for Split {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

/// One generated recording. Field order is the CSV column order:
/// `recording_id,base_id,class_label,noise_name,noise_grouping,`
/// `noise_duration_class,snr_db,offset_samples,gain,seed,split,path`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub recording_id: u32,
    pub base_id: u32,
    pub class_label: HeartClass,
    pub noise_name: String,
    pub noise_grouping: Grouping,
    pub noise_duration_class: DurationClass,
    pub snr_db: f64,
    pub offset_samples: u64,
    pub gain: f64,
    pub seed: u64,
    pub split: Split,
    /// WAV path relative to the manifest's directory.
    pub path: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetManifest {
    rows: Vec<ManifestRow>,
}

impl DatasetManifest {
    pub fn new(rows: Vec<ManifestRow>) -> Self {
        Self { rows }
    }

    pub fn rows(&self) -> &[ManifestRow] {
        &self.rows
    }

    pub fn filter_split(&self, split: Split) -> DatasetManifest {
        DatasetManifest::new(self.rows.iter().filter(|r| r.split == split).cloned().collect())
    }

    pub fn find(&self, recording_id: u32) -> Option<&ManifestRow> {
        self.rows.iter().find(|r| r.recording_id == recording_id)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), DatasetError> {
        let mut writer = csv::Writer::from_path(path.as_ref())?;
        for row in &self.rows {
            writer.serialize(row)?;
        }
        writer.flush().map_err(DatasetError::Io)?;
        Ok(())
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self, DatasetError> {
        let mut reader = csv::Reader::from_path(path.as_ref())?;
        let mut rows = Vec::new();
        for record in reader.deserialize() {
            rows.push(record?);
        }
        Ok(Self { rows })
    }
}
