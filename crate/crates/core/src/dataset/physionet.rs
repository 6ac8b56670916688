//! PhysioNet/CinC 2016 style corpus ingestion: a directory of WAV files plus
//! a reference CSV mapping file stems to labels.
//!
//! Reference rows are `stem,label[,quality]` with label -1 (normal) or
//! 1 (abnormal). A quality column value of `0` (or `unsure`) marks records
//! too noisy to label; those are excluded. WAV files without a reference row
//! are skipped with a warning rather than failing the whole load.

use std::path::Path;

use super::{BaseRecording, DatasetError, HeartClass};

const REFERENCE_NAMES: [&str; 3] = ["REFERENCE.csv", "REFERENCE-SQI.csv", "reference.csv"];

pub fn load_physionet(dir: impl AsRef<Path>) -> Result<Vec<BaseRecording>, DatasetError> {
    let dir = dir.as_ref();
    let reference = REFERENCE_NAMES
        .iter()
        .map(|name| dir.join(name))
        .find(|p| p.is_file())
        .ok_or_else(|| {
            DatasetError::Schema(format!(
                "no reference CSV ({}) in {}",
                REFERENCE_NAMES.join(" / "),
                dir.display()
            ))
        })?;

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(&reference)?;

    let mut recordings = Vec::new();
    let mut referenced = std::collections::BTreeSet::new();
    let mut next_id = 0u32;
    for (row_idx, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() < 2 {
            return Err(DatasetError::Schema(format!(
                "reference row {} has {} columns, need at least 2",
                row_idx + 1,
                record.len()
            )));
        }
        let stem = record[0].to_string();
        if row_idx == 0 && record[1].parse::<i8>().is_err() && stem == "stem" {
            continue; // tolerate a header line
        }
        let label: i8 = record[1].parse().map_err(|_| {
            DatasetError::Schema(format!(
                "reference row {}: label {:?} is not an integer",
                row_idx + 1,
                &record[1]
            ))
        })?;
        let class = HeartClass::from_label_value(label).ok_or_else(|| {
            DatasetError::Schema(format!(
                "reference row {}: label {label} outside {{-1, 1}}",
                row_idx + 1
            ))
        })?;
        referenced.insert(stem.clone());

        if let Some(quality) = record.get(2) {
            if quality == "0" || quality.eq_ignore_ascii_case("unsure") {
                log::info!("excluding unsure-quality recording {stem}");
                continue;
            }
        }

        let wav_path = dir.join(format!("{stem}.wav"));
        if !wav_path.is_file() {
            log::warn!("reference row {stem} has no wav file; skipping");
            continue;
        }
        next_id += 1;
        recordings.push(BaseRecording {
            id: next_id,
            class_label: class,
            subtype: stem,
            waveform: crate::signal::read_wav(&wav_path)?,
        });
    }

    // Flag stray audio so silently unlabeled data is visible.
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        if path.extension().is_some_and(|e| e == "wav") {
            let stem = path.file_stem().unwrap_or_default().to_string_lossy().to_string();
            if !referenced.contains(&stem) {
                log::warn!("wav file {stem} has no reference row; skipping");
            }
        }
    }

    Ok(recordings)
}
