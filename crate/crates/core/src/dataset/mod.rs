//! Dataset construction: crossing clean base recordings with the noise
//! catalog and SNR ladder, emitting mixed WAV files plus a CSV manifest.
//!
//! Per-row seeds are derived with FNV-1a from
//! `master_seed | base_id | noise_name | snr`, so adding noise types or SNR
//! levels later never perturbs existing rows, and rebuilding with the same
//! recipe reproduces byte-identical files.

mod manifest;
mod physionet;
mod surrogate;

pub use manifest::{DatasetManifest, ManifestRow, Split};
pub use physionet::load_physionet;
pub use surrogate::{
    gen_surrogate_at_rate, gen_surrogate_heart_sound, paper_surrogate_bases, surrogate_bases,
    PAPER_TEST_IDS, PAPER_TRAIN_IDS,
};

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mix::{mix_at_snr, LoopPolicy, MixError, MixRequest, Placement};
use crate::noise::{DurationClass, NoiseCatalog, NoiseError};
use crate::rng;
use crate::signal::{normalize_amplitude, resample, write_wav, SignalError, Waveform};

/// Base recordings shorter than this are classed as short-duration signals.
pub const SHORT_SIGNAL_THRESHOLD_S: f64 = 5.0;
/// Length of synthesized short-duration noise events.
pub const SHORT_NOISE_SECONDS: f64 = 1.0;
/// The ten SNR levels of the standard recipe, in dB.
pub const DEFAULT_SNR_LADDER: [f64; 10] =
    [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 40.0];

#[derive(Error, Debug)]
pub enum DatasetError {
    #[error("recipe error: {0}")]
    Recipe(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("train/test leakage: {0}")]
    Leakage(String),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Mix(#[from] MixError),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Binary diagnosis label. On disk and in PhysioNet reference files this is
/// `-1` (normal) / `+1` (abnormal).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeartClass {
    Normal,
    Abnormal,
}

impl HeartClass {
    pub fn label_value(self) -> i8 {
        match self {
            HeartClass::Normal => -1,
            HeartClass::Abnormal => 1,
        }
    }

    pub fn from_label_value(v: i8) -> Option<Self> {
        match v {
            -1 => Some(HeartClass::Normal),
            1 => Some(HeartClass::Abnormal),
            _ => None,
        }
    }
}

impl fmt::Display for HeartClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HeartClass::Normal => "normal",
            HeartClass::Abnormal => "abnormal",
        })
    }
}

impl FromStr for HeartClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "normal" => Ok(HeartClass::Normal),
            "abnormal" => Ok(HeartClass::Abnormal),
            other => Err(format!("unknown class {other:?}")),
        }
    }
}

/// One clean source recording.
#[derive(Debug, Clone)]
pub struct BaseRecording {
    pub id: u32,
    pub class_label: HeartClass,
    /// Free text, e.g. "Aortic stenosis" or a PhysioNet stem.
    pub subtype: String,
    pub waveform: Waveform,
}

impl BaseRecording {
    /// Short iff duration < [`SHORT_SIGNAL_THRESHOLD_S`].
    pub fn duration_class(&self) -> DurationClass {
        if self.waveform.duration_seconds() < SHORT_SIGNAL_THRESHOLD_S {
            DurationClass::Short
        } else {
            DurationClass::Long
        }
    }
}

/// Everything needed to build a dataset deterministically.
#[derive(Debug, Clone)]
pub struct DatasetRecipe {
    pub bases: Vec<BaseRecording>,
    pub catalog: NoiseCatalog,
    pub snr_levels_db: Vec<f64>,
    pub train_base_ids: BTreeSet<u32>,
    pub test_base_ids: BTreeSet<u32>,
    pub master_seed: u64,
    /// Working rate; bases are resampled here before mixing.
    pub sample_rate: u32,
}

impl DatasetRecipe {
    fn validate(&self) -> Result<(), DatasetError> {
        if self.bases.is_empty() {
            return Err(DatasetError::Recipe("no base recordings".into()));
        }
        if self.catalog.is_empty() {
            return Err(DatasetError::Recipe("noise catalog is empty".into()));
        }
        if self.snr_levels_db.is_empty() {
            return Err(DatasetError::Recipe("no SNR levels".into()));
        }
        if let Some(snr) = self.snr_levels_db.iter().find(|s| !s.is_finite()) {
            return Err(DatasetError::Recipe(format!("non-finite SNR level {snr}")));
        }
        let mut seen = BTreeSet::new();
        for base in &self.bases {
            if !seen.insert(base.id) {
                return Err(DatasetError::Recipe(format!("duplicate base id {}", base.id)));
            }
        }
        if let Some(id) = self.train_base_ids.intersection(&self.test_base_ids).next() {
            return Err(DatasetError::Leakage(format!(
                "base id {id} appears in both train and test sets"
            )));
        }
        for base in &self.bases {
            if !self.train_base_ids.contains(&base.id) && !self.test_base_ids.contains(&base.id)
            {
                return Err(DatasetError::Recipe(format!(
                    "base id {} is in neither the train nor the test set",
                    base.id
                )));
            }
        }
        Ok(())
    }
}

/// Formats a float the shortest way that round-trips (`-10`, `2.5`).
pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Per-row seed: FNV-1a over `master|base|noise|snr`.
pub fn row_seed(master_seed: u64, base_id: u32, noise_name: &str, snr_db: f64) -> u64 {
    let key = format!("{master_seed}|{base_id}|{noise_name}|{}", fmt_f64(snr_db));
    rng::fnv1a(key.as_bytes())
}

/// Summary of a build, serialized as the `recipe.json` sidecar.
#[derive(Debug, Serialize, Deserialize)]
pub struct RecipeSidecar {
    pub master_seed: u64,
    pub sample_rate: u32,
    pub snr_levels_db: Vec<f64>,
    pub noise_names: Vec<String>,
    pub base_ids: Vec<u32>,
    pub train_base_ids: Vec<u32>,
    pub test_base_ids: Vec<u32>,
    pub rows: usize,
}

/// Executes the recipe: one mixed WAV per `(base, noise, snr)` triple, plus
/// `manifest.csv` and a `recipe.json` sidecar under `out_dir`.
pub fn build_dataset(
    recipe: &DatasetRecipe,
    out_dir: impl AsRef<Path>,
) -> Result<DatasetManifest, DatasetError> {
    recipe.validate()?;
    let out_dir = out_dir.as_ref();
    let wav_dir = out_dir.join("wavs");
    std::fs::create_dir_all(&wav_dir)?;

    let rate = recipe.sample_rate;
    let prepared: Vec<(u32, HeartClass, Waveform)> = recipe
        .bases
        .iter()
        .map(|base| {
            let resampled = resample(&base.waveform, rate)?;
            let normalized = normalize_amplitude(&resampled)?;
            Ok::<_, DatasetError>((base.id, base.class_label, normalized))
        })
        .collect::<Result<_, _>>()?;

    struct RowSpec<'a> {
        recording_id: u32,
        base_id: u32,
        class_label: HeartClass,
        clean: &'a Waveform,
        noise_name: &'a str,
        noise_grouping: crate::noise::Grouping,
        noise_duration: DurationClass,
        snr_db: f64,
        seed: u64,
        split: Split,
        filename: String,
    }

    let mut specs = Vec::new();
    let mut recording_id = 0u32;
    for (base_id, class_label, clean) in &prepared {
        let split = if recipe.train_base_ids.contains(base_id) {
            Split::Train
        } else {
            Split::Test
        };
        for noise in recipe.catalog.entries() {
            for &snr_db in &recipe.snr_levels_db {
                recording_id += 1;
                specs.push(RowSpec {
                    recording_id,
                    base_id: *base_id,
                    class_label: *class_label,
                    clean,
                    noise_name: &noise.name,
                    noise_grouping: noise.grouping,
                    noise_duration: noise.duration_class,
                    snr_db,
                    seed: row_seed(recipe.master_seed, *base_id, &noise.name, snr_db),
                    split,
                    filename: format!(
                        "b{:03}__{}__snr{}.wav",
                        base_id,
                        noise.name,
                        fmt_f64(snr_db)
                    ),
                });
            }
        }
    }

    let results: Vec<(ManifestRow, usize)> = specs
        .par_iter()
        .map(|spec| {
            let requested = match spec.noise_duration {
                DurationClass::Long => spec.clean.len(),
                DurationClass::Short => {
                    ((SHORT_NOISE_SECONDS * rate as f64).round() as usize).min(spec.clean.len())
                }
            };
            let noise = recipe.catalog.render(
                spec.noise_name,
                rate,
                requested,
                rng::derive_seed(spec.seed, "noise"),
            )?;
            let (placement, loop_policy) = match spec.noise_duration {
                DurationClass::Long => (Placement::FullOverlap, LoopPolicy::Tile),
                DurationClass::Short => (
                    Placement::RandomOffset { seed: rng::derive_seed(spec.seed, "offset") },
                    LoopPolicy::Crop,
                ),
            };
            let mixed = mix_at_snr(&MixRequest {
                clean: spec.clean.clone(),
                noise,
                snr_db: spec.snr_db,
                placement,
                loop_policy,
            })?;
            let clipped = write_wav(&mixed.mixed, wav_dir.join(&spec.filename))?;
            Ok::<_, DatasetError>((
                ManifestRow {
                    recording_id: spec.recording_id,
                    base_id: spec.base_id,
                    class_label: spec.class_label,
                    noise_name: spec.noise_name.to_string(),
                    noise_grouping: spec.noise_grouping,
                    noise_duration_class: spec.noise_duration,
                    snr_db: spec.snr_db,
                    offset_samples: mixed.offset_samples as u64,
                    gain: mixed.gain,
                    seed: spec.seed,
                    split: spec.split,
                    path: format!("wavs/{}", spec.filename),
                },
                clipped,
            ))
        })
        .collect::<Result<_, _>>()?;

    let clipped_total: usize = results.iter().map(|(_, c)| c).sum();
    if clipped_total > 0 {
        log::warn!(
            "hard-clipped {clipped_total} samples across {} files while writing 16-bit PCM",
            results.len()
        );
    }

    let manifest = DatasetManifest::new(results.into_iter().map(|(row, _)| row).collect());
    manifest.save_csv(out_dir.join("manifest.csv"))?;

    let sidecar = RecipeSidecar {
        master_seed: recipe.master_seed,
        sample_rate: rate,
        snr_levels_db: recipe.snr_levels_db.clone(),
        noise_names: recipe.catalog.entries().iter().map(|s| s.name.clone()).collect(),
        base_ids: recipe.bases.iter().map(|b| b.id).collect(),
        train_base_ids: recipe.train_base_ids.iter().copied().collect(),
        test_base_ids: recipe.test_base_ids.iter().copied().collect(),
        rows: manifest.rows().len(),
    };
    std::fs::write(
        out_dir.join("recipe.json"),
        serde_json::to_string_pretty(&sidecar)?,
    )?;

    Ok(manifest)
}

/// Partitions a manifest by base id, guarding against leakage.
pub fn split_train_test(
    manifest: &DatasetManifest,
    train_ids: &BTreeSet<u32>,
    test_ids: &BTreeSet<u32>,
) -> Result<(DatasetManifest, DatasetManifest), DatasetError> {
    if let Some(id) = train_ids.intersection(test_ids).next() {
        return Err(DatasetError::Leakage(format!(
            "base id {id} appears in both split sets"
        )));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for row in manifest.rows() {
        if train_ids.contains(&row.base_id) {
            train.push(row.clone());
        } else if test_ids.contains(&row.base_id) {
            test.push(row.clone());
        } else {
            return Err(DatasetError::Recipe(format!(
                "base id {} covered by neither split set",
                row.base_id
            )));
        }
    }
    Ok((DatasetManifest::new(train), DatasetManifest::new(test)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::NoiseCatalog;

    fn tiny_recipe(dir_seed: u64) -> DatasetRecipe {
        let bases = surrogate_bases(2, 6.0, 2000, dir_seed);
        DatasetRecipe {
            bases,
            catalog: {
                let mut cat = NoiseCatalog::new();
                for name in ["white", "coughing"] {
                    let (n, g, d) = crate::noise::CANONICAL_TYPES
                        .iter()
                        .find(|(cn, _, _)| *cn == name)
                        .copied()
                        .unwrap();
                    cat.insert(
                        crate::noise::NoiseSpec::new(n, g, d, crate::noise::NoiseSource::Synthetic)
                            .unwrap(),
                    )
                    .unwrap();
                }
                cat
            },
            snr_levels_db: vec![0.0, 10.0],
            train_base_ids: [1].into_iter().collect(),
            test_base_ids: [2].into_iter().collect(),
            master_seed: 77,
            sample_rate: 2000,
        }
    }

    #[test]
    fn build_produces_cross_product_rows() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = build_dataset(&tiny_recipe(1), dir.path()).unwrap();
        assert_eq!(manifest.rows().len(), 2 * 2 * 2);
        for row in manifest.rows() {
            assert!(dir.path().join(&row.path).is_file(), "{}", row.path);
        }
        // Per base: |catalog| x |snrs| rows.
        let per_base = manifest.rows().iter().filter(|r| r.base_id == 1).count();
        assert_eq!(per_base, 4);
        assert!(dir.path().join("manifest.csv").is_file());
        assert!(dir.path().join("recipe.json").is_file());
    }

    #[test]
    fn single_row_recipe_and_rebuild_determinism() {
        // 1 base x 1 noise x 1 SNR -> exactly one row.
        let mut recipe = tiny_recipe(2);
        recipe.snr_levels_db = vec![5.0];
        recipe.bases.truncate(1);
        recipe.test_base_ids.clear();
        let one = {
            let mut cat = NoiseCatalog::new();
            cat.insert(recipe.catalog.entries()[0].clone()).unwrap();
            cat
        };
        let single = DatasetRecipe { catalog: one, ..recipe.clone() };
        let dir = tempfile::tempdir().unwrap();
        assert_eq!(build_dataset(&single, dir.path()).unwrap().rows().len(), 1);

        let dir_a = tempfile::tempdir().unwrap();
        let manifest_a = build_dataset(&recipe, dir_a.path()).unwrap();
        assert_eq!(manifest_a.rows().len(), 2);

        let dir_b = tempfile::tempdir().unwrap();
        let manifest_b = build_dataset(&recipe, dir_b.path()).unwrap();
        assert_eq!(manifest_a.rows(), manifest_b.rows());
        for row in manifest_a.rows() {
            let a = std::fs::read(dir_a.path().join(&row.path)).unwrap();
            let b = std::fs::read(dir_b.path().join(&row.path)).unwrap();
            assert_eq!(a, b, "{}", row.path);
        }
        let ma = std::fs::read(dir_a.path().join("manifest.csv")).unwrap();
        let mb = std::fs::read(dir_b.path().join("manifest.csv")).unwrap();
        assert_eq!(ma, mb);
    }

    #[test]
    fn short_noises_get_random_offsets() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = build_dataset(&tiny_recipe(3), dir.path()).unwrap();
        let offsets: Vec<u64> = manifest
            .rows()
            .iter()
            .filter(|r| r.noise_name == "coughing")
            .map(|r| r.offset_samples)
            .collect();
        assert!(offsets.iter().any(|&o| o > 0), "offsets {offsets:?}");
        assert!(manifest
            .rows()
            .iter()
            .filter(|r| r.noise_name == "white")
            .all(|r| r.offset_samples == 0));
    }

    #[test]
    fn recipe_validation_errors() {
        let mut r = tiny_recipe(4);
        r.catalog = NoiseCatalog::new();
        assert!(matches!(
            build_dataset(&r, tempfile::tempdir().unwrap().path()),
            Err(DatasetError::Recipe(_))
        ));

        let mut r = tiny_recipe(5);
        r.test_base_ids.clear(); // base 2 now uncovered
        assert!(matches!(
            build_dataset(&r, tempfile::tempdir().unwrap().path()),
            Err(DatasetError::Recipe(_))
        ));

        let mut r = tiny_recipe(6);
        r.train_base_ids.insert(2); // overlaps test
        assert!(matches!(
            build_dataset(&r, tempfile::tempdir().unwrap().path()),
            Err(DatasetError::Leakage(_))
        ));
    }

    #[test]
    fn row_seed_is_stable_and_distinct() {
        let a = row_seed(1, 2, "white", 0.0);
        assert_eq!(a, row_seed(1, 2, "white", 0.0));
        assert_ne!(a, row_seed(1, 2, "white", 5.0));
        assert_ne!(a, row_seed(1, 3, "white", 0.0));
        assert_ne!(a, row_seed(1, 2, "pink", 0.0));
        assert_ne!(a, row_seed(2, 2, "white", 0.0));
    }

    #[test]
    fn split_partition_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = build_dataset(&tiny_recipe(7), dir.path()).unwrap();

        let train: BTreeSet<u32> = [1].into_iter().collect();
        let test: BTreeSet<u32> = [2].into_iter().collect();
        let (tr, te) = split_train_test(&manifest, &train, &test).unwrap();
        assert_eq!(tr.rows().len(), 4);
        assert_eq!(te.rows().len(), 4);

        let all: BTreeSet<u32> = [1, 2].into_iter().collect();
        let (tr, te) = split_train_test(&manifest, &all, &BTreeSet::new()).unwrap();
        assert_eq!(tr.rows().len(), 8);
        assert!(te.rows().is_empty());

        assert!(matches!(
            split_train_test(&manifest, &all, &test),
            Err(DatasetError::Leakage(_))
        ));
        assert!(matches!(
            split_train_test(&manifest, &train, &BTreeSet::new()),
            Err(DatasetError::Recipe(_))
        ));
    }

    #[test]
    fn duration_class_threshold() {
        let short = BaseRecording {
            id: 1,
            class_label: HeartClass::Normal,
            subtype: String::new(),
            waveform: Waveform::new(vec![0.1; 6000], 2000).unwrap(), // 3 s
        };
        assert_eq!(short.duration_class(), DurationClass::Short);
        let long = BaseRecording {
            id: 2,
            class_label: HeartClass::Normal,
            subtype: String::new(),
            waveform: Waveform::new(vec![0.1; 20000], 2000).unwrap(), // 10 s
        };
        assert_eq!(long.duration_class(), DurationClass::Long);
    }

    #[test]
    fn fmt_f64_is_compact() {
        assert_eq!(fmt_f64(-10.0), "-10");
        assert_eq!(fmt_f64(2.5), "2.5");
        assert_eq!(fmt_f64(40.0), "40");
    }
}
