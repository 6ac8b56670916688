//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measured values (run with `--nocapture` to see them).
//!
//! The criteria are property- and trend-based: exact integer counts for the
//! standard recipe, SNR fidelity bounds, spectral-slope windows for the
//! color noises, exactness checks for the feature math and metrics,
//! finite-difference gradient agreement, the freeze contract, the
//! SNR-accuracy trend on surrogate data, the repeat protocol, and full
//! byte-level determinism.

use std::collections::HashMap;
use std::time::Instant;

use pcgbench_core::dataset::{
    build_dataset, paper_surrogate_bases, row_seed, surrogate_bases, DatasetRecipe, HeartClass,
    Split, DEFAULT_SNR_LADDER, PAPER_TEST_IDS, PAPER_TRAIN_IDS,
};
use pcgbench_core::experiment::{
    prepare, run_prepared, train_model, ClassifierKind, ExperimentConfig, FeatureBase,
    TrainedModel,
};
use pcgbench_core::features::{stft, StftConfig};
use pcgbench_core::mat::Mat;
use pcgbench_core::mix::{mix_at_snr, LoopPolicy, MixRequest, Placement};
use pcgbench_core::models::cnn::TENSOR_NAMES;
use pcgbench_core::models::{CnnModel, ForwardMode, FreezeMode, TrainConfig};
use pcgbench_core::noise::{gen_pink, gen_red, gen_white, psd_slope, DurationClass, NoiseCatalog};
use pcgbench_core::report::{
    facet_breakdown, repeat_experiment, ConfusionMatrix, Facet, Prediction,
};
use pcgbench_core::rng::{self, Gaussian};
use pcgbench_core::signal::{normalize_amplitude, Waveform};

fn pass(criterion: &str, detail: impl std::fmt::Display) {
    println!("acceptance {criterion}: PASS ({detail})");
}

fn paper_recipe(master_seed: u64) -> DatasetRecipe {
    DatasetRecipe {
        bases: paper_surrogate_bases(2000, master_seed),
        catalog: NoiseCatalog::builtin(),
        snr_levels_db: DEFAULT_SNR_LADDER.to_vec(),
        train_base_ids: PAPER_TRAIN_IDS.into_iter().collect(),
        test_base_ids: PAPER_TEST_IDS.into_iter().collect(),
        master_seed,
        sample_rate: 2000,
    }
}

/// Criterion 1: recipe counts. 16 bases x 21 noises x 10 SNRs = 3360 rows,
/// 210 per base, a 1680/1680 split, 80 test rows per noise type and 168 per
/// SNR level, all exact.
#[test]
fn criterion_01_recipe_counts() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let manifest = build_dataset(&paper_recipe(7), dir.path()).unwrap();

    assert_eq!(manifest.rows().len(), 3360);
    for base_id in 1..=16u32 {
        let per_base = manifest.rows().iter().filter(|r| r.base_id == base_id).count();
        assert_eq!(per_base, 210, "base {base_id}");
    }
    let train = manifest.filter_split(Split::Train);
    let test = manifest.filter_split(Split::Test);
    assert_eq!(train.rows().len(), 1680);
    assert_eq!(test.rows().len(), 1680);

    let mut per_noise: HashMap<&str, usize> = HashMap::new();
    for row in test.rows() {
        *per_noise.entry(row.noise_name.as_str()).or_default() += 1;
    }
    assert_eq!(per_noise.len(), 21);
    assert!(per_noise.values().all(|&n| n == 80), "{per_noise:?}");

    let mut per_snr: HashMap<String, usize> = HashMap::new();
    for row in test.rows() {
        *per_snr.entry(format!("{}", row.snr_db)).or_default() += 1;
    }
    assert_eq!(per_snr.len(), 10);
    assert!(per_snr.values().all(|&n| n == 168), "{per_snr:?}");

    // Both splits are class-balanced.
    for split in [&train, &test] {
        let normal = split
            .rows()
            .iter()
            .filter(|r| r.class_label == HeartClass::Normal)
            .count();
        assert_eq!(normal * 2, split.rows().len());
    }

    // Facet reports over one prediction per test row partition into
    // 21 noise-type groups of exactly 80 and 10 SNR groups of 168.
    let per_row_predictions: Vec<Prediction> = test
        .rows()
        .iter()
        .map(|r| Prediction {
            recording_id: r.recording_id,
            predicted: r.class_label.label_value(),
            truth: r.class_label.label_value(),
            duration_s: None,
        })
        .collect();
    let by_noise = facet_breakdown(&per_row_predictions, &manifest, Facet::NoiseType).unwrap();
    assert_eq!(by_noise.groups.len(), 21);
    assert!(by_noise.groups.iter().all(|g| g.n == 80));
    let by_snr = facet_breakdown(&per_row_predictions, &manifest, Facet::SnrDb).unwrap();
    assert_eq!(by_snr.groups.len(), 10);
    assert!(by_snr.groups.iter().all(|g| g.n == 168));

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 300, "took {elapsed:?}, budget 5 min");
    pass(
        "01 recipe-counts",
        format!("3360 rows, 210/base, 1680/1680, 80/noise, 168/snr in {elapsed:.2?}"),
    );
}

/// Criterion 2: measured SNR within +/-0.05 dB of target for 100 random
/// (base, noise, snr) triples.
#[test]
fn criterion_02_snr_fidelity() {
    let start = Instant::now();
    let bases: Vec<Waveform> = paper_surrogate_bases(2000, 3)
        .into_iter()
        .map(|b| normalize_amplitude(&b.waveform).unwrap())
        .collect();
    let catalog = NoiseCatalog::builtin();
    let specs = catalog.entries().to_vec();
    let mut r = rng::from_seed(2024);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let clean = &bases[rng::uniform_index(&mut r, bases.len() as u64) as usize];
        let spec = &specs[rng::uniform_index(&mut r, specs.len() as u64) as usize];
        let snr_db = DEFAULT_SNR_LADDER
            [rng::uniform_index(&mut r, DEFAULT_SNR_LADDER.len() as u64) as usize];
        let requested = match spec.duration_class {
            DurationClass::Long => clean.len(),
            DurationClass::Short => 2000.min(clean.len()),
        };
        let noise = catalog.render(&spec.name, 2000, requested, 5000 + i).unwrap();
        let (placement, loop_policy) = match spec.duration_class {
            DurationClass::Long => (Placement::FullOverlap, LoopPolicy::Tile),
            DurationClass::Short => {
                (Placement::RandomOffset { seed: 9000 + i }, LoopPolicy::Crop)
            }
        };
        let out = mix_at_snr(&MixRequest {
            clean: clean.clone(),
            noise,
            snr_db,
            placement,
            loop_policy,
        })
        .unwrap();
        let err = (out.measured_snr_db - snr_db).abs();
        worst = worst.max(err);
        assert!(
            err <= 0.05,
            "triple {i} ({}, snr {snr_db}): measured {} target {snr_db}",
            spec.name,
            out.measured_snr_db
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}, budget 1 min");
    pass(
        "02 snr-fidelity",
        format!("100 triples, worst |error| {worst:.2e} dB in {elapsed:.2?}"),
    );
}

/// Criterion 3: fitted PSD slopes 0/-3/-6 +/- 0.5 dB/octave over 20-800 Hz
/// at n = 2^18 for 10 seeds, strictly ordered per seed.
#[test]
fn criterion_03_colored_noise_slopes() {
    let start = Instant::now();
    let n = 1 << 18;
    let mut spans = [(f64::INFINITY, f64::NEG_INFINITY); 3];
    for seed in 0..10u64 {
        let white = psd_slope(&gen_white(n, 2000, seed), 20.0, 800.0).unwrap();
        let pink = psd_slope(&gen_pink(n, 2000, seed), 20.0, 800.0).unwrap();
        let red = psd_slope(&gen_red(n, 2000, seed), 20.0, 800.0).unwrap();
        assert!(white.abs() <= 0.5, "seed {seed}: white slope {white}");
        assert!((pink + 3.0).abs() <= 0.5, "seed {seed}: pink slope {pink}");
        assert!((red + 6.0).abs() <= 0.5, "seed {seed}: red slope {red}");
        assert!(
            white > pink && pink > red,
            "seed {seed}: ordering {white} {pink} {red}"
        );
        for (span, v) in spans.iter_mut().zip([white, pink, red]) {
            span.0 = span.0.min(v);
            span.1 = span.1.max(v);
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}, budget 1 min");
    pass(
        "03 colored-noise-slopes",
        format!(
            "white [{:.3}, {:.3}], pink [{:.3}, {:.3}], red [{:.3}, {:.3}] dB/oct in {elapsed:.2?}",
            spans[0].0, spans[0].1, spans[1].0, spans[1].1, spans[2].0, spans[2].1
        ),
    );
}

/// Criterion 4: mel anchors exact, frame count exact, per-frame Parseval to
/// 1e-9 relative on 50 random signals.
#[test]
fn criterion_04_feature_exactness() {
    let start = Instant::now();
    assert_eq!(pcgbench_core::features::mel_scale(0.0).unwrap(), 0.0);
    let direct_700 = 2595.0 * 2f64.log10();
    let m700 = pcgbench_core::features::mel_scale(700.0).unwrap();
    assert!((m700 - direct_700).abs() <= 1e-9 * direct_700);
    let direct_1000 = 2595.0 * (1.0 + 1000.0 / 700.0f64).log10();
    let m1000 = pcgbench_core::features::mel_scale(1000.0).unwrap();
    assert!((m1000 - direct_1000).abs() <= 1e-9 * direct_1000);

    let cfg = StftConfig::default();
    let w = Waveform::new(Gaussian::new(0).fill(10_000), 2000).unwrap();
    assert_eq!(stft(&w, &cfg).unwrap().frames(), 77);

    let window: Vec<f64> = (0..cfg.window_len)
        .map(|i| {
            0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / cfg.window_len as f64).cos()
        })
        .collect();
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let w = Waveform::new(Gaussian::new(seed).fill(2000), 2000).unwrap();
        let x = stft(&w, &cfg).unwrap();
        for frame in 0..x.frames() {
            let s = frame * cfg.hop;
            let time_energy: f64 = (0..cfg.window_len)
                .map(|i| {
                    let v = w.samples()[s + i] * window[i];
                    v * v
                })
                .sum();
            let mut freq_energy =
                x.get(0, frame).norm_sqr() + x.get(x.bins() - 1, frame).norm_sqr();
            for bin in 1..x.bins() - 1 {
                freq_energy += 2.0 * x.get(bin, frame).norm_sqr();
            }
            let expected = cfg.window_len as f64 * time_energy;
            let rel = (freq_energy - expected).abs() / expected;
            worst = worst.max(rel);
            assert!(rel <= 1e-9, "seed {seed} frame {frame}: rel {rel}");
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 30, "took {elapsed:?}, budget 30 s");
    pass(
        "04 feature-exactness",
        format!("mel anchors exact, 77 frames, worst Parseval rel {worst:.2e} in {elapsed:.2?}"),
    );
}

/// Criterion 5: central finite differences vs backprop on a 12x12-input CNN
/// across 5 seeds, max relative error < 1e-4, every layer type exercised
/// (conv, pool, dropout, dense, softmax head).
#[test]
fn criterion_05_gradient_correctness() {
    let start = Instant::now();
    let h = 1e-6;
    let mut max_rel: f64 = 0.0;
    for seed in 0..5u64 {
        let model = CnnModel::init(12, 12, seed).unwrap();
        let x = Mat::from_vec(12, 12, Gaussian::new(1000 + seed).fill(144));
        let mode = ForwardMode::Train { dropout_seed: 77 + seed };
        let label: i8 = if seed % 2 == 0 { 1 } else { -1 };
        let (_, grads) = model.example_gradients(&x, label, mode).unwrap();
        for (t_idx, name) in TENSOR_NAMES.iter().enumerate() {
            let len = model.params()[t_idx].len();
            let stride = (len / 8).max(1);
            for j in (0..len).step_by(stride) {
                let mut plus = model.clone();
                plus.params_mut()[t_idx][j] += h;
                let lp = plus.loss(&x, label, mode).unwrap();
                let mut minus = model.clone();
                minus.params_mut()[t_idx][j] -= h;
                let lm = minus.loss(&x, label, mode).unwrap();
                let fd = (lp - lm) / (2.0 * h);
                let an = grads[t_idx][j];
                let rel = (fd - an).abs() / fd.abs().max(an.abs()).max(1e-6);
                max_rel = max_rel.max(rel);
                assert!(
                    rel < 1e-4,
                    "seed {seed} tensor {name}[{j}]: fd {fd} vs analytic {an} (rel {rel})"
                );
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 120, "took {elapsed:?}, budget 2 min");
    pass(
        "05 gradient-correctness",
        format!("5 seeds, max relative error {max_rel:.2e} in {elapsed:.2?}"),
    );
}

/// Criterion 6: after 10 fine-tune epochs with freeze=all_but_dense, every
/// convolutional parameter is bit-identical to its pre-fine-tune value.
#[test]
fn criterion_06_freeze_contract() {
    let start = Instant::now();
    let mut model = CnnModel::init(16, 16, 4).unwrap();
    model.set_standardization(0.0, 1.0);
    let conv_before: Vec<Vec<f64>> = model.params()[..6].iter().map(|p| p.to_vec()).collect();
    let dense_before = model.params()[6].to_vec();

    let mut g = Gaussian::new(5);
    let data: Vec<(Mat, i8)> = (0..48)
        .map(|i| {
            let label: i8 = if i % 2 == 0 { -1 } else { 1 };
            let mut m = Mat::from_vec(16, 16, g.fill(256));
            if label > 0 {
                for y in 0..8 {
                    for x in 0..8 {
                        m.set(y, x, m.get(y, x) + 1.5);
                    }
                }
            }
            (m, label)
        })
        .collect();
    let cfg = TrainConfig {
        epochs: 10,
        batch_size: 16,
        freeze: FreezeMode::AllButDense,
        ..Default::default()
    };
    model.train(&data, &cfg).unwrap();

    for (idx, before) in conv_before.iter().enumerate() {
        let after = model.params()[idx];
        assert_eq!(&before[..], after, "tensor {} changed", TENSOR_NAMES[idx]);
        for (a, b) in before.iter().zip(after) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
    assert_ne!(dense_before, model.params()[6].to_vec(), "dense must update");
    let elapsed = start.elapsed();
    pass(
        "06 freeze-contract",
        format!("conv tensors bit-identical after 10 epochs in {elapsed:.2?}"),
    );
}

/// Criterion 7: recall/accuracy match hand-computed values exactly on 20
/// random confusion matrices; on a class-balanced surrogate test set the
/// accuracy equals the mean of the two recalls to 1e-12.
#[test]
fn criterion_07_metric_exactness() {
    let start = Instant::now();
    let mut r = rng::from_seed(4242);
    for case in 0..20 {
        let tp = rng::uniform_index(&mut r, 100) + 1;
        let fp = rng::uniform_index(&mut r, 100);
        let tn = rng::uniform_index(&mut r, 100) + 1;
        let fn_ = rng::uniform_index(&mut r, 100);
        let cm = ConfusionMatrix { tp, fp, tn, fn_ };
        let accuracy = (tp + tn) as f64 / (tp + fp + tn + fn_) as f64;
        let recall_abnormal = tp as f64 / (tp + fn_) as f64;
        let recall_normal = tn as f64 / (tn + fp) as f64;
        assert_eq!(cm.accuracy().unwrap(), accuracy, "case {case}");
        assert_eq!(cm.recall(HeartClass::Abnormal).unwrap(), recall_abnormal);
        assert_eq!(cm.recall(HeartClass::Normal).unwrap(), recall_normal);
    }

    // Class-balanced surrogate dataset: train a quick Mel-SVM and compare
    // accuracy against the mean of the recalls on its predictions.
    let dir = tempfile::tempdir().unwrap();
    let recipe = DatasetRecipe {
        bases: surrogate_bases(4, 10.0, 2000, 17),
        catalog: NoiseCatalog::builtin(),
        snr_levels_db: vec![0.0, 30.0],
        train_base_ids: [1, 2].into_iter().collect(),
        test_base_ids: [3, 4].into_iter().collect(),
        master_seed: 17,
        sample_rate: 2000,
    };
    build_dataset(&recipe, dir.path()).unwrap();
    let mut cfg = ExperimentConfig::new(
        dir.path().join("manifest.csv"),
        FeatureBase::Mel,
        ClassifierKind::Svm,
    );
    cfg.svm_epochs = 20;
    let prepared = prepare(&cfg).unwrap();
    let normal = prepared.test.iter().filter(|s| s.label == -1).count();
    assert_eq!(normal * 2, prepared.test.len(), "test set must be balanced");
    let predictions = run_prepared(&prepared, &cfg, 3).unwrap();
    let preds: Vec<i8> = predictions.iter().map(|p| p.predicted).collect();
    let truths: Vec<i8> = predictions.iter().map(|p| p.truth).collect();
    let cm = ConfusionMatrix::from_predictions(&preds, &truths).unwrap();
    let acc = cm.accuracy().unwrap();
    let mean_recall = (cm.recall(HeartClass::Normal).unwrap()
        + cm.recall(HeartClass::Abnormal).unwrap())
        / 2.0;
    assert!(
        (acc - mean_recall).abs() <= 1e-12,
        "accuracy {acc} vs mean recall {mean_recall}"
    );
    let elapsed = start.elapsed();
    pass(
        "07 metric-exactness",
        format!(
            "20 matrices exact; balanced accuracy == mean recall (diff {:.1e}) in {elapsed:.2?}",
            (acc - mean_recall).abs()
        ),
    );
}

/// Criterion 8: on the surrogate dataset a trained Mel-SVM shows the SNR
/// trend for 3 master seeds: mean accuracy over SNR {20,30,40} exceeds mean
/// accuracy over {-10,-5,0} by at least 10 percentage points, and accuracy
/// at SNR 40 is at least that at SNR -10.
#[test]
fn criterion_08_end_to_end_snr_trend() {
    let start = Instant::now();
    for master_seed in [101u64, 202, 303] {
        let dir = tempfile::tempdir().unwrap();
        build_dataset(&paper_recipe(master_seed), dir.path()).unwrap();
        let cfg = ExperimentConfig::new(
            dir.path().join("manifest.csv"),
            FeatureBase::Mel,
            ClassifierKind::Svm,
        );
        let prepared = prepare(&cfg).unwrap();
        let predictions =
            run_prepared(&prepared, &cfg, rng::derive_seed(master_seed, "train")).unwrap();
        let report = facet_breakdown(&predictions, &prepared.manifest, Facet::SnrDb).unwrap();
        let acc = |key: &str| -> f64 {
            report
                .group(key)
                .unwrap_or_else(|| panic!("missing snr group {key}"))
                .accuracy
        };
        let high = (acc("20") + acc("30") + acc("40")) / 3.0;
        let low = (acc("-10") + acc("-5") + acc("0")) / 3.0;
        assert!(
            high - low >= 0.10,
            "seed {master_seed}: high-SNR mean {high:.3} vs low-SNR mean {low:.3}"
        );
        assert!(
            acc("40") >= acc("-10"),
            "seed {master_seed}: acc(40)={:.3} < acc(-10)={:.3}",
            acc("40"),
            acc("-10")
        );
        println!(
            "  seed {master_seed}: low {low:.3}, high {high:.3}, acc(-10) {:.3}, acc(40) {:.3}",
            acc("-10"),
            acc("40")
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 600, "took {elapsed:?}, budget 10 min");
    pass("08 snr-trend", format!("3 master seeds in {elapsed:.2?}"));
}

/// Criterion 9: repeat_experiment with n = 10 reports mean and sample std
/// per cell; a constant predictor yields std exactly 0.
#[test]
fn criterion_09_repeat_protocol() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let recipe = DatasetRecipe {
        bases: surrogate_bases(4, 6.0, 2000, 23),
        catalog: NoiseCatalog::builtin(),
        snr_levels_db: vec![0.0],
        train_base_ids: [1, 2].into_iter().collect(),
        test_base_ids: [3, 4].into_iter().collect(),
        master_seed: 23,
        sample_rate: 2000,
    };
    let manifest = build_dataset(&recipe, dir.path()).unwrap();
    let test_rows: Vec<u32> = manifest
        .filter_split(Split::Test)
        .rows()
        .iter()
        .map(|r| r.recording_id)
        .collect();
    let by_id: HashMap<u32, i8> = manifest
        .rows()
        .iter()
        .map(|r| (r.recording_id, r.class_label.label_value()))
        .collect();

    // Constant predictor: always abnormal.
    let constant = |_seed: u64| -> Result<Vec<Prediction>, std::convert::Infallible> {
        Ok(test_rows
            .iter()
            .map(|&id| Prediction {
                recording_id: id,
                predicted: 1,
                truth: by_id[&id],
                duration_s: Some(6.0),
            })
            .collect())
    };
    let reports =
        repeat_experiment(10, 99, constant, &manifest, &[Facet::Overall, Facet::NoiseType])
            .unwrap();
    assert_eq!(reports.len(), 2);
    for report in &reports {
        assert_eq!(report.repeats, 10);
        for g in &report.groups {
            assert_eq!(g.accuracy_std, 0.0, "{} group {}", report.facet, g.key);
            assert_eq!(g.accuracy, 0.5); // balanced set, constant predictor
        }
    }

    // A seed-sensitive predictor must produce a nonzero std and the mean of
    // the per-repeat accuracies.
    let mut accs = Vec::new();
    let varying = |seed: u64| -> Result<Vec<Prediction>, std::convert::Infallible> {
        let flip = seed.is_multiple_of(3);
        Ok(test_rows
            .iter()
            .map(|&id| Prediction {
                recording_id: id,
                predicted: if flip { -by_id[&id] } else { by_id[&id] },
                truth: by_id[&id],
                duration_s: Some(6.0),
            })
            .collect())
    };
    let run = |seed: u64| {
        let preds = varying(seed).unwrap();
        let correct = preds.iter().filter(|p| p.predicted == p.truth).count();
        accs.push(correct as f64 / preds.len() as f64);
        Ok::<_, std::convert::Infallible>(preds)
    };
    let reports = repeat_experiment(10, 1234, run, &manifest, &[Facet::Overall]).unwrap();
    let mean = accs.iter().sum::<f64>() / accs.len() as f64;
    let g = &reports[0].groups[0];
    assert!((g.accuracy - mean).abs() <= 1e-12);
    let sample_std = (accs.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>()
        / (accs.len() - 1) as f64)
        .sqrt();
    assert!((g.accuracy_std - sample_std).abs() <= 1e-12);
    let elapsed = start.elapsed();
    pass(
        "09 repeat-protocol",
        format!("n=10 mean/std per cell, constant predictor std exactly 0, in {elapsed:.2?}"),
    );
}

/// Criterion 10: identical seeds reproduce byte-identical WAVs, manifests
/// and model files.
#[test]
fn criterion_10_determinism() {
    let start = Instant::now();
    let recipe = DatasetRecipe {
        bases: surrogate_bases(4, 6.0, 2000, 31),
        catalog: {
            let mut cat = NoiseCatalog::new();
            for name in ["pink", "coughing", "dishwasher"] {
                let (n, g, d) = pcgbench_core::noise::CANONICAL_TYPES
                    .iter()
                    .find(|(cn, _, _)| *cn == name)
                    .copied()
                    .unwrap();
                cat.insert(
                    pcgbench_core::noise::NoiseSpec::new(
                        n,
                        g,
                        d,
                        pcgbench_core::noise::NoiseSource::Synthetic,
                    )
                    .unwrap(),
                )
                .unwrap();
            }
            cat
        },
        snr_levels_db: vec![0.0, 20.0],
        train_base_ids: [1, 2].into_iter().collect(),
        test_base_ids: [3, 4].into_iter().collect(),
        master_seed: 31,
        sample_rate: 2000,
    };

    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let manifest_a = build_dataset(&recipe, dir_a.path()).unwrap();
    let manifest_b = build_dataset(&recipe, dir_b.path()).unwrap();
    assert_eq!(manifest_a.rows(), manifest_b.rows());
    assert_eq!(
        std::fs::read(dir_a.path().join("manifest.csv")).unwrap(),
        std::fs::read(dir_b.path().join("manifest.csv")).unwrap()
    );
    let mut wavs = 0;
    for row in manifest_a.rows() {
        let a = std::fs::read(dir_a.path().join(&row.path)).unwrap();
        let b = std::fs::read(dir_b.path().join(&row.path)).unwrap();
        assert_eq!(a, b, "wav bytes differ for {}", row.path);
        wavs += 1;
    }

    // SVM model bytes.
    let mut cfg = ExperimentConfig::new(
        dir_a.path().join("manifest.csv"),
        FeatureBase::Mel,
        ClassifierKind::Svm,
    );
    cfg.svm_epochs = 10;
    let prepared = prepare(&cfg).unwrap();
    let svm_a = dir_a.path().join("svm_a.pcgm");
    let svm_b = dir_a.path().join("svm_b.pcgm");
    for path in [&svm_a, &svm_b] {
        match train_model(&prepared, &cfg, 55).unwrap().model {
            TrainedModel::Svm(m) => m.save(path).unwrap(),
            TrainedModel::Cnn(_) => unreachable!(),
        }
    }
    assert_eq!(std::fs::read(&svm_a).unwrap(), std::fs::read(&svm_b).unwrap());

    // CNN model bytes (one epoch keeps this quick).
    let mut cnn_cfg = cfg.clone();
    cnn_cfg.model = ClassifierKind::Cnn;
    cnn_cfg.epochs = 1;
    cnn_cfg.batch_size = 8;
    let prepared_cnn = prepare(&cnn_cfg).unwrap();
    let cnn_a = dir_a.path().join("cnn_a.pcgm");
    let cnn_b = dir_a.path().join("cnn_b.pcgm");
    for path in [&cnn_a, &cnn_b] {
        match train_model(&prepared_cnn, &cnn_cfg, 56).unwrap().model {
            TrainedModel::Cnn(m) => m.save(path).unwrap(),
            TrainedModel::Svm(_) => unreachable!(),
        }
    }
    assert_eq!(std::fs::read(&cnn_a).unwrap(), std::fs::read(&cnn_b).unwrap());

    // Per-row seeds are stable under catalog extension: adding a noise type
    // leaves existing row seeds untouched by construction.
    let s = row_seed(31, 2, "pink", 20.0);
    assert_eq!(s, row_seed(31, 2, "pink", 20.0));

    let elapsed = start.elapsed();
    pass(
        "10 determinism",
        format!("{wavs} wavs + manifest + svm/cnn containers byte-identical in {elapsed:.2?}"),
    );
}
