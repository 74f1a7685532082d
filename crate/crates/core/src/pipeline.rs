//! Desk-scale end-to-end run: synthetic blobs, a small zoo of built-in MLPs,
//! amplitude paths, traces, per-path metrics and probit regressions. Every
//! stage goes through the command-line file formats.

use std::path::{Path, PathBuf};

use crate::cli::{self, read_manifest, read_path_metrics};
use crate::error::Result;
use crate::image::batch_from_images;
use crate::io;
use crate::jacobian::{accuracy, train_mlp, trace_path, MlpPredictor, OutputTarget};
use crate::paths::{lambda_grid, PathMode, DEFAULT_STEPS, SMALL_IMAGE_CUTOFF};
use crate::robustness_stats::{AccuracyRecord, MetricRecord, ValueKind};
use crate::synthetic::blob_dataset;

pub const ID_DATASET: &str = "id";
pub const OOD_DATASET: &str = "noise";
pub const HFF_METRIC: &str = "hff";
pub const CD_METRIC: &str = "cd";

#[derive(Debug, Clone, PartialEq)]
pub struct ToyConfig {
    pub seed: u64,
    pub shape: (usize, usize, usize),
    pub n_train: usize,
    pub n_test: usize,
    pub blob_noise: f64,
    pub n_paths: usize,
    pub steps: usize,
    pub cutoff: f64,
    /// `(group name, hidden width)`; each group trains one model per entry
    /// of `epochs`.
    pub groups: Vec<(String, usize)>,
    pub epochs: Vec<usize>,
    pub learning_rate: f64,
    /// Standard deviation of the Gaussian-noise shift used as OOD data.
    pub ood_sigma: f64,
}

impl Default for ToyConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            shape: (1, 16, 16),
            n_train: 200,
            n_test: 400,
            blob_noise: 1.5,
            n_paths: 200,
            steps: DEFAULT_STEPS,
            cutoff: SMALL_IMAGE_CUTOFF,
            groups: vec![("narrow".into(), 4), ("wide".into(), 24)],
            epochs: vec![2, 8, 30],
            learning_rate: 0.05,
            ood_sigma: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSummary {
    pub model_id: String,
    pub group: String,
    pub id_accuracy: f64,
    pub ood_accuracy: f64,
    pub mean_hff: f64,
    pub mean_cd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyReport {
    pub models: Vec<ModelSummary>,
    /// Every per-path `(hff, cd)` pair across all models.
    pub path_values: Vec<(f64, usize)>,
    /// Files written, in creation order.
    pub outputs: Vec<PathBuf>,
    /// Messages from the `regress` runs.
    pub regressions: Vec<String>,
}

fn arg(p: &Path) -> String {
    p.display().to_string()
}

/// Runs the whole pipeline inside `dir`.
pub fn run_toy_pipeline(dir: &Path, config: &ToyConfig) -> Result<ToyReport> {
    let mut outputs = Vec::new();
    // One draw so train and test share class templates; the split is disjoint.
    let (mut train, mut train_labels) = blob_dataset(
        config.n_train + config.n_test,
        2,
        config.shape,
        config.blob_noise,
        config.seed,
    )?;
    let test = train.split_off(config.n_train);
    let test_labels = train_labels.split_off(config.n_train);
    let (c, h, w) = config.shape;
    let d = c * h * w;

    let images_path = dir.join("test_images.tnsr");
    let labels_path = dir.join("test_labels.csv");
    let (data, shape) = batch_from_images(&test)?;
    io::write_tensor_f64(&images_path, &data, &shape)?;
    io::write_labels(&labels_path, &test_labels)?;
    outputs.extend([images_path.clone(), labels_path.clone()]);
    // Paths and metrics read the f32-rounded copy so every stage sees the
    // same pixels.
    let test = crate::image::images_from_batch(&io::read_tensor_f64(&images_path)?.0, &shape)?;

    let ood_path = dir.join("ood_images.tnsr");
    cli::run_args([
        "fourier-robustness",
        "corrupt",
        "--images",
        &arg(&images_path),
        "--kind",
        "gaussian-noise",
        "--param",
        &config.ood_sigma.to_string(),
        "--seed",
        &config.seed.to_string(),
        "--out",
        &arg(&ood_path),
    ])?;
    outputs.push(ood_path.clone());
    let (ood_data, ood_shape) = io::read_tensor_f64(&ood_path)?;
    let ood = crate::image::images_from_batch(&ood_data, &ood_shape)?;

    let paths_dir = dir.join("paths");
    cli::run_args([
        "fourier-robustness",
        "gen-paths",
        "--images",
        &arg(&images_path),
        "--labels",
        &arg(&labels_path),
        "--mode",
        &PathMode::Amplitude.to_string(),
        "--class-relation",
        "any",
        "--cutoff",
        &config.cutoff.to_string(),
        "--steps",
        &config.steps.to_string(),
        "--n-paths",
        &config.n_paths.to_string(),
        "--seed",
        &config.seed.to_string(),
        "--out",
        &arg(&paths_dir),
    ])?;
    let manifest = read_manifest(paths_dir.join("manifest.csv"))?;
    outputs.push(paths_dir.join("manifest.csv"));
    let paths = manifest
        .iter()
        .map(|(id, spec, file)| {
            let (data, shape) = io::read_tensor_f64(paths_dir.join(file))?;
            let images = crate::image::images_from_batch(&data, &shape)?;
            outputs.push(paths_dir.join(file));
            let lambdas = lambda_grid(spec.steps)?;
            Ok((id.clone(), crate::paths::InterpolationPath { images, lambdas }))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut accuracies = Vec::new();
    let mut metric_records = Vec::new();
    let mut models = Vec::new();
    let mut path_values = Vec::new();
    for (g, (group, hidden)) in config.groups.iter().enumerate() {
        for (e, &epochs) in config.epochs.iter().enumerate() {
            let model_id = format!("{group}-e{epochs}");
            let mut model = MlpPredictor::init(d, *hidden, 2, OutputTarget::Probs, config.seed + (g * 100 + e) as u64);
            train_mlp(&mut model, &train, &train_labels, epochs, config.learning_rate)?;
            let (weights, wshape) = model.to_tensor();
            let weights_path = dir.join("models").join(format!("{model_id}.tnsr"));
            io::write_tensor_f64(&weights_path, &weights, &wshape)?;
            outputs.push(weights_path.clone());
            // Evaluate the stored (f32) weights, as an external consumer would.
            let (wd, ws) = io::read_tensor_f64(&weights_path)?;
            let model = MlpPredictor::from_tensor(&wd, &ws, OutputTarget::Probs)?;

            let traces = paths
                .iter()
                .map(|(id, path)| trace_path(&model, path, id.clone()))
                .collect::<Result<Vec<_>>>()?;
            let traces_path = dir.join("traces").join(format!("{model_id}.csv"));
            io::write_traces(&traces_path, &traces)?;
            let metrics_path = dir.join("metrics").join(format!("{model_id}.csv"));
            cli::run_args([
                "fourier-robustness",
                "path-metrics",
                "--traces",
                &arg(&traces_path),
                "--out",
                &arg(&metrics_path),
            ])?;
            outputs.extend([traces_path, metrics_path.clone()]);
            let per_path = read_path_metrics(&metrics_path)?;
            let n = per_path.len() as f64;
            let mean_hff = per_path.iter().map(|p| p.1).sum::<f64>() / n;
            let mean_cd = per_path.iter().map(|p| p.2 as f64).sum::<f64>() / n;
            path_values.extend(per_path.iter().map(|p| (p.1, p.2)));

            let (id_ok, id_n) = accuracy(&model, &test, &test_labels)?;
            let (ood_ok, ood_n) = accuracy(&model, &ood, &test_labels)?;
            for (dataset, correct, total) in [(ID_DATASET, id_ok, id_n), (OOD_DATASET, ood_ok, ood_n)] {
                accuracies.push(AccuracyRecord {
                    model_id: model_id.clone(),
                    group: group.clone(),
                    dataset_id: dataset.into(),
                    correct,
                    total,
                });
            }
            for (name, value) in [(HFF_METRIC, mean_hff), (CD_METRIC, mean_cd)] {
                metric_records.push(MetricRecord {
                    model_id: model_id.clone(),
                    metric_name: name.into(),
                    value,
                    value_kind: ValueKind::Raw,
                });
            }
            models.push(ModelSummary {
                model_id,
                group: group.clone(),
                id_accuracy: id_ok as f64 / id_n as f64,
                ood_accuracy: ood_ok as f64 / ood_n as f64,
                mean_hff,
                mean_cd,
            });
        }
    }

    let acc_path = dir.join("accuracies.csv");
    let met_path = dir.join("model_metrics.csv");
    io::write_accuracies(&acc_path, &accuracies)?;
    io::write_metrics(&met_path, &metric_records)?;
    outputs.extend([acc_path.clone(), met_path.clone()]);

    let mut regressions = Vec::new();
    for x in [crate::robustness_stats::ID_ACCURACY, HFF_METRIC] {
        let stem = if x == HFF_METRIC { "fit_hff" } else { "fit_id" };
        let fit = dir.join(format!("{stem}.csv"));
        let svg = dir.join(format!("{stem}.svg"));
        regressions.push(cli::run_args([
            "fourier-robustness",
            "regress",
            "--accuracies",
            &arg(&acc_path),
            "--metrics",
            &arg(&met_path),
            "--x",
            x,
            "--id-dataset",
            ID_DATASET,
            "--ood",
            OOD_DATASET,
            "--group-by",
            "group",
            "--out",
            &arg(&fit),
            "--svg",
            &arg(&svg),
        ])?);
        outputs.extend([fit, svg]);
    }
    Ok(ToyReport {
        models,
        path_values,
        outputs,
        regressions,
    })
}
