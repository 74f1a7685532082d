//! Command-line surface. Every command validates its inputs completely
//! before it writes any output file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::corruptions::{corrupt_batch, CorruptionKind, CorruptionSpec};
use crate::error::{Error, Result};
use crate::image::{batch_from_images, images_from_batch, ImageTensor};
use crate::io::tables::{read_table, write_table};
use crate::io::{self, AxisLabels, GroupLine, ScatterPoint};
use crate::jacobian::{
    estimate_jacobian_norm, BlackBox, JacobianConfig, LinearPredictor, MlpPredictor,
    OutputTarget, Predictor, DEFAULT_FD_EPS,
};
use crate::path_metrics::{path_metrics, summarize_gaussian, DEFAULT_HFF_THRESHOLD};
use crate::paths::{
    generate_path, sample_path_specs, ClassRelation, PathMode, PathSpec, DEFAULT_STEPS,
    SMALL_IMAGE_CUTOFF, SMALL_IMAGE_PATH_COUNT,
};
use crate::robustness_stats::{grouped_regression, GroupBy, RegressionQuery, XSpec, DEFAULT_PROBIT_EPS};
use crate::shift_psd::{
    band_fractions, class_averaged_shift_psd, group_by_label, paired_shift_psd, radial_profile,
    BandEdges,
};

/// Prefix marking summary rows appended below per-path metric rows.
pub const SUMMARY_PREFIX: &str = "summary:";
/// Prefix marking configuration rows in metric output.
pub const CONFIG_PREFIX: &str = "config:";

#[derive(Debug, Parser)]
#[command(name = "fourier-robustness", version, about = "Fourier-sensitivity and robustness statistics toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample interpolation paths and write one tensor per path plus a manifest.
    GenPaths(GenPathsArgs),
    /// Apply a synthetic corruption to an image batch.
    Corrupt(CorruptArgs),
    /// Power spectral density of a distribution shift.
    PsdShift(PsdShiftArgs),
    /// High frequency fraction and consistent distance per trace.
    PathMetrics(PathMetricsArgs),
    /// Random-projection Jacobian Frobenius norm.
    Jacobian(JacobianArgs),
    /// Probit-domain OOD accuracy regression per group.
    Regress(RegressArgs),
    /// Summarize metric, fit and band tables as Markdown.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenPathsArgs {
    #[arg(long)]
    pub images: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, value_parser = parse_from_str::<PathMode>)]
    pub mode: PathMode,
    #[arg(long, default_value = "any", value_parser = parse_from_str::<ClassRelation>)]
    pub class_relation: ClassRelation,
    #[arg(long, default_value_t = SMALL_IMAGE_CUTOFF)]
    pub cutoff: f64,
    #[arg(long, default_value_t = DEFAULT_STEPS)]
    pub steps: usize,
    #[arg(long, default_value_t = SMALL_IMAGE_PATH_COUNT)]
    pub n_paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CorruptArgs {
    #[arg(long)]
    pub images: PathBuf,
    #[arg(long, value_parser = parse_from_str::<CorruptionKind>)]
    pub kind: CorruptionKind,
    #[arg(long)]
    pub param: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ShiftMode {
    Paired,
    ClassAveraged,
}

#[derive(Debug, Args)]
pub struct PsdShiftArgs {
    #[arg(long, value_enum)]
    pub mode: ShiftMode,
    /// Reference (in-distribution) images.
    #[arg(long)]
    pub a: PathBuf,
    /// Shifted images.
    #[arg(long)]
    pub b: PathBuf,
    #[arg(long)]
    pub labels_a: Option<PathBuf>,
    #[arg(long)]
    pub labels_b: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub pgm: Option<PathBuf>,
    #[arg(long)]
    pub bands: Option<PathBuf>,
    /// Radial profile CSV (`radius,mean_power,bins`).
    #[arg(long)]
    pub profile: Option<PathBuf>,
    #[arg(long)]
    pub edge_low_mid: Option<f64>,
    #[arg(long)]
    pub edge_mid_high: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PathMetricsArgs {
    #[arg(long)]
    pub traces: PathBuf,
    #[arg(long, default_value_t = DEFAULT_HFF_THRESHOLD)]
    pub hff_threshold: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PredictorKind {
    Linear,
    Mlp,
}

#[derive(Debug, Args)]
pub struct JacobianArgs {
    #[arg(long, value_enum)]
    pub predictor: PredictorKind,
    #[arg(long)]
    pub weights: PathBuf,
    #[arg(long)]
    pub images: PathBuf,
    #[arg(long, default_value_t = crate::jacobian::DEFAULT_PROJECTIONS)]
    pub nproj: usize,
    #[arg(long, default_value_t = crate::jacobian::DEFAULT_BATCH)]
    pub batch: usize,
    #[arg(long, default_value = "probs", value_parser = parse_from_str::<OutputTarget>)]
    pub target: OutputTarget,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Ignore the analytic VJP and use central differences.
    #[arg(long)]
    pub finite_differences: bool,
    #[arg(long, default_value_t = DEFAULT_FD_EPS)]
    pub fd_eps: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RegressArgs {
    #[arg(long)]
    pub accuracies: PathBuf,
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    /// `"ID accuracy"` or a metric name from the metrics table.
    #[arg(long, default_value = "ID accuracy")]
    pub x: String,
    /// Dataset id holding in-distribution accuracy.
    #[arg(long, default_value = "id")]
    pub id_dataset: String,
    #[arg(long)]
    pub ood: String,
    #[arg(long, default_value = "group", value_parser = parse_from_str::<GroupBy>)]
    pub group_by: GroupBy,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Output tables of `path-metrics` (repeatable).
    #[arg(long)]
    pub metrics: Vec<PathBuf>,
    /// Output tables of `regress` (repeatable).
    #[arg(long)]
    pub fit: Vec<PathBuf>,
    /// Output tables of `psd-shift --bands` (repeatable).
    #[arg(long)]
    pub bands: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_from_str<T: std::str::FromStr<Err = Error>>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Runs a command and returns a short human-readable summary.
pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::GenPaths(a) => gen_paths(&a),
        Command::Corrupt(a) => corrupt(&a),
        Command::PsdShift(a) => psd_shift(&a),
        Command::PathMetrics(a) => run_path_metrics(&a),
        Command::Jacobian(a) => jacobian(&a),
        Command::Regress(a) => regress(&a),
        Command::Report(a) => report(&a),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_args<I, T>(args: I) -> Result<String>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::invalid(e.to_string()))?;
    run(cli)
}

fn load_images(path: &Path) -> Result<Vec<ImageTensor>> {
    let (data, shape) = io::read_tensor_f64(path)?;
    images_from_batch(&data, &shape)
}

pub const MANIFEST_HEADER: [&str; 10] = [
    "path_id",
    "mode",
    "source_index",
    "target_index",
    "class_relation",
    "cutoff",
    "steps",
    "seed",
    "path_index",
    "file",
];

pub fn path_file_name(index: usize) -> String {
    format!("path_{index:05}.tnsr")
}

fn manifest_row(spec: &PathSpec) -> Vec<String> {
    vec![
        format!("p{:05}", spec.path_index),
        spec.mode.to_string(),
        spec.source_index.to_string(),
        spec.target_index.to_string(),
        spec.class_relation.to_string(),
        spec.cutoff.to_string(),
        spec.steps.to_string(),
        spec.seed.to_string(),
        spec.path_index.to_string(),
        path_file_name(spec.path_index),
    ]
}

fn gen_paths(a: &GenPathsArgs) -> Result<String> {
    let images = load_images(&a.images)?;
    let labels = io::read_labels(&a.labels)?;
    if labels.len() != images.len() {
        return Err(Error::invalid(format!(
            "{} images but {} labels",
            images.len(),
            labels.len()
        )));
    }
    let specs = sample_path_specs(
        &labels,
        a.n_paths,
        a.mode,
        a.class_relation,
        a.cutoff,
        a.steps,
        a.seed,
    )?;
    for spec in &specs {
        let path = generate_path(spec, &images)?;
        let (data, shape) = batch_from_images(&path.images)?;
        io::write_tensor_f64(a.out.join(path_file_name(spec.path_index)), &data, &shape)?;
    }
    write_table(
        a.out.join("manifest.csv"),
        &MANIFEST_HEADER,
        specs.iter().map(manifest_row).collect(),
    )?;
    Ok(format!("wrote {} {} paths to {}", specs.len(), a.mode, a.out.display()))
}

/// Reads back a `gen-paths` manifest as `(path_id, spec)` pairs.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<(String, PathSpec, String)>> {
    let path = path.as_ref();
    let (header, rows) = read_table(path)?;
    if header != MANIFEST_HEADER {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 1,
            message: format!("unexpected manifest header {}", header.join(",")),
        });
    }
    rows.into_iter()
        .map(|(line, r)| {
            let bad = |m: String| Error::Parse {
                path: path.display().to_string(),
                line,
                message: m,
            };
            let num = |i: usize| -> Result<u64> {
                r[i].parse().map_err(|_| bad(format!("bad {} {:?}", MANIFEST_HEADER[i], r[i])))
            };
            let spec = PathSpec {
                path_index: num(8)? as usize,
                mode: r[1].parse()?,
                source_index: num(2)? as usize,
                target_index: num(3)? as usize,
                class_relation: r[4].parse()?,
                cutoff: r[5].parse().map_err(|_| bad(format!("bad cutoff {:?}", r[5])))?,
                steps: num(6)? as usize,
                seed: num(7)?,
            };
            Ok((r[0].clone(), spec, r[9].clone()))
        })
        .collect()
}

fn corrupt(a: &CorruptArgs) -> Result<String> {
    let images = load_images(&a.images)?;
    let spec = CorruptionSpec::new(a.kind, a.param, a.seed);
    let out = corrupt_batch(&images, &spec)?;
    let (data, shape) = batch_from_images(&out)?;
    io::write_tensor_f64(&a.out, &data, &shape)?;
    Ok(format!("corrupted {} images with {}={}", out.len(), a.kind, a.param))
}

fn psd_shift(a: &PsdShiftArgs) -> Result<String> {
    let edges = match (a.edge_low_mid, a.edge_mid_high) {
        (None, None) => BandEdges::default(),
        (lo, hi) => {
            let d = BandEdges::default();
            BandEdges::new(lo.unwrap_or(d.low_mid), hi.unwrap_or(d.mid_high))?
        }
    };
    let images_a = load_images(&a.a)?;
    let images_b = load_images(&a.b)?;
    let map = match a.mode {
        ShiftMode::Paired => paired_shift_psd(&images_a, &images_b)?,
        ShiftMode::ClassAveraged => {
            let (Some(la), Some(lb)) = (&a.labels_a, &a.labels_b) else {
                return Err(Error::invalid("class-averaged mode needs --labels-a and --labels-b"));
            };
            let ga = group_by_label(&images_a, &io::read_labels(la)?)?;
            let gb = group_by_label(&images_b, &io::read_labels(lb)?)?;
            class_averaged_shift_psd(&ga, &gb)?
        }
    };
    // An all-zero shift has no band fractions; fail before writing anything.
    let fractions = if a.bands.is_some() {
        Some(band_fractions(&map, edges)?)
    } else {
        None
    };

    io::write_tensor_f64(&a.out, &map.power, &[map.height, map.width])?;
    if let Some(p) = &a.pgm {
        io::emit_pgm(&map, p)?;
    }
    if let (Some(p), Some(f)) = (&a.bands, fractions) {
        write_table(
            p,
            &["low", "mid", "high", "edge_low_mid", "edge_mid_high", "dominant"],
            vec![vec![
                f.low.to_string(),
                f.mid.to_string(),
                f.high.to_string(),
                edges.low_mid.to_string(),
                edges.mid_high.to_string(),
                f.dominant().to_string(),
            ]],
        )?;
    }
    if let Some(p) = &a.profile {
        write_table(
            p,
            &["radius", "mean_power", "bins"],
            radial_profile(&map)
                .into_iter()
                .map(|b| vec![b.center.to_string(), b.mean_power.to_string(), b.count.to_string()])
                .collect(),
        )?;
    }
    let mut msg = format!("shift psd over {} images", map.source_count);
    if let Some(f) = fractions {
        let _ = write!(msg, "; bands low={:.4} mid={:.4} high={:.4}", f.low, f.mid, f.high);
    }
    Ok(msg)
}

fn run_path_metrics(a: &PathMetricsArgs) -> Result<String> {
    let traces = io::read_traces(&a.traces)?;
    if traces.is_empty() {
        return Err(Error::invalid("trace file holds no paths"));
    }
    let metrics = traces
        .iter()
        .map(|t| path_metrics(t, a.hff_threshold))
        .collect::<Result<Vec<_>>>()?;
    let hffs: Vec<f64> = metrics.iter().map(|m| m.hff).collect();
    let cds: Vec<f64> = metrics.iter().map(|m| m.cd as f64).collect();
    let sh = summarize_gaussian(&hffs)?;
    let sc = summarize_gaussian(&cds)?;

    let mut rows: Vec<Vec<String>> = traces
        .iter()
        .zip(&metrics)
        .map(|(t, m)| vec![t.path_id.clone(), m.hff.to_string(), m.cd.to_string()])
        .collect();
    for (name, h, c) in [
        ("mean", sh.mean, sc.mean),
        ("std", sh.sample_std, sc.sample_std),
        ("n", sh.n as f64, sc.n as f64),
        ("ci95_low", sh.ci95_low, sc.ci95_low),
        ("ci95_high", sh.ci95_high, sc.ci95_high),
    ] {
        rows.push(vec![format!("{SUMMARY_PREFIX}{name}"), h.to_string(), c.to_string()]);
    }
    rows.push(vec![
        format!("{CONFIG_PREFIX}hff_threshold"),
        a.hff_threshold.to_string(),
        String::new(),
    ]);
    write_table(&a.out, &["path_id", "hff", "cd"], rows)?;
    Ok(format!(
        "{} paths: mean hff {:.4} [{:.4}, {:.4}], mean cd {:.2} [{:.2}, {:.2}]",
        traces.len(),
        sh.mean,
        sh.ci95_low,
        sh.ci95_high,
        sc.mean,
        sc.ci95_low,
        sc.ci95_high
    ))
}

/// Per-path `(path_id, hff, cd)` rows of a `path-metrics` table, skipping
/// summary and config rows.
pub fn read_path_metrics(path: impl AsRef<Path>) -> Result<Vec<(String, f64, usize)>> {
    let path = path.as_ref();
    let (_, rows) = read_table(path)?;
    rows.into_iter()
        .filter(|(_, r)| !r[0].starts_with(SUMMARY_PREFIX) && !r[0].starts_with(CONFIG_PREFIX))
        .map(|(line, r)| {
            let bad = || Error::Parse {
                path: path.display().to_string(),
                line,
                message: "malformed metric row".into(),
            };
            Ok((
                r[0].clone(),
                r.get(1).and_then(|v| v.parse().ok()).ok_or_else(bad)?,
                r.get(2).and_then(|v| v.parse().ok()).ok_or_else(bad)?,
            ))
        })
        .collect()
}

fn jacobian(a: &JacobianArgs) -> Result<String> {
    let (w, shape) = io::read_tensor_f64(&a.weights)?;
    let predictor: Box<dyn Predictor> = match a.predictor {
        PredictorKind::Linear => Box::new(LinearPredictor::from_tensor(&w, &shape, a.target)?),
        PredictorKind::Mlp => Box::new(MlpPredictor::from_tensor(&w, &shape, a.target)?),
    };
    let images = load_images(&a.images)?;
    if images.len() < a.batch {
        return Err(Error::invalid(format!(
            "batch size {} exceeds the {} images supplied",
            a.batch,
            images.len()
        )));
    }
    let config = JacobianConfig {
        n_proj: a.nproj,
        batch_size: a.batch,
        seed: a.seed,
        fd_eps: a.fd_eps,
    };
    let batch = &images[..a.batch];
    let est = if a.finite_differences {
        estimate_jacobian_norm(&BlackBox(&*predictor), batch, &config)?
    } else {
        estimate_jacobian_norm(&*predictor, batch, &config)?
    };
    let method = if est.analytic { "vjp" } else { "finite_difference" };
    write_table(
        &a.out,
        &[
            "predictor",
            "target",
            "method",
            "n_proj",
            "batch",
            "seed",
            "n_estimates",
            "frobenius_norm",
            "ci95_low",
            "ci95_high",
        ],
        vec![vec![
            format!("{:?}", a.predictor).to_lowercase(),
            a.target.to_string(),
            method.to_string(),
            a.nproj.to_string(),
            a.batch.to_string(),
            a.seed.to_string(),
            est.n_estimates.to_string(),
            est.frobenius_norm.to_string(),
            est.ci95_low.to_string(),
            est.ci95_high.to_string(),
        ]],
    )?;
    Ok(format!(
        "jacobian norm {:.6} [{:.6}, {:.6}] from {} estimates ({method}, {})",
        est.frobenius_norm, est.ci95_low, est.ci95_high, est.n_estimates, a.target
    ))
}

pub const FIT_HEADER: [&str; 10] = [
    "x",
    "x_transform",
    "ood",
    "group",
    "slope",
    "intercept",
    "r2",
    "n_models",
    "status",
    "note",
];
pub const AVERAGE_GROUP: &str = "__average__";

fn regress(a: &RegressArgs) -> Result<String> {
    let accuracies = io::read_accuracies(&a.accuracies)?;
    let metrics = match &a.metrics {
        Some(p) => io::read_metrics(p)?,
        None => Vec::new(),
    };
    let query = RegressionQuery {
        x: XSpec::parse(&a.x),
        id_dataset: a.id_dataset.clone(),
        ood_dataset: a.ood.clone(),
        group_by: a.group_by,
        probit_eps: DEFAULT_PROBIT_EPS,
    };
    let fit = grouped_regression(&accuracies, &metrics, &query)?;
    let transform = if fit.x_probit { "probit" } else { "raw" };
    let head = |group: &str| vec![fit.x_label.clone(), transform.to_string(), a.ood.clone(), group.to_string()];

    let mut rows = Vec::new();
    for g in &fit.per_group {
        let mut r = head(&g.group);
        r.extend([
            g.fit.slope.to_string(),
            g.fit.intercept.to_string(),
            g.fit.r2.to_string(),
            g.n_models.to_string(),
            "ok".into(),
            String::new(),
        ]);
        rows.push(r);
    }
    for s in &fit.skipped {
        let mut r = head(&s.group);
        r.extend([String::new(), String::new(), String::new(), String::new(), "skipped".into(), s.reason.clone()]);
        rows.push(r);
    }
    let mut avg = head(AVERAGE_GROUP);
    avg.extend([
        fit.averaged_m.to_string(),
        String::new(),
        fit.averaged_r2.to_string(),
        fit.per_group.iter().map(|g| g.n_models).sum::<usize>().to_string(),
        "average".into(),
        format!("unweighted mean over {} groups", fit.per_group.len()),
    ]);
    rows.push(avg);

    let svg = match &a.svg {
        Some(_) => {
            let points: Vec<ScatterPoint> = fit
                .points
                .iter()
                .map(|p| ScatterPoint {
                    x: p.x,
                    y: p.y,
                    group: p.group.clone(),
                    ci: Some(p.y_ci),
                })
                .collect();
            let lines: Vec<GroupLine> = fit
                .per_group
                .iter()
                .map(|g| GroupLine {
                    group: g.group.clone(),
                    slope: g.fit.slope,
                    intercept: g.fit.intercept,
                    r2: g.fit.r2,
                })
                .collect();
            let axes = AxisLabels {
                x: if fit.x_probit {
                    format!("probit({})", fit.x_label)
                } else {
                    fit.x_label.clone()
                },
                y: format!("probit({} accuracy)", a.ood),
            };
            Some(io::render_scatter_svg(&points, &lines, &axes)?)
        }
        None => None,
    };

    write_table(&a.out, &FIT_HEADER, rows)?;
    if let (Some(path), Some(svg)) = (&a.svg, svg) {
        io::write_file(path, svg)?;
    }
    let mut msg = format!(
        "{} vs {}: averaged m = {:.4}, averaged R2 = {:.4} over {} group(s)",
        fit.x_label,
        a.ood,
        fit.averaged_m,
        fit.averaged_r2,
        fit.per_group.len()
    );
    for s in &fit.skipped {
        let _ = write!(msg, "\nwarning: skipped group {}: {}", s.group, s.reason);
    }
    Ok(msg)
}

fn report(a: &ReportArgs) -> Result<String> {
    let mut md = String::from("# Robustness report\n");
    if !a.metrics.is_empty() {
        md.push_str("\n## Path metrics\n\n| table | paths | threshold | mean HFF | HFF 95% CI | mean CD | CD 95% CI |\n|---|---|---|---|---|---|---|\n");
        for p in &a.metrics {
            let (_, rows) = read_table(p)?;
            let find = |key: &str| rows.iter().find(|(_, r)| r[0] == key).map(|(_, r)| r.clone());
            let get = |key: &str, col: usize| -> String {
                find(&format!("{SUMMARY_PREFIX}{key}"))
                    .and_then(|r| r.get(col).and_then(|v| v.parse::<f64>().ok()))
                    .map_or("-".into(), |v| format!("{v:.4}"))
            };
            let threshold = find(&format!("{CONFIG_PREFIX}hff_threshold")).map_or("-".into(), |r| r[1].clone());
            let n = rows
                .iter()
                .filter(|(_, r)| !r[0].starts_with(SUMMARY_PREFIX) && !r[0].starts_with(CONFIG_PREFIX))
                .count();
            let _ = writeln!(
                md,
                "| {} | {n} | {threshold} | {} | [{}, {}] | {} | [{}, {}] |",
                p.display(),
                get("mean", 1),
                get("ci95_low", 1),
                get("ci95_high", 1),
                get("mean", 2),
                get("ci95_low", 2),
                get("ci95_high", 2)
            );
        }
    }
    if !a.fit.is_empty() {
        md.push_str("\n## Regressions\n\n| x | transform | OOD set | group | m | b | R² | models | status |\n|---|---|---|---|---|---|---|---|---|\n");
        for p in &a.fit {
            let (header, rows) = read_table(p)?;
            if header != FIT_HEADER {
                return Err(Error::invalid(format!("{} is not a regress output table", p.display())));
            }
            for (_, r) in rows {
                let _ = writeln!(md, "| {} |", r[..9].join(" | "));
            }
        }
    }
    if !a.bands.is_empty() {
        md.push_str("\n## Shift spectra\n\n| table | low | mid | high | dominant |\n|---|---|---|---|---|\n");
        for p in &a.bands {
            let (_, rows) = read_table(p)?;
            for (_, r) in rows {
                let _ = writeln!(md, "| {} | {} | {} | {} | {} |", p.display(), r[0], r[1], r[2], r[5]);
            }
        }
    }
    match &a.out {
        Some(out) => {
            io::write_file(out, &md)?;
            Ok(format!("wrote report to {}", out.display()))
        }
        None => Ok(md),
    }
}
