//! Random-projection estimate of the input-output Jacobian Frobenius norm.
//!
//! For a unit vector `v` drawn uniformly from the sphere in the `K`-dim
//! output space, `E[v v^T] = I / K`, so `K * ||J^T v||^2` is an unbiased
//! estimate of `||J||_F^2`. Predictors without an analytic vector-Jacobian
//! product fall back to random input directions `u` and central
//! differences: `D * ||J u||^2` is unbiased for the same quantity.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::image::ImageTensor;
use crate::path_metrics::{argmax, summarize_gaussian, MetricSummary, PredictionTrace};
use crate::paths::InterpolationPath;
use crate::rng::stream_rng;

pub const DEFAULT_PROJECTIONS: usize = 10;
/// Projection count used for large-image models.
pub const LARGE_IMAGE_PROJECTIONS: usize = 20;
pub const DEFAULT_BATCH: usize = 400;
pub const DEFAULT_FD_EPS: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutputTarget {
    Logits,
    Probs,
}

impl fmt::Display for OutputTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputTarget::Logits => "logits",
            OutputTarget::Probs => "probs",
        })
    }
}

impl FromStr for OutputTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logits" => Ok(OutputTarget::Logits),
            "probs" => Ok(OutputTarget::Probs),
            other => Err(Error::invalid(format!("unknown output target {other:?}"))),
        }
    }
}

/// A model mapping a flattened input to `K` outputs.
pub trait Predictor {
    fn input_dim(&self) -> usize;

    fn num_outputs(&self) -> usize;

    fn target(&self) -> OutputTarget;

    fn predict(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// `J(x)^T v`, when the predictor can compute it analytically.
    fn vjp(&self, _x: &[f64], _v: &[f64]) -> Option<Result<Vec<f64>>> {
        None
    }

    fn predict_batch(&self, batch: &[ImageTensor]) -> Result<Vec<Vec<f64>>> {
        batch.iter().map(|img| self.predict(img.as_slice())).collect()
    }
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn input_dim(&self) -> usize {
        (**self).input_dim()
    }
    fn num_outputs(&self) -> usize {
        (**self).num_outputs()
    }
    fn target(&self) -> OutputTarget {
        (**self).target()
    }
    fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        (**self).predict(x)
    }
    fn vjp(&self, x: &[f64], v: &[f64]) -> Option<Result<Vec<f64>>> {
        (**self).vjp(x, v)
    }
}

/// Hides a predictor's analytic VJP so only forward evaluations are used.
#[derive(Debug, Clone)]
pub struct BlackBox<P>(pub P);

impl<P: Predictor> Predictor for BlackBox<P> {
    fn input_dim(&self) -> usize {
        self.0.input_dim()
    }
    fn num_outputs(&self) -> usize {
        self.0.num_outputs()
    }
    fn target(&self) -> OutputTarget {
        self.0.target()
    }
    fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.0.predict(x)
    }
}

fn check_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::invalid(format!("{what} has length {got}, expected {want}")));
    }
    Ok(())
}

/// Row-major `(rows, cols)` matrix times vector.
fn matvec(m: &[f64], rows: usize, cols: usize, x: &[f64]) -> Vec<f64> {
    m.chunks_exact(cols)
        .take(rows)
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

/// Transposed product `m^T y` for a row-major `(rows, cols)` matrix.
fn matvec_t(m: &[f64], cols: usize, y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; cols];
    for (row, &yi) in m.chunks_exact(cols).zip(y) {
        for (o, a) in out.iter_mut().zip(row) {
            *o += a * yi;
        }
    }
    out
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// `(diag(p) - p p^T) v`, the softmax Jacobian (symmetric) applied to `v`.
fn softmax_jacobian_apply(p: &[f64], v: &[f64]) -> Vec<f64> {
    let pv: f64 = p.iter().zip(v).map(|(a, b)| a * b).sum();
    p.iter().zip(v).map(|(pi, vi)| pi * (vi - pv)).collect()
}

/// VJP of `x -> W x + b` (logits) or `x -> softmax(W x + b)` (probs).
///
/// `weights` is row-major `(K, D)`.
pub fn vjp_linear_softmax(
    weights: &[f64],
    bias: &[f64],
    x: &[f64],
    v: &[f64],
    target: OutputTarget,
) -> Result<Vec<f64>> {
    let k = bias.len();
    let d = x.len();
    if k == 0 || d == 0 {
        return Err(Error::invalid("empty weights or input"));
    }
    check_len("weights", weights.len(), k * d)?;
    check_len("output vector", v.len(), k)?;
    let g = match target {
        OutputTarget::Logits => v.to_vec(),
        OutputTarget::Probs => {
            let mut z = matvec(weights, k, d, x);
            for (zi, bi) in z.iter_mut().zip(bias) {
                *zi += bi;
            }
            softmax_jacobian_apply(&softmax(&z), v)
        }
    };
    Ok(matvec_t(weights, d, &g))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearPredictor {
    /// Row-major `(K, D)`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub target: OutputTarget,
}

impl LinearPredictor {
    pub fn new(weights: Vec<f64>, bias: Vec<f64>, target: OutputTarget) -> Result<Self> {
        if bias.is_empty() || weights.is_empty() || !weights.len().is_multiple_of(bias.len()) {
            return Err(Error::invalid("weights must be a nonempty (K, D) matrix with K biases"));
        }
        Ok(Self {
            weights,
            bias,
            target,
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// Reads a `(K, D + 1)` container tensor whose last column is the bias.
    pub fn from_tensor(data: &[f64], shape: &[usize], target: OutputTarget) -> Result<Self> {
        let &[k, cols] = shape else {
            return Err(Error::invalid(format!(
                "linear weights must have shape [K, D+1], got {shape:?}"
            )));
        };
        if cols < 2 || data.len() != k * cols {
            return Err(Error::invalid("linear weight tensor is malformed"));
        }
        let mut weights = Vec::with_capacity(k * (cols - 1));
        let mut bias = Vec::with_capacity(k);
        for row in data.chunks_exact(cols) {
            weights.extend_from_slice(&row[..cols - 1]);
            bias.push(row[cols - 1]);
        }
        Self::new(weights, bias, target)
    }

    pub fn to_tensor(&self) -> (Vec<f64>, Vec<usize>) {
        let d = self.input_dim();
        let mut data = Vec::with_capacity(self.bias.len() * (d + 1));
        for (row, b) in self.weights.chunks_exact(d).zip(&self.bias) {
            data.extend_from_slice(row);
            data.push(*b);
        }
        (data, vec![self.bias.len(), d + 1])
    }
}

impl Predictor for LinearPredictor {
    fn input_dim(&self) -> usize {
        self.weights.len() / self.bias.len()
    }

    fn num_outputs(&self) -> usize {
        self.bias.len()
    }

    fn target(&self) -> OutputTarget {
        self.target
    }

    fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("input", x.len(), self.input_dim())?;
        let mut z = matvec(&self.weights, self.bias.len(), x.len(), x);
        for (zi, bi) in z.iter_mut().zip(&self.bias) {
            *zi += bi;
        }
        Ok(match self.target {
            OutputTarget::Logits => z,
            OutputTarget::Probs => softmax(&z),
        })
    }

    fn vjp(&self, x: &[f64], v: &[f64]) -> Option<Result<Vec<f64>>> {
        Some(vjp_linear_softmax(&self.weights, &self.bias, x, v, self.target))
    }
}

/// One tanh hidden layer followed by a linear head (and softmax for `Probs`).
#[derive(Debug, Clone, PartialEq)]
pub struct MlpPredictor {
    pub input_dim: usize,
    pub hidden: usize,
    pub outputs: usize,
    /// `(hidden, input_dim)`
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// `(outputs, hidden)`
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub target: OutputTarget,
}

impl MlpPredictor {
    /// Random initialization with `N(0, 1/fan_in)` weights and zero biases.
    pub fn init(input_dim: usize, hidden: usize, outputs: usize, target: OutputTarget, seed: u64) -> Self {
        let mut rng = stream_rng(seed, 0);
        let mut draw = |n: usize, fan_in: usize| -> Vec<f64> {
            let scale = 1.0 / (fan_in as f64).sqrt();
            (0..n)
                .map(|_| scale * Distribution::<f64>::sample(&StandardNormal, &mut rng))
                .collect()
        };
        let w1 = draw(hidden * input_dim, input_dim);
        let w2 = draw(outputs * hidden, hidden);
        Self {
            input_dim,
            hidden,
            outputs,
            w1,
            b1: vec![0.0; hidden],
            w2,
            b2: vec![0.0; outputs],
            target,
        }
    }

    fn hidden_activations(&self, x: &[f64]) -> Vec<f64> {
        let mut h = matvec(&self.w1, self.hidden, self.input_dim, x);
        for (hi, bi) in h.iter_mut().zip(&self.b1) {
            *hi = (*hi + bi).tanh();
        }
        h
    }

    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len("input", x.len(), self.input_dim)?;
        let h = self.hidden_activations(x);
        let mut z = matvec(&self.w2, self.outputs, self.hidden, &h);
        for (zi, bi) in z.iter_mut().zip(&self.b2) {
            *zi += bi;
        }
        Ok(z)
    }

    /// Flat container layout: `[D, H, K, W1, b1, W2, b2]`, shape `[len]`.
    pub fn to_tensor(&self) -> (Vec<f64>, Vec<usize>) {
        let mut data = vec![self.input_dim as f64, self.hidden as f64, self.outputs as f64];
        data.extend_from_slice(&self.w1);
        data.extend_from_slice(&self.b1);
        data.extend_from_slice(&self.w2);
        data.extend_from_slice(&self.b2);
        let len = data.len();
        (data, vec![len])
    }

    pub fn from_tensor(data: &[f64], shape: &[usize], target: OutputTarget) -> Result<Self> {
        if shape.len() != 1 || data.len() < 3 || data.len() != shape[0] {
            return Err(Error::invalid(format!(
                "mlp weights must be a flat [len] tensor, got shape {shape:?}"
            )));
        }
        let dims: Vec<usize> = data[..3]
            .iter()
            .map(|&v| {
                if v >= 1.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(Error::invalid(format!("mlp dimension {v} is not a positive integer")))
                }
            })
            .collect::<Result<_>>()?;
        let (d, h, k) = (dims[0], dims[1], dims[2]);
        let want = 3 + h * d + h + k * h + k;
        check_len("mlp weight tensor", data.len(), want)?;
        let mut rest = &data[3..];
        let mut take = |n: usize| {
            let (head, tail) = rest.split_at(n);
            rest = tail;
            head.to_vec()
        };
        Ok(Self {
            input_dim: d,
            hidden: h,
            outputs: k,
            w1: take(h * d),
            b1: take(h),
            w2: take(k * h),
            b2: take(k),
            target,
        })
    }
}

impl Predictor for MlpPredictor {
    fn input_dim(&self) -> usize {
        self.input_dim
    }

    fn num_outputs(&self) -> usize {
        self.outputs
    }

    fn target(&self) -> OutputTarget {
        self.target
    }

    fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z = self.logits(x)?;
        Ok(match self.target {
            OutputTarget::Logits => z,
            OutputTarget::Probs => softmax(&z),
        })
    }

    fn vjp(&self, x: &[f64], v: &[f64]) -> Option<Result<Vec<f64>>> {
        Some((|| {
            check_len("input", x.len(), self.input_dim)?;
            check_len("output vector", v.len(), self.outputs)?;
            let g = match self.target {
                OutputTarget::Logits => v.to_vec(),
                OutputTarget::Probs => softmax_jacobian_apply(&softmax(&self.logits(x)?), v),
            };
            let h = self.hidden_activations(x);
            let mut gh = matvec_t(&self.w2, self.hidden, &g);
            for (g, a) in gh.iter_mut().zip(&h) {
                *g *= 1.0 - a * a;
            }
            Ok(matvec_t(&self.w1, self.input_dim, &gh))
        })())
    }
}

/// Full-batch gradient descent on softmax cross-entropy.
pub fn train_mlp(
    model: &mut MlpPredictor,
    images: &[ImageTensor],
    labels: &[u32],
    epochs: usize,
    learning_rate: f64,
) -> Result<()> {
    if images.len() != labels.len() || images.is_empty() {
        return Err(Error::invalid("training set needs matching, nonempty images and labels"));
    }
    if let Some(&l) = labels.iter().find(|&&l| l as usize >= model.outputs) {
        return Err(Error::invalid(format!("label {l} outside {} classes", model.outputs)));
    }
    let (d, hd, k) = (model.input_dim, model.hidden, model.outputs);
    let scale = 1.0 / images.len() as f64;
    for _ in 0..epochs {
        let mut gw1 = vec![0.0; hd * d];
        let mut gb1 = vec![0.0; hd];
        let mut gw2 = vec![0.0; k * hd];
        let mut gb2 = vec![0.0; k];
        for (img, &label) in images.iter().zip(labels) {
            let x = img.as_slice();
            check_len("input", x.len(), d)?;
            let h = model.hidden_activations(x);
            let mut dz = softmax(&model.logits(x)?);
            dz[label as usize] -= 1.0;
            for (o, &dzo) in dz.iter().enumerate() {
                gb2[o] += dzo;
                for (j, &hj) in h.iter().enumerate() {
                    gw2[o * hd + j] += dzo * hj;
                }
            }
            let mut dh = matvec_t(&model.w2, hd, &dz);
            for (g, a) in dh.iter_mut().zip(&h) {
                *g *= 1.0 - a * a;
            }
            for (j, &dhj) in dh.iter().enumerate() {
                gb1[j] += dhj;
                let row = &mut gw1[j * d..(j + 1) * d];
                for (g, xi) in row.iter_mut().zip(x) {
                    *g += dhj * xi;
                }
            }
        }
        let step = learning_rate * scale;
        for (p, g) in model
            .w1
            .iter_mut()
            .zip(&gw1)
            .chain(model.b1.iter_mut().zip(&gb1))
            .chain(model.w2.iter_mut().zip(&gw2))
            .chain(model.b2.iter_mut().zip(&gb2))
        {
            *p -= step * g;
        }
    }
    Ok(())
}

/// Class probabilities, applying softmax when the predictor emits logits.
pub fn class_probabilities<P: Predictor + ?Sized>(predictor: &P, x: &[f64]) -> Result<Vec<f64>> {
    let out = predictor.predict(x)?;
    Ok(match predictor.target() {
        OutputTarget::Probs => out,
        OutputTarget::Logits => softmax(&out),
    })
}

pub fn accuracy<P: Predictor + ?Sized>(predictor: &P, images: &[ImageTensor], labels: &[u32]) -> Result<(u64, u64)> {
    let mut correct = 0;
    for (img, &l) in images.iter().zip(labels) {
        if argmax(&predictor.predict(img.as_slice())?) == l as usize {
            correct += 1;
        }
    }
    Ok((correct, images.len() as u64))
}

/// Evaluates the predictor on every image of a path.
pub fn trace_path<P: Predictor + ?Sized>(
    predictor: &P,
    path: &InterpolationPath,
    path_id: impl Into<String>,
) -> Result<PredictionTrace> {
    let rows = path
        .images
        .iter()
        .map(|img| class_probabilities(predictor, img.as_slice()))
        .collect::<Result<Vec<_>>>()?;
    PredictionTrace::from_rows(path_id, &rows)
}

/// Central difference `(f(x + eps u) - f(x - eps u)) / (2 eps)`.
pub fn fd_directional_derivative<P: Predictor + ?Sized>(
    predictor: &P,
    x: &[f64],
    u: &[f64],
    eps: f64,
) -> Result<Vec<f64>> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::invalid(format!("finite-difference step {eps} must be > 0")));
    }
    check_len("direction", u.len(), x.len())?;
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("direction norm {norm} is not 1")));
    }
    let plus: Vec<f64> = x.iter().zip(u).map(|(a, b)| a + eps * b).collect();
    let minus: Vec<f64> = x.iter().zip(u).map(|(a, b)| a - eps * b).collect();
    let fp = predictor.predict(&plus)?;
    let fm = predictor.predict(&minus)?;
    Ok(fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * eps)).collect())
}

fn unit_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianConfig {
    pub n_proj: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub fd_eps: f64,
}

impl Default for JacobianConfig {
    fn default() -> Self {
        Self {
            n_proj: DEFAULT_PROJECTIONS,
            batch_size: DEFAULT_BATCH,
            seed: 0,
            fd_eps: DEFAULT_FD_EPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacobianEstimate {
    pub frobenius_norm: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub n_estimates: usize,
    /// Summary of the per-projection squared-norm estimates.
    pub squared: MetricSummary,
    /// Whether the analytic VJP (rather than finite differences) was used.
    pub analytic: bool,
}

/// One squared-norm estimate per `(sample, projection)`, ordered by sample
/// then projection. Stream `sample * n_proj + projection` seeds each draw.
pub fn squared_norm_estimates<P: Predictor + ?Sized>(
    predictor: &P,
    batch: &[ImageTensor],
    config: &JacobianConfig,
) -> Result<(Vec<f64>, bool)> {
    if config.n_proj == 0 || config.batch_size == 0 {
        return Err(Error::invalid("n_proj and batch size must be at least 1"));
    }
    if batch.len() != config.batch_size {
        return Err(Error::invalid(format!(
            "batch holds {} images but batch size is {}",
            batch.len(),
            config.batch_size
        )));
    }
    let k = predictor.num_outputs();
    let d = predictor.input_dim();
    let mut out = Vec::with_capacity(config.n_proj * batch.len());
    let mut analytic = true;
    for (s, img) in batch.iter().enumerate() {
        let x = img.as_slice();
        check_len("image", x.len(), d)?;
        for j in 0..config.n_proj {
            let mut rng = stream_rng(config.seed, (s * config.n_proj + j) as u64);
            let v = unit_vector(&mut rng, k);
            let e = match predictor.vjp(x, &v) {
                Some(jt_v) => {
                    let jt_v = jt_v?;
                    k as f64 * jt_v.iter().map(|g| g * g).sum::<f64>()
                }
                None => {
                    analytic = false;
                    let u = unit_vector(&mut rng, d);
                    let ju = fd_directional_derivative(predictor, x, &u, config.fd_eps)?;
                    d as f64 * ju.iter().map(|g| g * g).sum::<f64>()
                }
            };
            out.push(e);
        }
    }
    Ok((out, analytic))
}

pub fn estimate_jacobian_norm<P: Predictor + ?Sized>(
    predictor: &P,
    batch: &[ImageTensor],
    config: &JacobianConfig,
) -> Result<JacobianEstimate> {
    let (estimates, analytic) = squared_norm_estimates(predictor, batch, config)?;
    let squared = summarize_gaussian(&estimates)?;
    Ok(JacobianEstimate {
        frobenius_norm: squared.mean.max(0.0).sqrt(),
        ci95_low: squared.ci95_low.max(0.0).sqrt(),
        ci95_high: squared.ci95_high.max(0.0).sqrt(),
        n_estimates: estimates.len(),
        squared,
        analytic,
    })
}
