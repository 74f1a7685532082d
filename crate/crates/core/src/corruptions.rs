//! Synthetic stand-ins for common image corruptions, grouped by where their
//! energy lands in frequency: brightness and contrast (low), blur and
//! pixelation (mid), additive and impulse noise (high).
//!
//! These are simplified versions, not reimplementations of any benchmark's
//! exact pipeline. Outputs are never clamped.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::image::ImageTensor;
use crate::rng::stream_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorruptionKind {
    /// `x + delta`
    Brightness,
    /// `mean_c + s (x - mean_c)` per channel
    Contrast,
    /// `x + N(0, sigma^2)`
    GaussianNoise,
    /// Each value replaced by the max or min with probability `p`.
    ImpulseNoise,
    /// Separable Gaussian kernel of std `sigma`, radius `ceil(3 sigma)`.
    GaussianBlur,
    /// Box-average `f x f` blocks, then nearest-neighbour upsample.
    Pixelate,
}

impl CorruptionKind {
    pub fn is_stochastic(self) -> bool {
        matches!(self, CorruptionKind::GaussianNoise | CorruptionKind::ImpulseNoise)
    }
}

impl fmt::Display for CorruptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorruptionKind::Brightness => "brightness",
            CorruptionKind::Contrast => "contrast",
            CorruptionKind::GaussianNoise => "gaussian_noise",
            CorruptionKind::ImpulseNoise => "impulse_noise",
            CorruptionKind::GaussianBlur => "gaussian_blur",
            CorruptionKind::Pixelate => "pixelate",
        })
    }
}

impl FromStr for CorruptionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.replace('-', "_").as_str() {
            "brightness" => CorruptionKind::Brightness,
            "contrast" => CorruptionKind::Contrast,
            "gaussian_noise" => CorruptionKind::GaussianNoise,
            "impulse_noise" => CorruptionKind::ImpulseNoise,
            "gaussian_blur" => CorruptionKind::GaussianBlur,
            "pixelate" => CorruptionKind::Pixelate,
            _ => return Err(Error::invalid(format!("unknown corruption kind {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorruptionSpec {
    pub kind: CorruptionKind,
    /// Offset, scale, noise std, flip probability, kernel std or block factor.
    pub param: f64,
    /// Only read by stochastic kinds.
    pub seed: u64,
}

impl CorruptionSpec {
    pub fn new(kind: CorruptionKind, param: f64, seed: u64) -> Self {
        Self { kind, param, seed }
    }

    pub fn validate(&self, height: usize, width: usize) -> Result<()> {
        let p = self.param;
        if !p.is_finite() {
            return Err(Error::invalid("corruption parameter must be finite"));
        }
        match self.kind {
            CorruptionKind::Brightness | CorruptionKind::Contrast => Ok(()),
            CorruptionKind::GaussianNoise if p < 0.0 => {
                Err(Error::invalid(format!("noise std {p} must be >= 0")))
            }
            CorruptionKind::ImpulseNoise if !(0.0..=1.0).contains(&p) => {
                Err(Error::invalid(format!("flip probability {p} outside [0, 1]")))
            }
            CorruptionKind::GaussianBlur if p <= 0.0 => {
                Err(Error::invalid(format!("blur sigma {p} must be > 0")))
            }
            CorruptionKind::Pixelate => {
                let f = p as usize;
                if p < 1.0 || p.fract() != 0.0 || !height.is_multiple_of(f) || !width.is_multiple_of(f) {
                    Err(Error::invalid(format!(
                        "pixelate factor {p} must be an integer >= 1 dividing {height}x{width}"
                    )))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Corrupts one image. Impulse noise uses this image's own min and max.
pub fn apply_corruption(image: &ImageTensor, spec: &CorruptionSpec) -> Result<ImageTensor> {
    let range = value_range(std::slice::from_ref(image));
    corrupt_one(image, spec, 0, range)
}

/// Corrupts a batch. Image `i` draws noise from stream `(seed, i)` and
/// impulse noise uses the batch-wide min and max.
pub fn corrupt_batch(images: &[ImageTensor], spec: &CorruptionSpec) -> Result<Vec<ImageTensor>> {
    let range = value_range(images);
    images
        .iter()
        .enumerate()
        .map(|(i, img)| corrupt_one(img, spec, i as u64, range))
        .collect()
}

fn value_range(images: &[ImageTensor]) -> (f64, f64) {
    images
        .iter()
        .flat_map(|img| img.as_slice())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

fn corrupt_one(
    image: &ImageTensor,
    spec: &CorruptionSpec,
    stream: u64,
    (lo, hi): (f64, f64),
) -> Result<ImageTensor> {
    let (c, h, w) = image.shape();
    spec.validate(h, w)?;
    let p = spec.param;
    match spec.kind {
        CorruptionKind::Brightness => image.map(|x| x + p),
        CorruptionKind::Contrast => {
            let mut data = image.as_slice().to_vec();
            for plane in data.chunks_exact_mut(h * w) {
                let mean = plane.iter().sum::<f64>() / plane.len() as f64;
                for x in plane {
                    *x = mean + p * (*x - mean);
                }
            }
            ImageTensor::new(c, h, w, data)
        }
        CorruptionKind::GaussianNoise => {
            let mut rng = stream_rng(spec.seed, stream);
            let normal = Normal::new(0.0, p).map_err(|e| Error::invalid(e.to_string()))?;
            let data = image
                .as_slice()
                .iter()
                .map(|&x| x + normal.sample(&mut rng))
                .collect();
            ImageTensor::new(c, h, w, data)
        }
        CorruptionKind::ImpulseNoise => {
            let mut rng = stream_rng(spec.seed, stream);
            let data = image
                .as_slice()
                .iter()
                .map(|&x| {
                    let flip = rng.random::<f64>() < p;
                    let high = rng.random::<bool>();
                    match (flip, high) {
                        (false, _) => x,
                        (true, true) => hi,
                        (true, false) => lo,
                    }
                })
                .collect();
            ImageTensor::new(c, h, w, data)
        }
        CorruptionKind::GaussianBlur => gaussian_blur(image, p),
        CorruptionKind::Pixelate => pixelate(image, p as usize),
    }
}

pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = k.iter().sum();
    for v in &mut k {
        *v /= total;
    }
    k
}

/// Half-sample symmetric reflection (`d c b a | a b c d | d c b a`).
///
/// The padded signal is a `2n`-periodic even extension, so convolving with a
/// normalized kernel keeps the sum of the original `n` samples.
fn reflect(i: i64, n: usize) -> usize {
    let period = 2 * n as i64;
    let m = i.rem_euclid(period) as usize;
    if m >= n {
        2 * n - 1 - m
    } else {
        m
    }
}

fn gaussian_blur(image: &ImageTensor, sigma: f64) -> Result<ImageTensor> {
    let (c, h, w) = image.shape();
    let kernel = gaussian_kernel(sigma);
    let radius = (kernel.len() / 2) as i64;
    let mut out = Vec::with_capacity(image.len());
    let mut rows = vec![0.0; h * w];
    for ch in 0..c {
        let plane = image.channel(ch);
        for r in 0..h {
            for col in 0..w {
                rows[r * w + col] = kernel
                    .iter()
                    .enumerate()
                    .map(|(j, kv)| kv * plane[r * w + reflect(col as i64 + j as i64 - radius, w)])
                    .sum();
            }
        }
        for r in 0..h {
            for col in 0..w {
                out.push(
                    kernel
                        .iter()
                        .enumerate()
                        .map(|(j, kv)| kv * rows[reflect(r as i64 + j as i64 - radius, h) * w + col])
                        .sum(),
                );
            }
        }
    }
    ImageTensor::new(c, h, w, out)
}

fn pixelate(image: &ImageTensor, factor: usize) -> Result<ImageTensor> {
    let (c, h, w) = image.shape();
    let area = (factor * factor) as f64;
    let mut out = vec![0.0; image.len()];
    for ch in 0..c {
        let plane = image.channel(ch);
        let dst = &mut out[ch * h * w..(ch + 1) * h * w];
        for br in (0..h).step_by(factor) {
            for bc in (0..w).step_by(factor) {
                let mut sum = 0.0;
                for r in br..br + factor {
                    for col in bc..bc + factor {
                        sum += plane[r * w + col];
                    }
                }
                let mean = sum / area;
                for r in br..br + factor {
                    dst[r * w + bc..r * w + bc + factor].fill(mean);
                }
            }
        }
    }
    ImageTensor::new(c, h, w, out)
}
