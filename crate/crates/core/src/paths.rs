//! Fourier amplitude, Fourier phase and pixel-space interpolation paths.
//!
//! A path starts at a source image `x0` and moves toward a target `x1` over
//! `T` evenly spaced blend weights `lambda_t = t / (T - 1)`. The Fourier
//! modes only touch bins inside a [`RadialMask`]; every other bin keeps the
//! source amplitude and phase.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::image::ImageTensor;
use crate::rng::stream_rng;
use crate::spectral::{
    canonical_angle, decompose, dft2, idft2_real, mirror_bin, radial_mask, recompose,
    FourierDecomposition, RadialMask,
};

/// Number of blend weights per path.
pub const DEFAULT_STEPS: usize = 100;
/// Low-frequency cutoff for amplitude and phase paths on small (32x32) images.
pub const SMALL_IMAGE_CUTOFF: f64 = 0.4;
/// Phase cutoff for large (ImageNet-scale) images.
pub const LARGE_IMAGE_PHASE_CUTOFF: f64 = 0.2;
/// Amplitude cutoff for large images: every frequency.
pub const LARGE_IMAGE_AMPLITUDE_CUTOFF: f64 = 1.0;
pub const SMALL_IMAGE_PATH_COUNT: usize = 5000;
pub const LARGE_IMAGE_PATH_COUNT: usize = 7000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathMode {
    Amplitude,
    Phase,
    Pixel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassRelation {
    Within,
    Between,
    Unconstrained,
}

impl fmt::Display for PathMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PathMode::Amplitude => "amplitude",
            PathMode::Phase => "phase",
            PathMode::Pixel => "pixel",
        })
    }
}

impl FromStr for PathMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "amplitude" => Ok(PathMode::Amplitude),
            "phase" => Ok(PathMode::Phase),
            "pixel" => Ok(PathMode::Pixel),
            other => Err(Error::invalid(format!("unknown path mode {other:?}"))),
        }
    }
}

impl fmt::Display for ClassRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassRelation::Within => "within",
            ClassRelation::Between => "between",
            ClassRelation::Unconstrained => "any",
        })
    }
}

impl FromStr for ClassRelation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "within" => Ok(ClassRelation::Within),
            "between" => Ok(ClassRelation::Between),
            "any" | "unconstrained" => Ok(ClassRelation::Unconstrained),
            other => Err(Error::invalid(format!("unknown class relation {other:?}"))),
        }
    }
}

/// Everything needed to regenerate one path from a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    pub path_index: usize,
    pub mode: PathMode,
    pub source_index: usize,
    pub target_index: usize,
    pub class_relation: ClassRelation,
    pub cutoff: f64,
    pub steps: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationPath {
    pub images: Vec<ImageTensor>,
    pub lambdas: Vec<f64>,
}

impl InterpolationPath {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
}

/// `lambda_t = t / (T - 1)` for `t = 0..T`.
pub fn lambda_grid(steps: usize) -> Result<Vec<f64>> {
    if steps < 2 {
        return Err(Error::invalid(format!("path needs at least 2 steps, got {steps}")));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps).map(|t| t as f64 / last).collect())
}

/// Moves `lambda` of the way from `p0` to `p1` along the shortest arc.
///
/// The difference is wrapped into `(-pi, pi]`, so exact antipodes travel in
/// the positive direction. The result is canonicalized into `(-pi, pi]`.
pub fn interpolate_phase(p0: f64, p1: f64, lambda: f64) -> f64 {
    let delta = canonical_angle(p1 - p0);
    canonical_angle(p0 + lambda * delta)
}

struct FourierPair {
    source: FourierDecomposition,
    target: FourierDecomposition,
    mask: RadialMask,
}

impl FourierPair {
    fn new(x0: &ImageTensor, x1: &ImageTensor, rho: f64) -> Result<Self> {
        x0.ensure_same_shape(x1)?;
        let (_, h, w) = x0.shape();
        Ok(Self {
            source: decompose(&dft2(x0)?),
            target: decompose(&dft2(x1)?),
            mask: radial_mask(h, w, rho)?,
        })
    }
}

pub fn amplitude_path(
    x0: &ImageTensor,
    x1: &ImageTensor,
    rho: f64,
    steps: usize,
) -> Result<InterpolationPath> {
    let lambdas = lambda_grid(steps)?;
    let pair = FourierPair::new(x0, x1, rho)?;
    let images = lambdas
        .iter()
        .map(|&lambda| amplitude_step(&pair, lambda))
        .collect::<Result<_>>()?;
    Ok(InterpolationPath { images, lambdas })
}

fn amplitude_step(pair: &FourierPair, lambda: f64) -> Result<ImageTensor> {
    let (c, h, w) = pair.source.shape();
    let plane = h * w;
    let mut amplitude = pair.source.amplitude.clone();
    for ch in 0..c {
        for (bin, &inside) in pair.mask.as_slice().iter().enumerate() {
            if inside {
                let k = ch * plane + bin;
                amplitude[k] =
                    (1.0 - lambda) * pair.source.amplitude[k] + lambda * pair.target.amplitude[k];
            }
        }
    }
    let blended = FourierDecomposition::new(c, h, w, amplitude, pair.source.phase.clone())?;
    idft2_real(&recompose(&blended)?)
}

/// Phase interpolation on masked bins, amplitude held at the source.
///
/// Each conjugate pair of bins moves together (the mirror bin gets the
/// negated phase) so the edited spectrum stays Hermitian. Self-conjugate
/// bins (DC and the Nyquist rows/columns' fixed points) can only carry a
/// phase of 0 or pi in a real image, so they keep the source phase.
pub fn phase_path(
    x0: &ImageTensor,
    x1: &ImageTensor,
    rho: f64,
    steps: usize,
) -> Result<InterpolationPath> {
    let lambdas = lambda_grid(steps)?;
    let pair = FourierPair::new(x0, x1, rho)?;
    let images = lambdas
        .iter()
        .map(|&lambda| phase_step(&pair, lambda))
        .collect::<Result<_>>()?;
    Ok(InterpolationPath { images, lambdas })
}

fn phase_step(pair: &FourierPair, lambda: f64) -> Result<ImageTensor> {
    let (c, h, w) = pair.source.shape();
    let plane = h * w;
    let mut phase = pair.source.phase.clone();
    for ch in 0..c {
        for u in 0..h {
            for v in 0..w {
                if !pair.mask.contains(u, v) {
                    continue;
                }
                let (mu, mv) = mirror_bin(u, v, h, w);
                let bin = u * w + v;
                let mirror = mu * w + mv;
                if mirror <= bin {
                    // Self-conjugate, or already written from its partner.
                    continue;
                }
                let k = ch * plane + bin;
                let p = interpolate_phase(pair.source.phase[k], pair.target.phase[k], lambda);
                phase[k] = p;
                phase[ch * plane + mirror] = canonical_angle(-p);
            }
        }
    }
    let blended = FourierDecomposition::new(c, h, w, pair.source.amplitude.clone(), phase)?;
    idft2_real(&recompose(&blended)?)
}

pub fn pixel_path(x0: &ImageTensor, x1: &ImageTensor, steps: usize) -> Result<InterpolationPath> {
    x0.ensure_same_shape(x1)?;
    let lambdas = lambda_grid(steps)?;
    let images = lambdas
        .iter()
        .map(|&lambda| x0.zip_map(x1, |a, b| (1.0 - lambda) * a + lambda * b))
        .collect::<Result<_>>()?;
    Ok(InterpolationPath { images, lambdas })
}

/// Builds the path described by `spec` from a dataset.
pub fn generate_path(spec: &PathSpec, images: &[ImageTensor]) -> Result<InterpolationPath> {
    let get = |i: usize| {
        images.get(i).ok_or_else(|| {
            Error::invalid(format!("path index {i} outside dataset of {}", images.len()))
        })
    };
    let (x0, x1) = (get(spec.source_index)?, get(spec.target_index)?);
    match spec.mode {
        PathMode::Amplitude => amplitude_path(x0, x1, spec.cutoff, spec.steps),
        PathMode::Phase => phase_path(x0, x1, spec.cutoff, spec.steps),
        PathMode::Pixel => pixel_path(x0, x1, spec.steps),
    }
}

/// Draws `n_paths` ordered `(source, target)` pairs uniformly from the
/// pairs allowed by `relation`. Self-pairs are never drawn. Path `i` uses
/// its own RNG stream derived from `(seed, i)`.
pub fn sample_path_specs(
    labels: &[u32],
    n_paths: usize,
    mode: PathMode,
    relation: ClassRelation,
    rho: f64,
    steps: usize,
    seed: u64,
) -> Result<Vec<PathSpec>> {
    if n_paths == 0 {
        return Err(Error::invalid("n_paths must be at least 1"));
    }
    if labels.len() < 2 {
        return Err(Error::invalid("dataset needs at least 2 items"));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::invalid(format!("cutoff {rho} outside [0, 1]")));
    }
    lambda_grid(steps)?;

    let mut by_class: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let classes: Vec<&Vec<usize>> = by_class.values().collect();
    let n = labels.len();
    // Number of valid ordered pairs whose source lies in each class.
    let weights: Vec<u64> = classes
        .iter()
        .map(|members| {
            let k = members.len() as u64;
            match relation {
                ClassRelation::Within => k * (k - 1),
                ClassRelation::Between => k * (n as u64 - k),
                ClassRelation::Unconstrained => k * (n as u64 - 1),
            }
        })
        .collect();
    let total: u64 = weights.iter().sum();
    if total == 0 {
        return Err(Error::invalid(match relation {
            ClassRelation::Within => "within-class paths need a class with at least 2 items",
            _ => "between-class paths need at least 2 distinct classes",
        }));
    }

    (0..n_paths)
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let mut pick = rng.random_range(0..total);
            let class = weights
                .iter()
                .position(|&wt| {
                    if pick < wt {
                        true
                    } else {
                        pick -= wt;
                        false
                    }
                })
                .expect("pick < total");
            let members = classes[class];
            let source = members[rng.random_range(0..members.len())];
            let target = match relation {
                ClassRelation::Within => loop {
                    let t = members[rng.random_range(0..members.len())];
                    if t != source {
                        break t;
                    }
                },
                ClassRelation::Between => loop {
                    let t = rng.random_range(0..n);
                    if labels[t] != labels[source] {
                        break t;
                    }
                },
                ClassRelation::Unconstrained => {
                    let t = rng.random_range(0..n - 1);
                    if t >= source {
                        t + 1
                    } else {
                        t
                    }
                }
            };
            Ok(PathSpec {
                path_index: i,
                mode,
                source_index: source,
                target_index: target,
                class_relation: relation,
                cutoff: rho,
                steps,
                seed,
            })
        })
        .collect()
}
