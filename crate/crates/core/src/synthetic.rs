//! Seeded synthetic image generators for desk-scale experiments.

use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::image::ImageTensor;
use crate::rng::stream_rng;
use crate::spectral::{dft2, idft2_real, normalized_radius, Spectrum};

/// Image with a `1 / f^exponent` amplitude spectrum and random phases,
/// rescaled to zero mean and unit variance per channel.
///
/// `exponent = 1` gives the roughly scale-invariant statistics of natural
/// photographs.
pub fn natural_image(
    channels: usize,
    height: usize,
    width: usize,
    exponent: f64,
    seed: u64,
    index: u64,
) -> Result<ImageTensor> {
    let mut rng = stream_rng(seed, index);
    let noise = ImageTensor::from_fn(channels, height, width, |_, _, _| {
        StandardNormal.sample(&mut rng)
    })?;
    let spec = dft2(&noise)?;
    let floor = 1.0 / height.max(width) as f64;
    let mut data = spec.as_slice().to_vec();
    for (k, z) in data.iter_mut().enumerate() {
        let bin = k % (height * width);
        let r = normalized_radius(bin / width, bin % width, height, width).max(floor);
        *z *= r.powf(-exponent);
    }
    let shaped = idft2_real(&Spectrum::new(channels, height, width, data)?)?;
    let mut out = shaped.as_slice().to_vec();
    for plane in out.chunks_exact_mut(height * width) {
        let n = plane.len() as f64;
        let mean = plane.iter().sum::<f64>() / n;
        let std = (plane.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        for v in plane {
            *v = (*v - mean) / std;
        }
    }
    ImageTensor::new(channels, height, width, out)
}

/// Labeled dataset of `classes` smooth templates plus natural-statistics
/// noise of relative strength `noise`. Items alternate through the classes.
pub fn blob_dataset(
    n_items: usize,
    classes: u32,
    shape: (usize, usize, usize),
    noise: f64,
    seed: u64,
) -> Result<(Vec<ImageTensor>, Vec<u32>)> {
    let (c, h, w) = shape;
    // Templates and samples use disjoint streams.
    let templates = (0..classes)
        .map(|k| natural_image(c, h, w, 2.0, seed, u64::MAX - k as u64))
        .collect::<Result<Vec<_>>>()?;
    let mut images = Vec::with_capacity(n_items);
    let mut labels = Vec::with_capacity(n_items);
    for i in 0..n_items {
        let label = i as u32 % classes;
        let jitter = natural_image(c, h, w, 1.0, seed, i as u64)?;
        images.push(templates[label as usize].zip_map(&jitter, |t, j| t + noise * j)?);
        labels.push(label);
    }
    Ok((images, labels))
}
