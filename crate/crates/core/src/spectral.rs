//! 2D discrete Fourier transforms over [`ImageTensor`]s, amplitude/phase
//! decomposition, radial low-frequency masks and per-image power spectra.
//!
//! Spectra use the unnormalized forward convention
//! `X[u,v] = sum_{r,c} x[r,c] exp(-2 pi i (u r / H + v c / W))`, with bin
//! `(0, 0)` holding the DC term. The inverse divides by `H * W`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::image::ImageTensor;

/// Complex spectrum with the same `(C, H, W)` layout as the image it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<Complex64>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::invalid("spectrum dimensions must be positive"));
        }
        if data.len() != channels * height * width {
            return Err(Error::invalid("spectrum data length does not match its shape"));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("spectrum contains non-finite values"));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn get(&self, c: usize, u: usize, v: usize) -> Complex64 {
        self.data[(c * self.height + u) * self.width + v]
    }

    pub fn channel(&self, c: usize) -> &[Complex64] {
        let plane = self.height * self.width;
        &self.data[c * plane..(c + 1) * plane]
    }
}

/// Amplitude and phase of a spectrum. Amplitudes are nonnegative and phases
/// lie in `(-pi, pi]`; zero-amplitude bins carry phase 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierDecomposition {
    channels: usize,
    height: usize,
    width: usize,
    pub amplitude: Vec<f64>,
    pub phase: Vec<f64>,
}

impl FourierDecomposition {
    pub fn new(
        channels: usize,
        height: usize,
        width: usize,
        amplitude: Vec<f64>,
        phase: Vec<f64>,
    ) -> Result<Self> {
        let n = channels * height * width;
        if amplitude.len() != n || phase.len() != n {
            return Err(Error::invalid("decomposition arrays do not match their shape"));
        }
        Ok(Self {
            channels,
            height,
            width,
            amplitude,
            phase,
        })
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }
}

/// Low-frequency selection over an `(H, W)` grid of DFT bins.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMask {
    height: usize,
    width: usize,
    cutoff: f64,
    included: Vec<bool>,
}

impl RadialMask {
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.included[u * self.width + v]
    }

    /// Row-major flags, one per bin.
    pub fn as_slice(&self) -> &[bool] {
        &self.included
    }

    pub fn count(&self) -> usize {
        self.included.iter().filter(|&&b| b).count()
    }
}

/// Per-bin power map of one dataset or of a distribution shift.
///
/// Shift maps are differences of power spectra and may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdMap {
    pub height: usize,
    pub width: usize,
    /// Row-major, unshifted (DC at index 0).
    pub power: Vec<f64>,
    pub source_count: usize,
}

impl PsdMap {
    pub fn new(height: usize, width: usize, power: Vec<f64>, source_count: usize) -> Result<Self> {
        if power.len() != height * width {
            return Err(Error::invalid("psd power length does not match its shape"));
        }
        if power.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("psd contains non-finite values"));
        }
        Ok(Self {
            height,
            width,
            power,
            source_count,
        })
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.power[u * self.width + v]
    }

    pub fn max_abs(&self) -> f64 {
        self.power.iter().fold(0.0, |m, p| m.max(p.abs()))
    }
}

/// Signed frequency of bin index `i` along an axis of length `n`, in
/// `{-ceil(n/2)+1, ..., floor(n/2)}`.
pub fn signed_frequency(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Normalized radius of bin `(u, v)` in an `h x w` grid, in `[0, 1]`.
///
/// Each axis is scaled so its Nyquist frequency maps to 1, and the
/// Euclidean length is divided by `sqrt(2)` so the corner bin sits at 1.
pub fn normalized_radius(u: usize, v: usize, h: usize, w: usize) -> f64 {
    let fu = 2.0 * signed_frequency(u, h) as f64 / h as f64;
    let fv = 2.0 * signed_frequency(v, w) as f64 / w as f64;
    ((fu * fu + fv * fv).sqrt() / std::f64::consts::SQRT_2).min(1.0)
}

/// Index of the bin holding frequency `(-u, -v)`.
pub fn mirror_bin(u: usize, v: usize, h: usize, w: usize) -> (usize, usize) {
    ((h - u) % h, (w - v) % w)
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, direction))
}

/// In-place unnormalized 2D transform of one row-major `h x w` plane.
fn transform_plane(plane: &mut [Complex64], h: usize, w: usize, direction: FftDirection) {
    let row_fft = plan(w, direction);
    for row in plane.chunks_exact_mut(w) {
        row_fft.process(row);
    }
    let col_fft = plan(h, direction);
    let mut column = vec![Complex64::new(0.0, 0.0); h];
    for c in 0..w {
        for r in 0..h {
            column[r] = plane[r * w + c];
        }
        col_fft.process(&mut column);
        for r in 0..h {
            plane[r * w + c] = column[r];
        }
    }
}

/// One-dimensional unnormalized forward DFT of a real sequence.
pub(crate) fn dft_real_1d(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan(buf.len(), FftDirection::Forward).process(&mut buf);
    buf
}

/// Forward 2D DFT applied independently to every channel.
pub fn dft2(image: &ImageTensor) -> Result<Spectrum> {
    let (c, h, w) = image.shape();
    if image.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite pixel in dft2 input"));
    }
    let mut data: Vec<Complex64> = image
        .as_slice()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    for plane in data.chunks_exact_mut(h * w) {
        transform_plane(plane, h, w, FftDirection::Forward);
    }
    Spectrum::new(c, h, w, data)
}

/// Inverse 2D DFT per channel, keeping only the real component.
///
/// Edited spectra are not forced to be Hermitian; any imaginary residue is
/// discarded. See [`idft2_imag_energy`] to measure it.
pub fn idft2_real(spectrum: &Spectrum) -> Result<ImageTensor> {
    let (c, h, w) = spectrum.shape();
    let data = inverse_complex(spectrum);
    ImageTensor::new(c, h, w, data.iter().map(|z| z.re).collect())
}

/// Sum of squared imaginary parts left over by the inverse transform.
pub fn idft2_imag_energy(spectrum: &Spectrum) -> f64 {
    inverse_complex(spectrum).iter().map(|z| z.im * z.im).sum()
}

fn inverse_complex(spectrum: &Spectrum) -> Vec<Complex64> {
    let (_, h, w) = spectrum.shape();
    let scale = 1.0 / (h * w) as f64;
    let mut data = spectrum.data.clone();
    for plane in data.chunks_exact_mut(h * w) {
        transform_plane(plane, h, w, FftDirection::Inverse);
    }
    for z in &mut data {
        *z *= scale;
    }
    data
}

pub fn decompose(spectrum: &Spectrum) -> FourierDecomposition {
    let (c, h, w) = spectrum.shape();
    let mut amplitude = Vec::with_capacity(spectrum.data.len());
    let mut phase = Vec::with_capacity(spectrum.data.len());
    for z in &spectrum.data {
        let a = z.norm();
        amplitude.push(a);
        phase.push(if a == 0.0 { 0.0 } else { canonical_angle(z.arg()) });
    }
    FourierDecomposition {
        channels: c,
        height: h,
        width: w,
        amplitude,
        phase,
    }
}

pub fn recompose(decomp: &FourierDecomposition) -> Result<Spectrum> {
    let (c, h, w) = decomp.shape();
    if let Some(i) = decomp.amplitude.iter().position(|&a| !a.is_finite() || a < 0.0) {
        return Err(Error::invalid(format!(
            "amplitude at flat index {i} is negative or non-finite"
        )));
    }
    if decomp.phase.iter().any(|p| !p.is_finite()) {
        return Err(Error::invalid("non-finite phase"));
    }
    let data = decomp
        .amplitude
        .iter()
        .zip(&decomp.phase)
        .map(|(&a, &p)| Complex64::from_polar(a, p))
        .collect();
    Spectrum::new(c, h, w, data)
}

/// Maps an angle into `(-pi, pi]`.
pub fn canonical_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    // rem_euclid can round 2pi - tiny up to exactly 2pi.
    if t <= -PI {
        t += 2.0 * PI;
    }
    t
}

/// Bins whose normalized radius is at most `rho`.
pub fn radial_mask(h: usize, w: usize, rho: f64) -> Result<RadialMask> {
    if h < 2 || w < 2 {
        return Err(Error::invalid(format!("mask grid {h}x{w} must be at least 2x2")));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::invalid(format!("cutoff {rho} outside [0, 1]")));
    }
    let mut included = Vec::with_capacity(h * w);
    for u in 0..h {
        for v in 0..w {
            included.push(normalized_radius(u, v, h, w) <= rho);
        }
    }
    Ok(RadialMask {
        height: h,
        width: w,
        cutoff: rho,
        included,
    })
}

/// Mean of `|X[u,v]|^2 / (H W)` over images and channels.
pub fn psd(images: &[ImageTensor]) -> Result<PsdMap> {
    let first = images
        .first()
        .ok_or_else(|| Error::invalid("psd needs at least one image"))?;
    let (c, h, w) = first.shape();
    // Running mean over images, so identical copies reproduce one copy exactly.
    let mut acc = vec![0.0; h * w];
    let mut power = vec![0.0; h * w];
    let norm = 1.0 / (c * h * w) as f64;
    for (k, img) in images.iter().enumerate() {
        first.ensure_same_shape(img)?;
        let spec = dft2(img)?;
        power.iter_mut().for_each(|p| *p = 0.0);
        for ch in 0..c {
            for (p, z) in power.iter_mut().zip(spec.channel(ch)) {
                *p += z.norm_sqr();
            }
        }
        let weight = 1.0 / (k + 1) as f64;
        for (a, p) in acc.iter_mut().zip(&power) {
            *a += (p * norm - *a) * weight;
        }
    }
    PsdMap::new(h, w, acc, images.len())
}
