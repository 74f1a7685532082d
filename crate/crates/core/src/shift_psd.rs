//! Spectral characterization of distribution shifts.
//!
//! A shift that transforms each clean image (a corruption) is measured by
//! the PSD of the per-pair difference images. A shift between two
//! independently collected sets is measured by averaging, over classes,
//! the difference of the class-wise PSDs.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::image::ImageTensor;
use crate::spectral::{normalized_radius, psd, PsdMap};

/// Width of one radial-profile annulus in normalized radius.
pub const PROFILE_BIN_WIDTH: f64 = 0.05;

/// Radius boundaries between the low/mid and mid/high bands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandEdges {
    pub low_mid: f64,
    pub mid_high: f64,
}

impl BandEdges {
    pub fn new(low_mid: f64, mid_high: f64) -> Result<Self> {
        if !(0.0 < low_mid && low_mid < mid_high && mid_high < 1.0) {
            return Err(Error::invalid(format!(
                "band edges ({low_mid}, {mid_high}) must satisfy 0 < r1 < r2 < 1"
            )));
        }
        Ok(Self { low_mid, mid_high })
    }

    /// Thirds of the on-axis Nyquist radius. On the corner-normalized radius
    /// scale the on-axis Nyquist frequency sits at `1/sqrt(2)`, so the edges
    /// are `sqrt(2)/6` and `sqrt(2)/3`.
    pub fn nyquist_thirds() -> Self {
        let axis = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            low_mid: axis / 3.0,
            mid_high: 2.0 * axis / 3.0,
        }
    }

    /// Thirds of the corner-normalized radius.
    pub fn radius_thirds() -> Self {
        Self {
            low_mid: 1.0 / 3.0,
            mid_high: 2.0 / 3.0,
        }
    }
}

impl Default for BandEdges {
    fn default() -> Self {
        Self::nyquist_thirds()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandFractions {
    pub low: f64,
    pub mid: f64,
    pub high: f64,
}

impl BandFractions {
    /// Name of the band holding the most power; ties go to the lower band.
    pub fn dominant(&self) -> &'static str {
        if self.low >= self.mid && self.low >= self.high {
            "low"
        } else if self.mid >= self.high {
            "mid"
        } else {
            "high"
        }
    }
}

/// PSD of `corrupted[i] - originals[i]`, averaged over pairs.
pub fn paired_shift_psd(originals: &[ImageTensor], corrupted: &[ImageTensor]) -> Result<PsdMap> {
    if originals.len() != corrupted.len() {
        return Err(Error::invalid(format!(
            "{} originals vs {} corrupted images",
            originals.len(),
            corrupted.len()
        )));
    }
    if originals.is_empty() {
        return Err(Error::invalid("paired shift needs at least one pair"));
    }
    let diffs = originals
        .iter()
        .zip(corrupted)
        .map(|(o, c)| c.zip_map(o, |b, a| b - a))
        .collect::<Result<Vec<_>>>()?;
    psd(&diffs)
}

/// Mean over classes of `psd(b_k) - psd(a_k)`. Values may be negative.
pub fn class_averaged_shift_psd(
    a: &BTreeMap<u32, Vec<ImageTensor>>,
    b: &BTreeMap<u32, Vec<ImageTensor>>,
) -> Result<PsdMap> {
    if a.is_empty() {
        return Err(Error::invalid("no classes given"));
    }
    if !a.keys().eq(b.keys()) {
        return Err(Error::invalid(format!(
            "class keys differ: {:?} vs {:?}",
            a.keys().collect::<Vec<_>>(),
            b.keys().collect::<Vec<_>>()
        )));
    }
    let mut acc: Option<(usize, usize, Vec<f64>)> = None;
    let mut sources = 0;
    for (class, group_a) in a {
        let group_b = &b[class];
        if group_a.is_empty() || group_b.is_empty() {
            return Err(Error::invalid(format!("class {class} has an empty group")));
        }
        let pa = psd(group_a)?;
        let pb = psd(group_b)?;
        if (pa.height, pa.width) != (pb.height, pb.width) {
            return Err(Error::invalid(format!("class {class}: image shapes differ")));
        }
        sources += group_a.len() + group_b.len();
        let (h, w, sum) = acc.get_or_insert_with(|| (pa.height, pa.width, vec![0.0; pa.power.len()]));
        if (*h, *w) != (pa.height, pa.width) {
            return Err(Error::invalid("image shapes differ across classes"));
        }
        for ((s, x), y) in sum.iter_mut().zip(&pb.power).zip(&pa.power) {
            *s += x - y;
        }
    }
    let (h, w, mut sum) = acc.expect("at least one class");
    let k = a.len() as f64;
    for s in &mut sum {
        *s /= k;
    }
    PsdMap::new(h, w, sum, sources)
}

/// Groups images by label.
pub fn group_by_label(images: &[ImageTensor], labels: &[u32]) -> Result<BTreeMap<u32, Vec<ImageTensor>>> {
    if images.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} images but {} labels",
            images.len(),
            labels.len()
        )));
    }
    let mut groups: BTreeMap<u32, Vec<ImageTensor>> = BTreeMap::new();
    for (img, &l) in images.iter().zip(labels) {
        groups.entry(l).or_default().push(img.clone());
    }
    Ok(groups)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileBin {
    pub center: f64,
    pub mean_power: f64,
    pub count: usize,
}

fn profile_index(r: f64) -> usize {
    let n_bins = (1.0 / PROFILE_BIN_WIDTH).round() as usize;
    ((r / PROFILE_BIN_WIDTH) as usize).min(n_bins - 1)
}

/// Mean power in annuli of width [`PROFILE_BIN_WIDTH`]; empty annuli are skipped.
pub fn radial_profile(map: &PsdMap) -> Vec<ProfileBin> {
    let n_bins = (1.0 / PROFILE_BIN_WIDTH).round() as usize;
    let mut sums = vec![0.0; n_bins];
    let mut counts = vec![0usize; n_bins];
    for u in 0..map.height {
        for v in 0..map.width {
            let i = profile_index(normalized_radius(u, v, map.height, map.width));
            sums[i] += map.get(u, v);
            counts[i] += 1;
        }
    }
    (0..n_bins)
        .filter(|&i| counts[i] > 0)
        .map(|i| ProfileBin {
            center: (i as f64 + 0.5) * PROFILE_BIN_WIDTH,
            mean_power: sums[i] / counts[i] as f64,
            count: counts[i],
        })
        .collect()
}

/// Share of total absolute power in each radial band.
pub fn band_fractions(map: &PsdMap, edges: BandEdges) -> Result<BandFractions> {
    BandEdges::new(edges.low_mid, edges.mid_high)?;
    let (mut low, mut mid, mut high) = (0.0, 0.0, 0.0);
    for u in 0..map.height {
        for v in 0..map.width {
            let p = map.get(u, v).abs();
            let r = normalized_radius(u, v, map.height, map.width);
            if r <= edges.low_mid {
                low += p;
            } else if r <= edges.mid_high {
                mid += p;
            } else {
                high += p;
            }
        }
    }
    let total = low + mid + high;
    if total <= 0.0 {
        return Err(Error::UndefinedMetric(
            "band fractions of an all-zero power map".into(),
        ));
    }
    let low = low / total;
    let mid = mid / total;
    Ok(BandFractions {
        low,
        mid,
        high: 1.0 - low - mid,
    })
}
