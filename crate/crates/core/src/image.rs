use crate::error::{Error, Result};

/// A normalized image stored channel-major as `(channels, height, width)`.
///
/// Values are post mean/std normalization and may be negative. Every value
/// is finite, and height and width are both at least 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageTensor {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl ImageTensor {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if channels < 1 || height < 2 || width < 2 {
            return Err(Error::invalid(format!(
                "image shape ({channels}, {height}, {width}) needs C >= 1, H >= 2, W >= 2"
            )));
        }
        if data.len() != channels * height * width {
            return Err(Error::invalid(format!(
                "image data has {} values, shape ({channels}, {height}, {width}) needs {}",
                data.len(),
                channels * height * width
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite pixel at flat index {i}")));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Result<Self> {
        Self::new(channels, height, width, vec![0.0; channels * height * width])
    }

    /// Builds an image by evaluating `f(channel, row, col)` at every pixel.
    pub fn from_fn(
        channels: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(channels * height * width);
        for c in 0..channels {
            for r in 0..height {
                for col in 0..width {
                    data.push(f(c, r, col));
                }
            }
        }
        Self::new(channels, height, width, data)
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let plane = self.height * self.width;
        &self.data[c * plane..(c + 1) * plane]
    }

    pub fn get(&self, c: usize, row: usize, col: usize) -> f64 {
        self.data[(c * self.height + row) * self.width + col]
    }

    /// Applies `f` elementwise, re-validating finiteness.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.channels,
            self.height,
            self.width,
            self.data.iter().map(|&v| f(v)).collect(),
        )
    }

    /// `f(self[i], other[i])` elementwise over two same-shaped images.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.ensure_same_shape(other)?;
        Self::new(
            self.channels,
            self.height,
            self.width,
            self.data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn ensure_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::invalid(format!(
                "shape mismatch: {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }
}

/// Splits a flat `(N, C, H, W)` buffer into `N` images.
pub fn images_from_batch(data: &[f64], shape: &[usize]) -> Result<Vec<ImageTensor>> {
    let &[n, c, h, w] = shape else {
        return Err(Error::invalid(format!(
            "image batch must have shape [N, C, H, W], got {shape:?}"
        )));
    };
    if data.len() != n * c * h * w {
        return Err(Error::invalid("image batch length does not match its shape"));
    }
    let per = c * h * w;
    (0..n)
        .map(|i| ImageTensor::new(c, h, w, data[i * per..(i + 1) * per].to_vec()))
        .collect()
}

/// Concatenates same-shaped images into a flat buffer and its `[N, C, H, W]` shape.
pub fn batch_from_images(images: &[ImageTensor]) -> Result<(Vec<f64>, Vec<usize>)> {
    let first = images
        .first()
        .ok_or_else(|| Error::invalid("empty image batch"))?;
    let (c, h, w) = first.shape();
    let mut data = Vec::with_capacity(images.len() * first.len());
    for img in images {
        first.ensure_same_shape(img)?;
        data.extend_from_slice(img.as_slice());
    }
    Ok((data, vec![images.len(), c, h, w]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes_and_nan() {
        assert!(ImageTensor::new(1, 1, 4, vec![0.0; 4]).is_err());
        assert!(ImageTensor::new(0, 2, 2, vec![]).is_err());
        assert!(ImageTensor::new(1, 2, 2, vec![0.0; 3]).is_err());
        assert!(ImageTensor::new(1, 2, 2, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(ImageTensor::new(1, 2, 2, vec![0.0; 4]).is_ok());
    }

    #[test]
    fn batch_split_and_join() {
        let imgs: Vec<_> = (0..3)
            .map(|k| ImageTensor::from_fn(2, 2, 3, |c, r, col| (k * 100 + c * 10 + r * 3 + col) as f64).unwrap())
            .collect();
        let (flat, shape) = batch_from_images(&imgs).unwrap();
        assert_eq!(shape, vec![3, 2, 2, 3]);
        assert_eq!(images_from_batch(&flat, &shape).unwrap(), imgs);
    }
}
