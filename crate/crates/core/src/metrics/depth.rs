use crate::error::{Error, Result};

/// Depth in millimeters with a per-pixel validity mask.
///
/// A pixel is valid only if its depth is finite and strictly positive.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
    valid: Vec<bool>,
}

impl DepthMap {
    /// Wraps depths; the mask is `> 0 && finite`.
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        let valid = values.iter().map(|&v| v > 0.0 && v.is_finite()).collect();
        Self::with_mask(width, height, values, valid)
    }

    /// Wraps depths with an explicit mask. Masked-in pixels must hold
    /// finite positive depths.
    pub fn with_mask(width: usize, height: usize, values: Vec<f64>, valid: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("depth map dimensions must be non-zero"));
        }
        if values.len() != width * height || valid.len() != width * height {
            return Err(Error::invalid(format!(
                "depth map {width}x{height} needs {} values and mask entries",
                width * height
            )));
        }
        if let Some(i) = (0..values.len()).find(|&i| valid[i] && !(values[i] > 0.0 && values[i].is_finite())) {
            return Err(Error::invalid(format!(
                "pixel {i} is marked valid but holds depth {}",
                values[i]
            )));
        }
        Ok(Self {
            width,
            height,
            values,
            valid,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                values.push(f(x, y));
            }
        }
        Self::new(width, height, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mask(&self) -> &[bool] {
        &self.valid
    }

    #[inline]
    pub fn is_valid(&self, i: usize) -> bool {
        self.valid[i]
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        let i = y * self.width + x;
        self.valid[i].then(|| self.values[i])
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// Multiplies every valid depth by `factor`. A non-positive factor
    /// invalidates all pixels.
    pub fn scaled(&self, factor: f64) -> DepthMap {
        let values: Vec<f64> = self
            .values
            .iter()
            .zip(&self.valid)
            .map(|(&v, &ok)| if ok { v * factor } else { v })
            .collect();
        let valid = values
            .iter()
            .zip(&self.valid)
            .map(|(&v, &ok)| ok && v > 0.0 && v.is_finite())
            .collect();
        DepthMap {
            width: self.width,
            height: self.height,
            values,
            valid,
        }
    }

    /// Valid `(min, max)` depths, if any pixel is valid.
    pub fn valid_range(&self) -> Option<(f64, f64)> {
        self.values
            .iter()
            .zip(&self.valid)
            .filter(|(_, &ok)| ok)
            .fold(None, |acc, (&v, _)| match acc {
                None => Some((v, v)),
                Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
            })
    }
}
