use crate::error::{Error, Result};

/// Clamp into `[0, 1]`, mapping NaN to 0.
#[inline]
pub(crate) fn clamp01(v: f64) -> f32 {
    if v > 0.0 {
        if v < 1.0 {
            v as f32
        } else {
            1.0
        }
    } else {
        0.0
    }
}

/// An RGB image with `f32` samples in `[0, 1]`, stored row-major and
/// channel-interleaved.
///
/// All constructors enforce the range invariant, so every `Image` a caller
/// can observe holds finite samples in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl Image {
    pub const CHANNELS: usize = 3;

    /// Wraps an interleaved sample buffer, rejecting bad sizes and
    /// out-of-range or non-finite samples.
    pub fn new(width: usize, height: usize, data: Vec<f32>) -> Result<Self> {
        check_dims(width, height)?;
        if data.len() != width * height * Self::CHANNELS {
            return Err(Error::invalid(format!(
                "sample buffer has {} values, expected {}x{}x3 = {}",
                data.len(),
                width,
                height,
                width * height * Self::CHANNELS
            )));
        }
        if let Some(i) = data.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::invalid(format!(
                "sample {} = {} lies outside [0, 1]",
                i, data[i]
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Builds an image from an unchecked buffer, clamping every sample.
    pub(crate) fn from_clamped(width: usize, height: usize, mut data: Vec<f32>) -> Self {
        debug_assert_eq!(data.len(), width * height * Self::CHANNELS);
        for v in &mut data {
            *v = clamp01(*v as f64);
        }
        Self {
            width,
            height,
            data,
        }
    }

    /// Builds an image from `f64` samples, clamping into range.
    pub(crate) fn from_f64(width: usize, height: usize, data: &[f64]) -> Self {
        debug_assert_eq!(data.len(), width * height * Self::CHANNELS);
        Self {
            width,
            height,
            data: data.iter().map(|&v| clamp01(v)).collect(),
        }
    }

    /// Evaluates `f(x, y)` for every pixel. Values are clamped into `[0, 1]`.
    ///
    /// Panics if either dimension is zero.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f32; 3]) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be non-zero");
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                let p = f(x, y);
                data.extend(p.iter().map(|&v| clamp01(v as f64)));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    pub fn filled(width: usize, height: usize, rgb: [f32; 3]) -> Self {
        Self::from_fn(width, height, |_, _| rgb)
    }

    pub fn gray(width: usize, height: usize, value: f32) -> Self {
        Self::filled(width, height, [value; 3])
    }

    /// Converts 8-bit interleaved RGB by `v / 255`.
    pub fn from_rgb8(width: usize, height: usize, bytes: &[u8]) -> Result<Self> {
        check_dims(width, height)?;
        if bytes.len() != width * height * 3 {
            return Err(Error::invalid("rgb8 buffer size does not match dimensions"));
        }
        Ok(Self {
            width,
            height,
            data: bytes.iter().map(|&b| b as f32 / 255.0).collect(),
        })
    }

    /// Quantizes to 8-bit interleaved RGB by `round(v * 255)`.
    pub fn to_rgb8(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|&v| (v as f64 * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    /// Sets one pixel, clamping each channel.
    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [f32; 3]) {
        let i = (y * self.width + x) * 3;
        for c in 0..3 {
            self.data[i + c] = clamp01(rgb[c] as f64);
        }
    }

    #[inline]
    pub fn row(&self, y: usize) -> &[f32] {
        let stride = self.width * 3;
        &self.data[y * stride..(y + 1) * stride]
    }

    /// Applies `f` to every sample and clamps the result.
    pub fn map_samples(&self, mut f: impl FnMut(f32) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| clamp01(f(v))).collect(),
        }
    }

    /// Applies `f` to every pixel and clamps the result.
    pub fn map_pixels(&self, mut f: impl FnMut([f32; 3]) -> [f64; 3]) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for px in self.data.chunks_exact(3) {
            let out = f([px[0], px[1], px[2]]);
            data.extend(out.iter().map(|&v| clamp01(v)));
        }
        Self {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

pub(crate) fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::invalid(format!(
            "image dimensions must be at least 1x1, got {width}x{height}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_and_bad_len() {
        assert!(Image::new(1, 1, vec![0.0, 0.5, 1.5]).is_err());
        assert!(Image::new(1, 1, vec![0.0, f32::NAN, 1.0]).is_err());
        assert!(Image::new(2, 1, vec![0.0; 3]).is_err());
        assert!(Image::new(0, 1, vec![]).is_err());
        assert!(Image::new(1, 1, vec![0.0, 0.5, 1.0]).is_ok());
    }

    #[test]
    fn rgb8_conversion_endpoints() {
        let img = Image::from_rgb8(1, 1, &[255, 0, 128]).unwrap();
        assert_eq!(img.pixel(0, 0)[0], 1.0);
        assert_eq!(img.pixel(0, 0)[1], 0.0);
        assert_eq!(img.to_rgb8(), vec![255, 0, 128]);
    }

    #[test]
    fn clamp_maps_nan_to_zero() {
        assert_eq!(clamp01(f64::NAN), 0.0);
        assert_eq!(clamp01(-1.0), 0.0);
        assert_eq!(clamp01(2.0), 1.0);
        assert_eq!(clamp01(0.25), 0.25);
    }
}
