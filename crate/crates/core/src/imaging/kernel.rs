use crate::error::{Error, Result};
use crate::imaging::Image;

const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// A square, odd-sized, normalized convolution kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    size: usize,
    weights: Vec<f64>,
}

impl Kernel {
    /// Wraps row-major weights. The side must be odd and the weights must
    /// sum to one.
    pub fn new(size: usize, weights: Vec<f64>) -> Result<Self> {
        if size % 2 == 0 {
            return Err(Error::invalid(format!("kernel side {size} must be odd")));
        }
        if weights.len() != size * size {
            return Err(Error::invalid(format!(
                "kernel of side {size} needs {} weights, got {}",
                size * size,
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::invalid("kernel weights must be finite"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::invalid(format!("kernel weights sum to {sum}, expected 1")));
        }
        Ok(Self { size, weights })
    }

    /// Divides arbitrary non-negative weights by their sum.
    pub fn normalized(size: usize, mut weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::invalid("kernel weights must have a positive finite sum"));
        }
        for w in &mut weights {
            *w /= sum;
        }
        Self::new(size, weights)
    }

    pub fn identity() -> Self {
        Self {
            size: 1,
            weights: vec![1.0],
        }
    }

    pub fn uniform(size: usize) -> Result<Self> {
        Self::normalized(size, vec![1.0; size * size])
    }

    /// Flat disk of the given radius in pixels; radius 0 is the identity.
    pub fn disk(radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!("disk radius {radius} must be >= 0")));
        }
        let half = radius.floor() as i64;
        let size = (2 * half + 1) as usize;
        let r2 = radius * radius;
        let mut weights = Vec::with_capacity(size * size);
        for dy in -half..=half {
            for dx in -half..=half {
                let d2 = (dx * dx + dy * dy) as f64;
                weights.push(if d2 <= r2 { 1.0 } else { 0.0 });
            }
        }
        Self::normalized(size, weights)
    }

    /// Line kernel of `length` taps through the center at `angle` radians
    /// (0 = horizontal). Each tap is rounded to the nearest grid cell, so
    /// coincident taps accumulate weight.
    pub fn line(length: usize, angle: f64) -> Result<Self> {
        if length == 0 {
            return Err(Error::invalid("motion kernel length must be >= 1"));
        }
        let size = if length % 2 == 1 { length } else { length + 1 };
        let half = (size / 2) as i64;
        let mut weights = vec![0.0; size * size];
        let (sin, cos) = angle.sin_cos();
        let center = (length as f64 - 1.0) / 2.0;
        for i in 0..length {
            let t = i as f64 - center;
            let dx = (t * cos).round() as i64;
            let dy = (t * sin).round() as i64;
            let (dx, dy) = (dx.clamp(-half, half), dy.clamp(-half, half));
            weights[((dy + half) as usize) * size + (dx + half) as usize] += 1.0;
        }
        Self::normalized(size, weights)
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Non-zero taps as `(dy, dx, weight)` in row-major kernel order.
    fn taps(&self) -> Vec<(i64, i64, f64)> {
        let half = (self.size / 2) as i64;
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0.0)
            .map(|(i, &w)| {
                let ky = (i / self.size) as i64;
                let kx = (i % self.size) as i64;
                (ky - half, kx - half, w)
            })
            .collect()
    }
}

/// Correlates every channel with `kernel`, replicating edge pixels.
///
/// Accumulation is done in `f64` in row-major tap order. Zero taps are
/// skipped, which leaves the sum unchanged since all samples are
/// non-negative.
pub fn convolve(img: &Image, kernel: &Kernel) -> Result<Image> {
    let (w, h) = (img.width(), img.height());
    let max_side = 2 * w.min(h) + 1;
    if kernel.size() > max_side {
        return Err(Error::invalid(format!(
            "kernel side {} exceeds 2*min(width, height)+1 = {max_side}",
            kernel.size()
        )));
    }
    if kernel.size() == 1 {
        return Ok(img.clone());
    }
    let taps = kernel.taps();
    let stride = w * 3;
    let src = img.data();
    let mut out = vec![0.0f32; src.len()];
    let mut acc = vec![0.0f64; stride];

    for (y, out_row) in out.chunks_exact_mut(stride).enumerate() {
        acc.iter_mut().for_each(|a| *a = 0.0);
        for &(dy, dx, wt) in &taps {
            let sy = (y as i64 + dy).clamp(0, h as i64 - 1) as usize;
            let row = &src[sy * stride..(sy + 1) * stride];
            accumulate_shifted(&mut acc, row, w, dx, wt);
        }
        for (o, a) in out_row.iter_mut().zip(&acc) {
            *o = super::image::clamp01(*a);
        }
    }
    Ok(Image::from_clamped(w, h, out))
}

/// `acc[x] += wt * row[clamp(x + dx)]` for every pixel of an interleaved row.
#[inline]
fn accumulate_shifted(acc: &mut [f64], row: &[f32], w: usize, dx: i64, wt: f64) {
    let wi = w as i64;
    // Interior span where x + dx stays in bounds.
    let lo = (-dx).clamp(0, wi) as usize;
    let hi = (wi - dx).clamp(0, wi) as usize;
    for x in 0..lo.min(w) {
        let sx = (x as i64 + dx).clamp(0, wi - 1) as usize;
        for c in 0..3 {
            acc[x * 3 + c] += wt * row[sx * 3 + c] as f64;
        }
    }
    if lo < hi {
        let shift = (lo as i64 + dx) as usize * 3;
        let n = (hi - lo) * 3;
        let dst = &mut acc[lo * 3..lo * 3 + n];
        let srcs = &row[shift..shift + n];
        for (a, &s) in dst.iter_mut().zip(srcs) {
            *a += wt * s as f64;
        }
    }
    for x in hi.max(lo)..w {
        let sx = (x as i64 + dx).clamp(0, wi - 1) as usize;
        for c in 0..3 {
            acc[x * 3 + c] += wt * row[sx * 3 + c] as f64;
        }
    }
}
