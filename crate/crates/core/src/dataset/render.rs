//! Depth-map visualization.

use crate::error::{Error, Result};
use crate::imaging::{resize, Image, Interpolation};
use crate::metrics::DepthMap;

/// Polynomial fit of the Turbo rainbow colormap; `t` is clamped to `[0, 1]`.
pub fn turbo(t: f64) -> [f64; 3] {
    const R: [f64; 6] = [0.13572138, 4.61539260, -42.66032258, 132.13108234, -152.94239396, 59.28637943];
    const G: [f64; 6] = [0.09140261, 2.19418839, 4.84296658, -14.18503333, 4.27729857, 2.82956604];
    const B: [f64; 6] = [0.10667330, 12.64194608, -60.58204836, 110.36276771, -89.90310912, 27.34824973];
    let x = t.clamp(0.0, 1.0);
    let eval = |c: &[f64; 6]| c.iter().rev().fold(0.0, |acc, &k| acc * x + k).clamp(0.0, 1.0);
    [eval(&R), eval(&G), eval(&B)]
}

/// Depth range mapped onto the colormap.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum DepthRange {
    /// Min and max of the valid pixels.
    #[default]
    Auto,
    Fixed { min: f64, max: f64 },
}

impl DepthRange {
    pub fn fixed(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::invalid(format!("depth range [{min}, {max}] must satisfy min < max")));
        }
        Ok(DepthRange::Fixed { min, max })
    }

    fn resolve(self, d: &DepthMap) -> Result<(f64, f64)> {
        match self {
            DepthRange::Fixed { min, max } => Ok((min, max)),
            DepthRange::Auto => d
                .valid_range()
                .ok_or_else(|| Error::degenerate("cannot pick an automatic range for an all-invalid depth map")),
        }
    }
}

/// Colors valid depths with [`turbo`] (near = 0, far = 1); invalid pixels
/// are black. A zero-width range renders every valid pixel as `turbo(0)`.
pub fn render_depth(d: &DepthMap, range: DepthRange) -> Result<Image> {
    let (lo, hi) = range.resolve(d)?;
    let span = hi - lo;
    let w = d.width();
    let mut data = Vec::with_capacity(d.len() * 3);
    for (i, &v) in d.values().iter().enumerate() {
        if !d.is_valid(i) {
            data.extend_from_slice(&[0.0; 3]);
            continue;
        }
        let t = if span > 0.0 { (v - lo) / span } else { 0.0 };
        data.extend(turbo(t).map(|c| c as f32));
    }
    Image::new(w, d.height(), data)
}

/// Panels side by side, each resized (bilinear) to the first panel's size.
pub fn compose_strip(panels: &[Image]) -> Result<Image> {
    let first = panels.first().ok_or_else(|| Error::invalid("strip needs at least one panel"))?;
    let (pw, ph) = (first.width(), first.height());
    let fitted: Vec<Image> = panels
        .iter()
        .map(|p| {
            if p.width() == pw && p.height() == ph {
                Ok(p.clone())
            } else {
                resize(p, pw, ph, Interpolation::Bilinear)
            }
        })
        .collect::<Result<_>>()?;
    let total_w = pw * fitted.len();
    Ok(Image::from_fn(total_w, ph, |x, y| fitted[x / pw].pixel(x % pw, y)))
}
