use crate::error::{Error, Result};
use crate::imaging::{hsv_to_rgb, remap, resize, rgb_to_hsv, Image, Interpolation, Prng, RemapField};

const NEWTON_MAX_ITERATIONS: usize = 8;
const NEWTON_TOLERANCE: f64 = 1e-7;

/// Forward radial model `r' = r(1 + k₁r²)`.
#[inline]
pub fn distort_radius(r: f64, k1: f64) -> f64 {
    r * (1.0 + k1 * r * r)
}

/// Solves `distort_radius(r, k1) = r_d` for `r` by Newton's method, starting
/// at `r_d` (at most 8 steps, stopping once a step is below 1e-7).
///
/// For `k1 < 0` the forward model folds at `r_c = 1/√(−3k₁)`; targets at or
/// beyond the fold have no preimage and map to `r_c`.
pub fn undistort_radius(r_d: f64, k1: f64) -> f64 {
    if k1 == 0.0 || r_d == 0.0 {
        return r_d;
    }
    let fold = if k1 < 0.0 { (-1.0 / (3.0 * k1)).sqrt() } else { f64::INFINITY };
    if k1 < 0.0 && r_d >= distort_radius(fold, k1) {
        return fold;
    }
    let mut r = r_d;
    for _ in 0..NEWTON_MAX_ITERATIONS {
        let residual = distort_radius(r, k1) - r_d;
        let slope = 1.0 + 3.0 * k1 * r * r;
        if slope <= 0.0 {
            break;
        }
        let step = residual / slope;
        r -= step;
        if step.abs() < NEWTON_TOLERANCE {
            break;
        }
    }
    r.min(fold)
}

/// Source coordinates of the barrel-distorted frame.
///
/// Radii are measured from the center of the pixel grid and normalized by
/// half the image diagonal, `0.5·√(w² + h²)`.
pub fn lens_distortion_field(width: usize, height: usize, k1: f64) -> Result<RemapField> {
    if !k1.is_finite() {
        return Err(Error::invalid("lens k1 must be finite"));
    }
    let cx = (width as f64 - 1.0) / 2.0;
    let cy = (height as f64 - 1.0) / 2.0;
    let norm = 0.5 * (width as f64).hypot(height as f64);
    RemapField::from_fn(width, height, |x, y| {
        let dx = (x as f64 - cx) / norm;
        let dy = (y as f64 - cy) / norm;
        let r_d = dx.hypot(dy);
        if r_d == 0.0 || k1 == 0.0 {
            return (x as f64, y as f64);
        }
        let ratio = undistort_radius(r_d, k1) / r_d;
        (cx + dx * ratio * norm, cy + dy * ratio * norm)
    })
}

/// Barrel distortion by inverse mapping: each output pixel at distorted
/// radius `r'` samples the source at the radius `r` with `r(1 + k₁r²) = r'`.
pub fn lens_distortion(img: &Image, k1: f64) -> Result<Image> {
    if k1 == 0.0 {
        return Ok(img.clone());
    }
    let field = lens_distortion_field(img.width(), img.height(), k1)?;
    remap(img, &field)
}

/// Bilinear downscale by `factor`, then bilinear upscale back.
pub fn resolution_change(img: &Image, factor: f64) -> Result<Image> {
    if !(factor > 0.0 && factor <= 1.0) {
        return Err(Error::invalid(format!("resolution factor {factor} must lie in (0, 1]")));
    }
    let (w, h) = (img.width(), img.height());
    let sw = ((w as f64 * factor).round() as usize).max(1);
    let sh = ((h as f64 * factor).round() as usize).max(1);
    if (sw, sh) == (w, h) {
        return Ok(img.clone());
    }
    let small = resize(img, sw, sh, Interpolation::Bilinear)?;
    resize(&small, w, h, Interpolation::Bilinear)
}

/// Specular highlight blobs.
#[derive(Clone, Debug, PartialEq)]
pub struct SpecularParams {
    pub blobs: u32,
    /// Peak additive gain of one blob.
    pub gain: f64,
    /// Major-axis σ range as fractions of `min(width, height)`.
    pub min_sigma_fraction: f64,
    pub max_sigma_fraction: f64,
    /// Minor/major σ ratio drawn uniformly from `[min_aspect, 1]`.
    pub min_aspect: f64,
}

/// One elliptical Gaussian highlight.
#[derive(Clone, Copy, Debug)]
struct Blob {
    cx: f64,
    cy: f64,
    sigma_major: f64,
    sigma_minor: f64,
    angle: f64,
}

fn sample_blob(w: usize, h: usize, p: &SpecularParams, rng: &mut Prng) -> Blob {
    let base = w.min(h) as f64;
    let sigma_major = rng.uniform_range(p.min_sigma_fraction, p.max_sigma_fraction) * base;
    let aspect = rng.uniform_range(p.min_aspect, 1.0);
    let angle = std::f64::consts::PI * rng.uniform();
    // Keep 3σ of the major axis inside the frame when it fits.
    let margin = 3.0 * sigma_major;
    let place = |len: usize, rng: &mut Prng| {
        let hi = len as f64 - 1.0 - margin;
        if hi > margin {
            rng.uniform_range(margin, hi)
        } else {
            rng.uniform();
            (len as f64 - 1.0) / 2.0
        }
    };
    let cx = place(w, rng);
    let cy = place(h, rng);
    Blob {
        cx,
        cy,
        sigma_major,
        sigma_minor: sigma_major * aspect,
        angle,
    }
}

/// `I' = clamp(I + g·G)` where `G` sums unit-peak elliptical Gaussians at
/// seeded positions, sizes and orientations. Never darkens a pixel.
pub fn specular_reflection(img: &Image, p: &SpecularParams, rng: &mut Prng) -> Result<Image> {
    if !(p.gain >= 0.0) || !p.gain.is_finite() {
        return Err(Error::invalid("specular gain must be >= 0"));
    }
    if !(p.min_sigma_fraction > 0.0 && p.min_sigma_fraction <= p.max_sigma_fraction)
        || !(p.min_aspect > 0.0 && p.min_aspect <= 1.0)
    {
        return Err(Error::invalid("specular blob shape parameters out of range"));
    }
    if p.blobs == 0 || p.gain == 0.0 {
        return Ok(img.clone());
    }
    let (w, h) = (img.width(), img.height());
    let mut field = vec![0.0f64; w * h];
    for _ in 0..p.blobs {
        let b = sample_blob(w, h, p, rng);
        let reach = 5.0 * b.sigma_major;
        let x0 = (b.cx - reach).floor().max(0.0) as usize;
        let x1 = ((b.cx + reach).ceil() as usize).min(w - 1);
        let y0 = (b.cy - reach).floor().max(0.0) as usize;
        let y1 = ((b.cy + reach).ceil() as usize).min(h - 1);
        let (sin, cos) = b.angle.sin_cos();
        let inv_a2 = 1.0 / (b.sigma_major * b.sigma_major);
        let inv_b2 = 1.0 / (b.sigma_minor * b.sigma_minor);
        for y in y0..=y1 {
            let dy = y as f64 - b.cy;
            for x in x0..=x1 {
                let dx = x as f64 - b.cx;
                let u = dx * cos + dy * sin;
                let v = -dx * sin + dy * cos;
                let q = u * u * inv_a2 + v * v * inv_b2;
                field[y * w + x] += (-0.5 * q).exp();
            }
        }
    }
    let mut data = Vec::with_capacity(img.data().len());
    for (px, &g) in img.data().chunks_exact(3).zip(&field) {
        let add = p.gain * g;
        data.extend(px.iter().map(|&v| v as f64 + add));
    }
    Ok(Image::from_f64(w, h, &data))
}

/// Hue rotation by `hue_shift_deg` and saturation scaling in HSV.
pub fn color_changes(img: &Image, hue_shift_deg: f64, saturation_scale: f64) -> Result<Image> {
    if !hue_shift_deg.is_finite() || !(saturation_scale >= 0.0) || !saturation_scale.is_finite() {
        return Err(Error::invalid("color change parameters must be finite, saturation scale >= 0"));
    }
    let mut hsv = rgb_to_hsv(img);
    for px in hsv.data_mut().chunks_exact_mut(3) {
        px[0] = (px[0] + hue_shift_deg).rem_euclid(360.0);
        px[1] = (px[1] * saturation_scale).clamp(0.0, 1.0);
    }
    Ok(hsv_to_rgb(&hsv))
}
