use crate::error::{Error, Result};
use crate::imaging::{mean_luminance, Image, Prng};

/// Spatial structure of the fog density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FogField {
    /// Scalar density everywhere.
    Uniform,
    /// Seeded diamond-square field rescaled to mean `omega`, clamped to `[0, 1]`.
    Plasma { roughness: f64 },
}

fn check_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite, got {v}")))
    }
}

/// `I' = αI`, clamped.
pub fn brightness(img: &Image, alpha: f64) -> Result<Image> {
    check_finite("alpha", alpha)?;
    if alpha < 0.0 {
        return Err(Error::invalid("brightness alpha must be >= 0"));
    }
    Ok(img.map_samples(|v| alpha * v as f64))
}

/// Same law as [`brightness`], intended for `α < 1`.
pub fn darkness(img: &Image, alpha: f64) -> Result<Image> {
    brightness(img, alpha)
}

/// `I' = α(I − μ) + μ` per channel, with `μ` the global mean luminance.
pub fn contrast(img: &Image, alpha: f64) -> Result<Image> {
    check_finite("alpha", alpha)?;
    if alpha == 1.0 {
        return Ok(img.clone());
    }
    let mu = mean_luminance(img);
    Ok(img.map_samples(|v| alpha * (v as f64 - mu) + mu))
}

/// `I' = I(1 − ω) + Aω`.
pub fn fog(img: &Image, omega: f64, atmospheric_light: f64, field: FogField, rng: &mut Prng) -> Result<Image> {
    check_finite("omega", omega)?;
    if !(0.0..=1.0).contains(&omega) || !(0.0..=1.0).contains(&atmospheric_light) {
        return Err(Error::invalid("fog omega and atmospheric light must lie in [0, 1]"));
    }
    let a = atmospheric_light;
    match field {
        FogField::Uniform => Ok(img.map_samples(|v| v as f64 * (1.0 - omega) + a * omega)),
        FogField::Plasma { roughness } => {
            let density = plasma_density(img.width(), img.height(), omega, roughness, rng);
            let mut data = Vec::with_capacity(img.data().len());
            for (px, &w) in img.data().chunks_exact(3).zip(&density) {
                data.extend(px.iter().map(|&v| v as f64 * (1.0 - w) + a * w));
            }
            Ok(Image::from_f64(img.width(), img.height(), &data))
        }
    }
}

/// Per-pixel fog density with mean close to `omega`, every value in `[0, 1]`.
fn plasma_density(width: usize, height: usize, omega: f64, roughness: f64, rng: &mut Prng) -> Vec<f64> {
    let side = width.max(height).max(2).next_power_of_two();
    let n = side + 1;
    let mut grid = vec![0.0f64; n * n];
    let at = |x: usize, y: usize| y * n + x;
    let mut amplitude = 1.0;
    for &(x, y) in &[(0, 0), (side, 0), (0, side), (side, side)] {
        grid[at(x, y)] = rng.uniform_range(-amplitude, amplitude);
    }
    let mut step = side;
    while step > 1 {
        let half = step / 2;
        amplitude *= roughness;
        // Diamond step: square centers.
        for y in (half..n).step_by(step) {
            for x in (half..n).step_by(step) {
                let avg = (grid[at(x - half, y - half)]
                    + grid[at(x + half, y - half)]
                    + grid[at(x - half, y + half)]
                    + grid[at(x + half, y + half)])
                    / 4.0;
                grid[at(x, y)] = avg + rng.uniform_range(-amplitude, amplitude);
            }
        }
        // Square step: edge midpoints.
        for y in (0..n).step_by(half) {
            let x_start = if (y / half) % 2 == 0 { half } else { 0 };
            for x in (x_start..n).step_by(step) {
                let mut sum = 0.0;
                let mut count = 0.0;
                if x >= half {
                    sum += grid[at(x - half, y)];
                    count += 1.0;
                }
                if x + half < n {
                    sum += grid[at(x + half, y)];
                    count += 1.0;
                }
                if y >= half {
                    sum += grid[at(x, y - half)];
                    count += 1.0;
                }
                if y + half < n {
                    sum += grid[at(x, y + half)];
                    count += 1.0;
                }
                grid[at(x, y)] = sum / count + rng.uniform_range(-amplitude, amplitude);
            }
        }
        step = half;
    }

    let mut field: Vec<f64> = (0..height)
        .flat_map(|y| (0..width).map(move |x| (x, y)))
        .map(|(x, y)| grid[at(x, y)])
        .collect();
    let (lo, hi) = field
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = hi - lo;
    for v in &mut field {
        *v = if span > 0.0 { (*v - lo) / span } else { 1.0 };
    }
    let mean = field.iter().sum::<f64>() / field.len() as f64;
    let scale = if mean > 0.0 { omega / mean } else { omega };
    for v in &mut field {
        *v = (*v * scale).clamp(0.0, 1.0);
    }
    field
}
