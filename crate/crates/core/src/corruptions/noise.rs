use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};
use crate::imaging::{hsv_to_rgb, rgb_to_hsv, Image, Prng};

fn check_sigma(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} = {v} must be finite and >= 0")))
    }
}

/// `I' = I + N(0, σ²)` per sample, clamped.
pub fn gaussian_noise(img: &Image, sigma: f64, rng: &mut Prng) -> Result<Image> {
    check_sigma("sigma", sigma)?;
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    Ok(img.map_samples(|v| v as f64 + sigma * rng.normal()))
}

/// Salt-and-pepper: each pixel becomes black or white (equal odds) with
/// the given probability.
pub fn impulse_noise(img: &Image, probability: f64, rng: &mut Prng) -> Result<Image> {
    if !(0.0..=1.0).contains(&probability) {
        return Err(Error::invalid(format!("impulse probability {probability} outside [0, 1]")));
    }
    Ok(img.map_pixels(|px| {
        if rng.uniform() < probability {
            let v = if rng.uniform() < 0.5 { 0.0 } else { 1.0 };
            [v; 3]
        } else {
            [px[0] as f64, px[1] as f64, px[2] as f64]
        }
    }))
}

/// `I' = Poisson(λI) / λ` per sample, clamped. Smaller `λ` is noisier.
pub fn shot_noise(img: &Image, lambda: f64, rng: &mut Prng) -> Result<Image> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!("shot noise lambda {lambda} must be > 0")));
    }
    let mut first_error = None;
    let out = img.map_samples(|v| {
        let mean = v as f64 * lambda;
        if mean <= 0.0 {
            return 0.0;
        }
        match Poisson::new(mean) {
            Ok(dist) => dist.sample(rng) / lambda,
            Err(e) => {
                first_error.get_or_insert_with(|| e.to_string());
                v as f64
            }
        }
    });
    match first_error {
        Some(e) => Err(Error::invalid(format!("poisson sampling failed: {e}"))),
        None => Ok(out),
    }
}

/// Sensor noise in HSV: Gaussian `σ_l` on value, Gaussian `σ_c` on
/// saturation and on hue (hue measured in turns, so `σ_c = 0.01` is 3.6°).
///
/// Three normals are drawn per pixel regardless of the sigmas, so streams
/// line up across parameter settings.
pub fn iso_noise(img: &Image, luma_sigma: f64, chroma_sigma: f64, rng: &mut Prng) -> Result<Image> {
    check_sigma("luma_sigma", luma_sigma)?;
    check_sigma("chroma_sigma", chroma_sigma)?;
    let mut hsv = rgb_to_hsv(img);
    for px in hsv.data_mut().chunks_exact_mut(3) {
        let nh = rng.normal();
        let ns = rng.normal();
        let nv = rng.normal();
        px[0] = (px[0] + 360.0 * chroma_sigma * nh).rem_euclid(360.0);
        px[1] = (px[1] + chroma_sigma * ns).clamp(0.0, 1.0);
        px[2] = (px[2] + luma_sigma * nv).clamp(0.0, 1.0);
    }
    Ok(hsv_to_rgb(&hsv))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern() -> Image {
        Image::from_fn(16, 16, |x, y| {
            let v = (x as f32 + 1.0) / 17.0;
            [v, (y as f32 + 1.0) / 17.0, 0.5]
        })
    }

    #[test]
    fn zero_parameters_are_identity() {
        let img = pattern();
        let mut rng = Prng::new(3);
        assert_eq!(gaussian_noise(&img, 0.0, &mut rng).unwrap(), img);
        assert_eq!(impulse_noise(&img, 0.0, &mut rng).unwrap(), img);
        let iso = iso_noise(&img, 0.0, 0.0, &mut rng).unwrap();
        for (&a, &b) in iso.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn impulse_probability_one_saturates() {
        let out = impulse_noise(&pattern(), 1.0, &mut Prng::new(9)).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0 || v == 1.0));
        assert!(impulse_noise(&pattern(), 1.5, &mut Prng::new(9)).is_err());
    }

    #[test]
    fn shot_noise_keeps_black_black() {
        let zero = Image::gray(8, 8, 0.0);
        assert_eq!(shot_noise(&zero, 3.0, &mut Prng::new(1)).unwrap(), zero);
        assert!(shot_noise(&zero, 0.0, &mut Prng::new(1)).is_err());
    }

    #[test]
    fn shot_noise_large_lambda_is_nearly_identity() {
        let img = pattern();
        let out = shot_noise(&img, 1e6, &mut Prng::new(2)).unwrap();
        for (&a, &b) in out.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 0.01);
        }
    }

    #[test]
    fn negative_sigma_rejected() {
        assert!(gaussian_noise(&pattern(), -0.1, &mut Prng::new(0)).is_err());
        assert!(iso_noise(&pattern(), 0.1, f64::NAN, &mut Prng::new(0)).is_err());
    }
}
