use crate::error::{Error, Result};
use crate::imaging::{convolve, sample_bilinear, Image, Kernel, Prng};

/// Convolution with a normalized disk of `radius` pixels.
pub fn defocus_blur(img: &Image, radius: f64) -> Result<Image> {
    convolve(img, &Kernel::disk(radius)?)
}

/// Seeded local pixel swaps.
///
/// Each of `iterations` raster sweeps swaps every pixel with a neighbor at
/// offset `round(N(0, σ²))` per axis, limited to `±ceil(3σ)` and to the
/// image. Swaps move whole RGB triples, so the multiset of pixels (and of
/// samples per channel) is preserved exactly.
pub fn glass_blur(img: &Image, sigma: f64, iterations: u32, rng: &mut Prng) -> Result<Image> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::invalid(format!("glass blur sigma {sigma} must be >= 0")));
    }
    let (w, h) = (img.width() as i64, img.height() as i64);
    let window = (3.0 * sigma).ceil() as i64;
    let mut data = img.data().to_vec();
    if window == 0 {
        return Ok(img.clone());
    }
    for _ in 0..iterations {
        for y in 0..h {
            for x in 0..w {
                let dx = (sigma * rng.normal()).round() as i64;
                let dy = (sigma * rng.normal()).round() as i64;
                let nx = (x + dx.clamp(-window, window)).clamp(0, w - 1);
                let ny = (y + dy.clamp(-window, window)).clamp(0, h - 1);
                let a = ((y * w + x) * 3) as usize;
                let b = ((ny * w + nx) * 3) as usize;
                if a != b {
                    for c in 0..3 {
                        data.swap(a + c, b + c);
                    }
                }
            }
        }
    }
    Ok(Image::from_clamped(img.width(), img.height(), data))
}

/// Convolution with a normalized line of `length` taps at `angle` radians.
pub fn motion_blur(img: &Image, length: u32, angle: f64) -> Result<Image> {
    if !angle.is_finite() {
        return Err(Error::invalid("motion blur angle must be finite"));
    }
    convolve(img, &Kernel::line(length as usize, angle)?)
}

/// Zoom factors `1, 1 + step, …` up to `max_zoom` (inclusive, within rounding).
pub fn zoom_scales(max_zoom: f64, step: f64) -> Result<Vec<f64>> {
    if !(max_zoom >= 1.0) || !max_zoom.is_finite() {
        return Err(Error::invalid(format!("max zoom {max_zoom} must be >= 1")));
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::invalid(format!("zoom step {step} must be > 0")));
    }
    let count = ((max_zoom - 1.0) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| 1.0 + i as f64 * step).collect())
}

/// Mean of center-zoomed copies at every factor of [`zoom_scales`].
///
/// The copy at factor `z` samples the source bilinearly at
/// `c + (p − c) / z`, with `c` the center of the pixel grid.
pub fn zoom_blur(img: &Image, max_zoom: f64, step: f64) -> Result<Image> {
    let scales = zoom_scales(max_zoom, step)?;
    if scales.len() == 1 {
        return Ok(img.clone());
    }
    let (w, h) = (img.width(), img.height());
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let mut acc = vec![0.0f64; img.data().len()];
    for &z in &scales {
        for y in 0..h {
            let sy = cy + (y as f64 - cy) / z;
            for x in 0..w {
                let sx = cx + (x as f64 - cx) / z;
                let s = sample_bilinear(img, sx, sy);
                let i = (y * w + x) * 3;
                acc[i] += s[0];
                acc[i + 1] += s[1];
                acc[i + 2] += s[2];
            }
        }
    }
    let n = scales.len() as f64;
    for a in &mut acc {
        *a /= n;
    }
    Ok(Image::from_f64(w, h, &acc))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern(w: usize, h: usize) -> Image {
        Image::from_fn(w, h, |x, y| {
            let v = ((x * 7 + y * 13) % 17) as f32 / 16.0;
            [v, 1.0 - v, (v * 0.5).fract()]
        })
    }

    #[test]
    fn defocus_identity_and_constant() {
        let img = pattern(12, 10);
        assert_eq!(defocus_blur(&img, 0.0).unwrap(), img);
        let c = Image::gray(20, 20, 0.3);
        for &v in defocus_blur(&c, 4.0).unwrap().data() {
            assert!((v - 0.3).abs() < 1e-6);
        }
    }

    #[test]
    fn glass_identity_cases() {
        let img = pattern(9, 9);
        let mut rng = Prng::new(5);
        assert_eq!(glass_blur(&img, 1.0, 0, &mut rng).unwrap(), img);
        assert_eq!(glass_blur(&img, 0.0, 3, &mut rng).unwrap(), img);
        let c = Image::gray(9, 9, 0.7);
        assert_eq!(glass_blur(&c, 1.5, 5, &mut rng).unwrap(), c);
    }

    #[test]
    fn glass_moves_pixels() {
        let img = pattern(16, 16);
        let out = glass_blur(&img, 1.5, 2, &mut Prng::new(1)).unwrap();
        assert_ne!(out, img);
    }

    #[test]
    fn motion_length_one_is_identity() {
        let img = pattern(8, 8);
        assert_eq!(motion_blur(&img, 1, 0.7).unwrap(), img);
    }

    #[test]
    fn horizontal_motion_spreads_single_pixel() {
        let mut img = Image::gray(5, 1, 0.0);
        img.set_pixel(2, 0, [0.9; 3]);
        let out = motion_blur(&img, 3, 0.0).unwrap();
        let row: Vec<f32> = (0..5).map(|x| out.pixel(x, 0)[0]).collect();
        for (x, &v) in row.iter().enumerate() {
            let e = if (1..=3).contains(&x) { 0.3 } else { 0.0 };
            assert!((v - e).abs() < 1e-6, "{row:?}");
        }
    }

    #[test]
    fn zoom_scales_count() {
        assert_eq!(zoom_scales(1.0, 0.01).unwrap(), vec![1.0]);
        assert_eq!(zoom_scales(1.06, 0.01).unwrap().len(), 7);
        assert_eq!(zoom_scales(1.26, 0.01).unwrap().len(), 27);
        assert!(zoom_scales(0.9, 0.01).is_err());
    }

    #[test]
    fn zoom_identity_and_constant() {
        let img = pattern(10, 8);
        assert_eq!(zoom_blur(&img, 1.0, 0.01).unwrap(), img);
        let c = Image::gray(10, 8, 0.55);
        for &v in zoom_blur(&c, 1.2, 0.01).unwrap().data() {
            assert!((v - 0.55).abs() < 1e-6);
        }
    }
}
