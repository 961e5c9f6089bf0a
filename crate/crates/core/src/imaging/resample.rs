use crate::error::{Error, Result};
use crate::imaging::image::check_dims;
use crate::imaging::Image;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interpolation {
    Bilinear,
    Nearest,
}

/// Per-pixel source coordinates for [`remap`], in pixel units where
/// `(0, 0)` is the center of the top-left pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct RemapField {
    width: usize,
    height: usize,
    coords: Vec<(f64, f64)>,
}

impl RemapField {
    pub fn new(width: usize, height: usize, coords: Vec<(f64, f64)>) -> Result<Self> {
        check_dims(width, height)?;
        if coords.len() != width * height {
            return Err(Error::invalid("remap field size does not match dimensions"));
        }
        if coords.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::invalid("remap field contains non-finite coordinates"));
        }
        Ok(Self {
            width,
            height,
            coords,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> (f64, f64)) -> Result<Self> {
        check_dims(width, height)?;
        let mut coords = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                coords.push(f(x, y));
            }
        }
        Self::new(width, height, coords)
    }

    pub fn identity(width: usize, height: usize) -> Result<Self> {
        Self::from_fn(width, height, |x, y| (x as f64, y as f64))
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn coords(&self) -> &[(f64, f64)] {
        &self.coords
    }
}

/// Bilinear sample of all three channels with clamp-to-edge coordinates.
#[inline]
pub(crate) fn sample_bilinear(img: &Image, x: f64, y: f64) -> [f64; 3] {
    let w = img.width();
    let h = img.height();
    let x = x.clamp(0.0, (w - 1) as f64);
    let y = y.clamp(0.0, (h - 1) as f64);
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let x0 = x0 as usize;
    let y0 = y0 as usize;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let d = img.data();
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let p00 = d[(y0 * w + x0) * 3 + c] as f64;
        let p01 = d[(y0 * w + x1) * 3 + c] as f64;
        let p10 = d[(y1 * w + x0) * 3 + c] as f64;
        let p11 = d[(y1 * w + x1) * 3 + c] as f64;
        let top = p00 + fx * (p01 - p00);
        let bottom = p10 + fx * (p11 - p10);
        *o = top + fy * (bottom - top);
    }
    out
}

/// Samples `img` at the coordinates stored in `field` (bilinear,
/// clamp-to-edge). Integer coordinates reproduce source pixels exactly.
pub fn remap(img: &Image, field: &RemapField) -> Result<Image> {
    if field.width != img.width() || field.height != img.height() {
        return Err(Error::invalid(format!(
            "remap field is {}x{} but image is {}x{}",
            field.width,
            field.height,
            img.width(),
            img.height()
        )));
    }
    let mut out = Vec::with_capacity(img.data().len());
    for &(sx, sy) in &field.coords {
        out.extend(sample_bilinear(img, sx, sy));
    }
    Ok(Image::from_f64(img.width(), img.height(), &out))
}

/// Pixel-center aligned source coordinate for output index `i`.
#[inline]
fn source_coord(i: usize, src_len: usize, dst_len: usize) -> f64 {
    (i as f64 + 0.5) * (src_len as f64 / dst_len as f64) - 0.5
}

/// Resizes with pixel-center alignment: output index `i` samples source
/// coordinate `(i + 0.5) * src / dst - 0.5`, clamped to the image.
pub fn resize(img: &Image, new_w: usize, new_h: usize, interp: Interpolation) -> Result<Image> {
    if new_w == 0 || new_h == 0 {
        return Err(Error::invalid(format!(
            "resize target must be at least 1x1, got {new_w}x{new_h}"
        )));
    }
    let (w, h) = (img.width(), img.height());
    if (new_w, new_h) == (w, h) {
        return Ok(img.clone());
    }
    let mut out = Vec::with_capacity(new_w * new_h * 3);
    match interp {
        Interpolation::Bilinear => {
            let xs: Vec<f64> = (0..new_w).map(|x| source_coord(x, w, new_w)).collect();
            for y in 0..new_h {
                let sy = source_coord(y, h, new_h);
                for &sx in &xs {
                    out.extend(sample_bilinear(img, sx, sy));
                }
            }
        }
        Interpolation::Nearest => {
            let pick = |i: usize, src: usize, dst: usize| -> usize {
                (((i as f64 + 0.5) * src as f64 / dst as f64).floor() as usize).min(src - 1)
            };
            let d = img.data();
            for y in 0..new_h {
                let sy = pick(y, h, new_h);
                for x in 0..new_w {
                    let sx = pick(x, w, new_w);
                    let i = (sy * w + sx) * 3;
                    out.extend(d[i..i + 3].iter().map(|&v| v as f64));
                }
            }
        }
    }
    Ok(Image::from_f64(new_w, new_h, &out))
}
