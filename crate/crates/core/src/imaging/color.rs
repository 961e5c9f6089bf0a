use crate::imaging::Image;

/// Rec. 601 luma weights.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// HSV planes stored interleaved as `(hue°, saturation, value)` with hue in
/// `[0, 360)` and the other two in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct HsvImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl HsvImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }
}

pub fn rgb_pixel_to_hsv([r, g, b]: [f64; 3]) -> [f64; 3] {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let hue = if delta <= 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    let sat = if max <= 0.0 { 0.0 } else { delta / max };
    [hue.rem_euclid(360.0), sat, max]
}

pub fn hsv_pixel_to_rgb([h, s, v]: [f64; 3]) -> [f64; 3] {
    let s = s.clamp(0.0, 1.0);
    let v = v.clamp(0.0, 1.0);
    let h = h.rem_euclid(360.0) / 60.0;
    let sector = (h.floor() as i64).rem_euclid(6);
    let f = h - h.floor();
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    match sector {
        0 => [v, t, p],
        1 => [q, v, p],
        2 => [p, v, t],
        3 => [p, q, v],
        4 => [t, p, v],
        _ => [v, p, q],
    }
}

pub fn rgb_to_hsv(img: &Image) -> HsvImage {
    let mut data = Vec::with_capacity(img.data().len());
    for px in img.data().chunks_exact(3) {
        data.extend(rgb_pixel_to_hsv([px[0] as f64, px[1] as f64, px[2] as f64]));
    }
    HsvImage {
        width: img.width(),
        height: img.height(),
        data,
    }
}

/// Converts back to RGB, clamping saturation and value first.
pub fn hsv_to_rgb(hsv: &HsvImage) -> Image {
    let mut data = Vec::with_capacity(hsv.data.len());
    for px in hsv.data.chunks_exact(3) {
        data.extend(hsv_pixel_to_rgb([px[0], px[1], px[2]]));
    }
    Image::from_f64(hsv.width, hsv.height, &data)
}

/// Per-pixel Rec. 601 luminance, row-major.
pub fn luminance(img: &Image) -> Vec<f64> {
    img.data()
        .chunks_exact(3)
        .map(|px| {
            let y = LUMA_WEIGHTS[0] * px[0] as f64
                + LUMA_WEIGHTS[1] * px[1] as f64
                + LUMA_WEIGHTS[2] * px[2] as f64;
            y.clamp(0.0, 1.0)
        })
        .collect()
}

/// Mean of [`luminance`] over the whole image.
pub fn mean_luminance(img: &Image) -> f64 {
    let lum = luminance(img);
    lum.iter().sum::<f64>() / lum.len() as f64
}
