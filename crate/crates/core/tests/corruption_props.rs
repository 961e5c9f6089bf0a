use proptest::prelude::*;
use scopebench_core::corruptions::{
    brightness, contrast, corrupt, defocus_blur, distort_radius, gaussian_noise, glass_blur, impulse_noise, iso_noise,
    lens_distortion, motion_blur, shot_noise, specular_reflection, undistort_radius, zoom_blur, zoom_scales,
    SpecularParams,
};
use scopebench_core::imaging::{convolve, derive_seed, mean_luminance, Image, Kernel, Prng};
use scopebench_core::{CorruptionKind, Severity, SeverityTable};

fn textured(w: usize, h: usize, seed: u64) -> Image {
    let mut rng = Prng::new(seed);
    Image::from_fn(w, h, |x, y| {
        let base = 0.5 + 0.3 * ((x as f32 * 0.21).sin() * (y as f32 * 0.17).cos());
        let n = rng.uniform() as f32 * 0.1;
        [base + n, (base * 0.8 + n).min(1.0), 0.3 + 0.8 * n]
    })
}

fn random_image(w: usize, h: usize, seed: u64) -> Image {
    let mut rng = Prng::new(seed);
    Image::from_fn(w, h, |_, _| [rng.uniform() as f32, rng.uniform() as f32, rng.uniform() as f32])
}

fn diffs(out: &Image, img: &Image) -> Vec<f64> {
    out.data().iter().zip(img.data()).map(|(&a, &b)| a as f64 - b as f64).collect()
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

#[test]
fn gaussian_noise_moments_on_mid_gray() {
    let sigma = 0.09;
    let img = Image::gray(1000, 334, 0.5);
    let d = diffs(&gaussian_noise(&img, sigma, &mut Prng::new(11)).unwrap(), &img);
    let n = d.len() as f64;
    assert!(n >= 1e6);
    let (mean, std) = mean_std(&d);
    assert!(mean.abs() <= 4.0 * sigma / n.sqrt(), "mean {mean}");
    assert!((std / sigma - 1.0).abs() <= 0.01, "std {std}");
}

#[test]
fn shot_noise_variance_on_mid_gray() {
    let lambda = 12.0;
    let img = Image::gray(1000, 334, 0.5);
    let d = diffs(&shot_noise(&img, lambda, &mut Prng::new(12)).unwrap(), &img);
    let (_, std) = mean_std(&d);
    let target = 0.5 / lambda;
    assert!((std * std / target - 1.0).abs() <= 0.05, "variance {}", std * std);
}

#[test]
fn impulse_rate_matches_probability() {
    let p = 0.05;
    let img = Image::gray(500, 400, 0.5);
    let out = impulse_noise(&img, p, &mut Prng::new(13)).unwrap();
    let changed = out.data().iter().filter(|&&v| v != 0.5).count() as f64;
    let n = img.data().len() as f64;
    let sd = (p * (1.0 - p) / n).sqrt();
    assert!((changed / n - p).abs() < 5.0 * sd, "rate {}", changed / n);
    assert!(out.data().iter().all(|&v| v == 0.0 || v == 0.5 || v == 1.0));
}

#[test]
fn iso_noise_has_luma_and_chroma_components() {
    let img = Image::filled(256, 256, [0.6, 0.4, 0.3]);
    let luma_only = iso_noise(&img, 0.05, 0.0, &mut Prng::new(1)).unwrap();
    let both = iso_noise(&img, 0.05, 0.05, &mut Prng::new(1)).unwrap();
    let chroma_only = iso_noise(&img, 0.0, 0.05, &mut Prng::new(1)).unwrap();
    assert_ne!(luma_only, img);
    assert_ne!(chroma_only, img);
    assert_ne!(both, luma_only);
    assert!((mean_luminance(&both) - mean_luminance(&img)).abs() < 0.01);
}

#[test]
fn specular_area_matches_blob_model() {
    let (w, h) = (256, 256);
    let p = SpecularParams {
        blobs: 3,
        gain: 0.6,
        min_sigma_fraction: 0.02,
        max_sigma_fraction: 0.05,
        min_aspect: 0.5,
    };
    let base = w.min(h) as f64;
    let (a, b) = (p.min_sigma_fraction * base, p.max_sigma_fraction * base);
    let e_sigma2 = (a * a + a * b + b * b) / 3.0;
    let e_aspect = (p.min_aspect + 1.0) / 2.0;
    // Level set g·exp(-q/2) > 0.1 of one blob is an ellipse with q < 2 ln(10 g).
    let per_blob = 2.0 * (10.0 * p.gain).ln() * std::f64::consts::PI * e_sigma2 * e_aspect;
    let expected = p.blobs as f64 * per_blob / (w * h) as f64;

    let img = Image::gray(w, h, 0.5);
    let mut total = 0.0;
    for seed in 0..100 {
        let out = specular_reflection(&img, &p, &mut Prng::new(seed)).unwrap();
        let bright = out.data().chunks_exact(3).filter(|px| px[0] - 0.5 > 0.1).count();
        total += bright as f64 / (w * h) as f64;
    }
    let measured = total / 100.0;
    assert!((measured / expected - 1.0).abs() <= 0.3, "measured {measured}, expected {expected}");
}

#[test]
fn glass_blur_permutes_pixels() {
    for seed in 0..20 {
        let img = random_image(48, 40, seed);
        let out = glass_blur(&img, 1.5, 3, &mut Prng::new(seed + 100)).unwrap();
        let sorted = |i: &Image| {
            let mut v: Vec<[u32; 3]> = i.data().chunks_exact(3).map(|p| [p[0].to_bits(), p[1].to_bits(), p[2].to_bits()]).collect();
            v.sort();
            v
        };
        assert_eq!(sorted(&out), sorted(&img));
        assert_ne!(out, img);
    }
}

/// Per-copy construction: copy `i` is the source magnified about the center
/// by `z_i`, read back with bilinear interpolation.
fn zoom_oracle(img: &Image, max_zoom: f64, step: f64) -> Vec<f64> {
    let (w, h) = (img.width(), img.height());
    let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
    let scales = zoom_scales(max_zoom, step).unwrap();
    let copies: Vec<Vec<f64>> = scales
        .iter()
        .map(|&z| {
            let mut copy = Vec::with_capacity(w * h * 3);
            for y in 0..h {
                for x in 0..w {
                    let sx = (cx + (x as f64 - cx) / z).clamp(0.0, w as f64 - 1.0);
                    let sy = (cy + (y as f64 - cy) / z).clamp(0.0, h as f64 - 1.0);
                    let (x0, y0) = (sx.floor() as usize, sy.floor() as usize);
                    let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
                    let (fx, fy) = (sx - x0 as f64, sy - y0 as f64);
                    for c in 0..3 {
                        let p = |xx: usize, yy: usize| img.pixel(xx, yy)[c] as f64;
                        copy.push(
                            (1.0 - fx) * (1.0 - fy) * p(x0, y0)
                                + fx * (1.0 - fy) * p(x1, y0)
                                + (1.0 - fx) * fy * p(x0, y1)
                                + fx * fy * p(x1, y1),
                        );
                    }
                }
            }
            copy
        })
        .collect();
    (0..w * h * 3)
        .map(|i| copies.iter().map(|c| c[i]).sum::<f64>() / copies.len() as f64)
        .collect()
}

#[test]
fn zoom_blur_matches_per_copy_oracle() {
    for seed in 0..5 {
        let img = random_image(21, 17, seed);
        let out = zoom_blur(&img, 1.16, 0.01).unwrap();
        let want = zoom_oracle(&img, 1.16, 0.01);
        for (&g, &w) in out.data().iter().zip(&want) {
            assert!((g as f64 - w).abs() <= 1e-9 + w * f32::EPSILON as f64, "{g} vs {w}");
        }
    }
}

#[test]
fn blurs_are_their_kernels() {
    let img = textured(40, 30, 3);
    assert_eq!(defocus_blur(&img, 3.0).unwrap(), convolve(&img, &Kernel::disk(3.0).unwrap()).unwrap());
    let angle = 0.7;
    assert_eq!(
        motion_blur(&img, 11, angle).unwrap(),
        convolve(&img, &Kernel::line(11, angle).unwrap()).unwrap()
    );
}

#[test]
fn lens_center_is_fixed() {
    for (w, h) in [(65, 49), (33, 97)] {
        let img = random_image(w, h, 9);
        let out = lens_distortion(&img, -0.3).unwrap();
        assert_eq!(out.pixel(w / 2, h / 2), img.pixel(w / 2, h / 2));
    }
}

#[test]
fn every_grid_cell_changes_a_frame() {
    let img = textured(64, 48, 5);
    let table = SeverityTable::default();
    for kind in CorruptionKind::ALL {
        for s in Severity::all() {
            let seed = derive_seed(7, "frame", kind.name(), s.get());
            let out = corrupt(kind, &img, s.get(), seed, &table).unwrap();
            assert_eq!((out.width(), out.height()), (64, 48));
            assert_ne!(out, img, "{kind}/{s} left the frame unchanged");
            assert!(out.data().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}

#[test]
fn seeds_over_the_grid_are_distinct() {
    let mut seen = std::collections::BTreeSet::new();
    for kind in CorruptionKind::ALL {
        for s in Severity::all() {
            assert!(seen.insert(derive_seed(42, "f0001", kind.name(), s.get())));
        }
    }
    assert_eq!(seen.len(), 80);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn same_seed_same_output(seed in any::<u64>(), k in 0usize..16, s in 1u8..=5) {
        let img = textured(24, 20, 1);
        let kind = CorruptionKind::ALL[k];
        let table = SeverityTable::default();
        let a = corrupt(kind, &img, s, seed, &table).unwrap();
        let b = corrupt(kind, &img, s, seed, &table).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn brightness_scales_then_clamps(v in 0.0f32..=1.0, alpha in 1.0f64..2.0) {
        let out = brightness(&Image::gray(2, 1, v), alpha).unwrap();
        let want = ((v as f64 * alpha).min(1.0)) as f32;
        prop_assert!((out.pixel(0, 0)[0] - want).abs() <= f32::EPSILON);
    }

    #[test]
    fn contrast_keeps_mean_luminance(alpha in 0.1f64..1.0, seed in any::<u64>()) {
        let img = random_image(16, 16, seed);
        let out = contrast(&img, alpha).unwrap();
        prop_assert!((mean_luminance(&out) - mean_luminance(&img)).abs() < 1e-6);
    }

    #[test]
    fn newton_inverse_satisfies_forward_model(k in prop::sample::select(vec![-0.05, -0.1, -0.2, -0.3, -0.4]), t in 0.0f64..1.0) {
        let fold = (-1.0f64 / (3.0 * k)).sqrt();
        let r = t * 0.95 * fold.min(1.0);
        let rd = distort_radius(r, k);
        let back = undistort_radius(rd, k);
        prop_assert!((distort_radius(back, k) - rd).abs() <= 1e-5);
    }
}
