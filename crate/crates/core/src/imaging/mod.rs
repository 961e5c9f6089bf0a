//! Pixel-level primitives shared by the corruptions: the [`Image`] type,
//! convolution, resampling, color conversion and seeded randomness.
//!
//! Pixel data is `f32`; accumulations run in `f64`. Every out-of-bounds
//! access replicates the nearest edge pixel.

mod color;
mod image;
mod kernel;
mod resample;
mod rng;

pub use self::color::{
    hsv_pixel_to_rgb, hsv_to_rgb, luminance, mean_luminance, rgb_pixel_to_hsv, rgb_to_hsv, HsvImage,
    LUMA_WEIGHTS,
};
pub use self::image::Image;
pub use self::kernel::{convolve, Kernel};
pub(crate) use self::resample::sample_bilinear;
pub use self::resample::{remap, resize, Interpolation, RemapField};
pub use self::rng::{derive_seed, Prng, PRNG_ALGORITHM};
