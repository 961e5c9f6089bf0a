//! The sixteen endoscopic corruptions, their severity registry, and
//! dispatch from a [`CorruptionSpec`] to the concrete transform.
//!
//! Every transform is a pure function of `(image, parameters, seed)` and
//! returns an image of the same size with samples in `[0, 1]`.

mod blur;
mod endoscopic;
mod noise;
mod photometric;
mod registry;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{derive_seed, Image, Prng};

pub use self::blur::{defocus_blur, glass_blur, motion_blur, zoom_blur, zoom_scales};
pub use self::endoscopic::{
    color_changes, distort_radius, lens_distortion, lens_distortion_field, resolution_change,
    specular_reflection, undistort_radius, SpecularParams,
};
pub use self::noise::{gaussian_noise, impulse_noise, iso_noise, shot_noise};
pub use self::photometric::{brightness, contrast, darkness, fog, FogField};
pub use self::registry::{
    ColorLevels, DefocusLevels, FogFieldKind, FogLevels, GlassLevels, ImpulseLevels, IsoLevels,
    LensLevels, MotionLevels, ResolutionLevels, ScaleLevels, SeverityTable, ShotLevels, SigmaLevels,
    SpecularLevels, ZoomLevels, DEFAULT_REGISTRY_TOML, REGISTRY_SCHEMA_VERSION,
};

/// The four corruption groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Lighting,
    DataProcessing,
    Sensor,
    Endoscopy,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Lighting => "lighting",
            Family::DataProcessing => "data_processing",
            Family::Sensor => "sensor",
            Family::Endoscopy => "endoscopy",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionKind {
    Brightness,
    Darkness,
    Contrast,
    Fog,
    DefocusBlur,
    GlassBlur,
    MotionBlur,
    ZoomBlur,
    GaussianNoise,
    ImpulseNoise,
    ShotNoise,
    IsoNoise,
    LensDistortion,
    ResolutionChange,
    SpecularReflection,
    ColorChanges,
}

impl CorruptionKind {
    /// All kinds in catalog order.
    pub const ALL: [CorruptionKind; 16] = [
        CorruptionKind::Brightness,
        CorruptionKind::Darkness,
        CorruptionKind::Contrast,
        CorruptionKind::Fog,
        CorruptionKind::DefocusBlur,
        CorruptionKind::GlassBlur,
        CorruptionKind::MotionBlur,
        CorruptionKind::ZoomBlur,
        CorruptionKind::GaussianNoise,
        CorruptionKind::ImpulseNoise,
        CorruptionKind::ShotNoise,
        CorruptionKind::IsoNoise,
        CorruptionKind::LensDistortion,
        CorruptionKind::ResolutionChange,
        CorruptionKind::SpecularReflection,
        CorruptionKind::ColorChanges,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CorruptionKind::Brightness => "brightness",
            CorruptionKind::Darkness => "darkness",
            CorruptionKind::Contrast => "contrast",
            CorruptionKind::Fog => "fog",
            CorruptionKind::DefocusBlur => "defocus_blur",
            CorruptionKind::GlassBlur => "glass_blur",
            CorruptionKind::MotionBlur => "motion_blur",
            CorruptionKind::ZoomBlur => "zoom_blur",
            CorruptionKind::GaussianNoise => "gaussian_noise",
            CorruptionKind::ImpulseNoise => "impulse_noise",
            CorruptionKind::ShotNoise => "shot_noise",
            CorruptionKind::IsoNoise => "iso_noise",
            CorruptionKind::LensDistortion => "lens_distortion",
            CorruptionKind::ResolutionChange => "resolution_change",
            CorruptionKind::SpecularReflection => "specular_reflection",
            CorruptionKind::ColorChanges => "color_changes",
        }
    }

    /// Short label used in plots and tables (e.g. `LD` for lens distortion).
    pub fn abbreviation(self) -> &'static str {
        match self {
            CorruptionKind::Brightness => "BR",
            CorruptionKind::Darkness => "DK",
            CorruptionKind::Contrast => "CT",
            CorruptionKind::Fog => "FG",
            CorruptionKind::DefocusBlur => "DB",
            CorruptionKind::GlassBlur => "GB",
            CorruptionKind::MotionBlur => "MB",
            CorruptionKind::ZoomBlur => "ZB",
            CorruptionKind::GaussianNoise => "GN",
            CorruptionKind::ImpulseNoise => "IN",
            CorruptionKind::ShotNoise => "SN",
            CorruptionKind::IsoNoise => "ISO",
            CorruptionKind::LensDistortion => "LD",
            CorruptionKind::ResolutionChange => "RC",
            CorruptionKind::SpecularReflection => "SR",
            CorruptionKind::ColorChanges => "CC",
        }
    }

    pub fn family(self) -> Family {
        use CorruptionKind::*;
        match self {
            Brightness | Darkness | Contrast | Fog => Family::Lighting,
            DefocusBlur | GlassBlur | MotionBlur | ZoomBlur => Family::DataProcessing,
            GaussianNoise | ImpulseNoise | ShotNoise | IsoNoise => Family::Sensor,
            LensDistortion | ResolutionChange | SpecularReflection | ColorChanges => Family::Endoscopy,
        }
    }

    /// Position in [`CorruptionKind::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for CorruptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorruptionKind {
    type Err = Error;

    /// Accepts the snake_case name, with `-` allowed in place of `_`.
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        CorruptionKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .ok_or_else(|| Error::invalid(format!("unknown corruption kind `{s}`")))
    }
}

/// Severity level 1–5.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Severity(u8);

impl Severity {
    pub const MIN: u8 = 1;
    pub const MAX: u8 = 5;

    pub fn new(level: u8) -> Result<Self> {
        if (Self::MIN..=Self::MAX).contains(&level) {
            Ok(Self(level))
        } else {
            Err(Error::invalid(format!("severity {level} outside 1..=5")))
        }
    }

    pub fn all() -> impl Iterator<Item = Severity> {
        (Self::MIN..=Self::MAX).map(Severity)
    }

    #[inline]
    pub fn get(self) -> u8 {
        self.0
    }

    /// Zero-based row in the severity table.
    #[inline]
    pub fn index(self) -> usize {
        (self.0 - 1) as usize
    }
}

impl TryFrom<u8> for Severity {
    type Error = Error;
    fn try_from(v: u8) -> Result<Self> {
        Severity::new(v)
    }
}

impl From<Severity> for u8 {
    fn from(s: Severity) -> u8 {
        s.0
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Reproducibility token for one corrupted frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CorruptionSpec {
    pub kind: CorruptionKind,
    pub severity: Severity,
    pub seed: u64,
}

impl CorruptionSpec {
    pub fn new(kind: CorruptionKind, severity: u8, seed: u64) -> Result<Self> {
        Ok(Self {
            kind,
            severity: Severity::new(severity)?,
            seed,
        })
    }

    /// Spec for one frame of a corpus, seeded via [`derive_seed`].
    pub fn for_frame(global_seed: u64, frame_id: &str, kind: CorruptionKind, severity: Severity) -> Self {
        Self {
            kind,
            severity,
            seed: derive_seed(global_seed, frame_id, kind.name(), severity.get()),
        }
    }
}

/// Fully resolved parameters for one transform. Building these directly
/// bypasses the registry, e.g. to select an identity setting.
#[derive(Clone, Debug, PartialEq)]
pub enum CorruptionParams {
    Brightness { alpha: f64 },
    Darkness { alpha: f64 },
    Contrast { alpha: f64 },
    Fog { omega: f64, atmospheric_light: f64, field: FogField },
    DefocusBlur { radius: f64 },
    GlassBlur { sigma: f64, iterations: u32 },
    /// `angle` in radians; `None` draws it uniformly from `[0, π)`.
    MotionBlur { length: u32, angle: Option<f64> },
    ZoomBlur { max_zoom: f64, step: f64 },
    GaussianNoise { sigma: f64 },
    ImpulseNoise { probability: f64 },
    ShotNoise { lambda: f64 },
    IsoNoise { luma_sigma: f64, chroma_sigma: f64 },
    LensDistortion { k1: f64 },
    ResolutionChange { factor: f64 },
    SpecularReflection(SpecularParams),
    ColorChanges { hue_shift_deg: f64, saturation_scale: f64 },
}

impl CorruptionParams {
    pub fn kind(&self) -> CorruptionKind {
        use CorruptionKind as K;
        match self {
            CorruptionParams::Brightness { .. } => K::Brightness,
            CorruptionParams::Darkness { .. } => K::Darkness,
            CorruptionParams::Contrast { .. } => K::Contrast,
            CorruptionParams::Fog { .. } => K::Fog,
            CorruptionParams::DefocusBlur { .. } => K::DefocusBlur,
            CorruptionParams::GlassBlur { .. } => K::GlassBlur,
            CorruptionParams::MotionBlur { .. } => K::MotionBlur,
            CorruptionParams::ZoomBlur { .. } => K::ZoomBlur,
            CorruptionParams::GaussianNoise { .. } => K::GaussianNoise,
            CorruptionParams::ImpulseNoise { .. } => K::ImpulseNoise,
            CorruptionParams::ShotNoise { .. } => K::ShotNoise,
            CorruptionParams::IsoNoise { .. } => K::IsoNoise,
            CorruptionParams::LensDistortion { .. } => K::LensDistortion,
            CorruptionParams::ResolutionChange { .. } => K::ResolutionChange,
            CorruptionParams::SpecularReflection(_) => K::SpecularReflection,
            CorruptionParams::ColorChanges { .. } => K::ColorChanges,
        }
    }

    /// Runs the transform with a generator seeded from `seed`.
    pub fn apply(&self, img: &Image, seed: u64) -> Result<Image> {
        let mut rng = Prng::new(seed);
        match *self {
            CorruptionParams::Brightness { alpha } => brightness(img, alpha),
            CorruptionParams::Darkness { alpha } => darkness(img, alpha),
            CorruptionParams::Contrast { alpha } => contrast(img, alpha),
            CorruptionParams::Fog {
                omega,
                atmospheric_light,
                field,
            } => fog(img, omega, atmospheric_light, field, &mut rng),
            CorruptionParams::DefocusBlur { radius } => defocus_blur(img, radius),
            CorruptionParams::GlassBlur { sigma, iterations } => glass_blur(img, sigma, iterations, &mut rng),
            CorruptionParams::MotionBlur { length, angle } => {
                let angle = angle.unwrap_or_else(|| std::f64::consts::PI * rng.uniform());
                motion_blur(img, length, angle)
            }
            CorruptionParams::ZoomBlur { max_zoom, step } => zoom_blur(img, max_zoom, step),
            CorruptionParams::GaussianNoise { sigma } => gaussian_noise(img, sigma, &mut rng),
            CorruptionParams::ImpulseNoise { probability } => impulse_noise(img, probability, &mut rng),
            CorruptionParams::ShotNoise { lambda } => shot_noise(img, lambda, &mut rng),
            CorruptionParams::IsoNoise {
                luma_sigma,
                chroma_sigma,
            } => iso_noise(img, luma_sigma, chroma_sigma, &mut rng),
            CorruptionParams::LensDistortion { k1 } => lens_distortion(img, k1),
            CorruptionParams::ResolutionChange { factor } => resolution_change(img, factor),
            CorruptionParams::SpecularReflection(ref p) => specular_reflection(img, p, &mut rng),
            CorruptionParams::ColorChanges {
                hue_shift_deg,
                saturation_scale,
            } => color_changes(img, hue_shift_deg, saturation_scale),
        }
    }
}

/// Applies `spec` using the built-in severity registry.
pub fn apply(spec: &CorruptionSpec, img: &Image) -> Result<Image> {
    apply_with(spec, img, &SeverityTable::default())
}

/// Applies `spec` with parameters looked up in `table`.
pub fn apply_with(spec: &CorruptionSpec, img: &Image, table: &SeverityTable) -> Result<Image> {
    table.params(spec.kind, spec.severity).apply(img, spec.seed)
}

/// `(image, severity, seed)` form of a single kind, using `table`.
pub fn corrupt(kind: CorruptionKind, img: &Image, severity: u8, seed: u64, table: &SeverityTable) -> Result<Image> {
    let spec = CorruptionSpec::new(kind, severity, seed)?;
    apply_with(&spec, img, table)
}
