//! Severity registry: the per-kind parameter tables for severities 1–5.

use serde::{Deserialize, Serialize};

use super::{CorruptionKind, CorruptionParams, FogField, Severity, SpecularParams};
use crate::error::{Error, Result};

/// The built-in registry, verbatim. [`SeverityTable::default`] parses it.
pub const DEFAULT_REGISTRY_TOML: &str = include_str!("severity_defaults.toml");

pub const REGISTRY_SCHEMA_VERSION: u32 = 1;

type Levels<T> = [T; 5];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleLevels {
    pub alpha: Levels<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FogLevels {
    pub omega: Levels<f64>,
    pub atmospheric_light: f64,
    pub field: FogFieldKind,
    pub plasma_roughness: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FogFieldKind {
    Uniform,
    Plasma,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefocusLevels {
    pub radius: Levels<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlassLevels {
    pub sigma: Levels<f64>,
    pub iterations: Levels<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionLevels {
    pub length: Levels<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoomLevels {
    pub max_zoom: Levels<f64>,
    pub step: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SigmaLevels {
    pub sigma: Levels<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpulseLevels {
    pub probability: Levels<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShotLevels {
    pub lambda: Levels<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsoLevels {
    pub luma_sigma: Levels<f64>,
    pub chroma_sigma: Levels<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LensLevels {
    pub k1: Levels<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolutionLevels {
    pub factor: Levels<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecularLevels {
    pub blobs: Levels<u32>,
    pub gain: Levels<f64>,
    pub min_sigma_fraction: f64,
    pub max_sigma_fraction: f64,
    pub min_aspect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColorLevels {
    pub hue_shift_deg: Levels<f64>,
    pub saturation_scale: Levels<f64>,
}

/// Parameters for every kind at every severity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeverityTable {
    pub schema_version: u32,
    pub brightness: ScaleLevels,
    pub darkness: ScaleLevels,
    pub contrast: ScaleLevels,
    pub fog: FogLevels,
    pub defocus_blur: DefocusLevels,
    pub glass_blur: GlassLevels,
    pub motion_blur: MotionLevels,
    pub zoom_blur: ZoomLevels,
    pub gaussian_noise: SigmaLevels,
    pub impulse_noise: ImpulseLevels,
    pub shot_noise: ShotLevels,
    pub iso_noise: IsoLevels,
    pub lens_distortion: LensLevels,
    pub resolution_change: ResolutionLevels,
    pub specular_reflection: SpecularLevels,
    pub color_changes: ColorLevels,
}

impl Default for SeverityTable {
    fn default() -> Self {
        Self::from_toml(DEFAULT_REGISTRY_TOML).expect("built-in severity registry is valid")
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Trend {
    Rising,
    Falling,
}

fn check_levels(name: &str, levels: &[f64; 5], lo: f64, hi: f64, trend: Trend) -> Result<()> {
    for (i, &v) in levels.iter().enumerate() {
        if !v.is_finite() || v < lo || v > hi {
            return Err(Error::Config(format!(
                "{name}[severity {}] = {v} outside [{lo}, {hi}]",
                i + 1
            )));
        }
    }
    for pair in levels.windows(2) {
        let ok = match trend {
            Trend::Rising => pair[1] >= pair[0],
            Trend::Falling => pair[1] <= pair[0],
        };
        if !ok {
            let dir = if trend == Trend::Rising { "non-decreasing" } else { "non-increasing" };
            return Err(Error::Config(format!("{name} must be {dir} across severities")));
        }
    }
    Ok(())
}

fn check_scalar(name: &str, v: f64, lo: f64, hi: f64) -> Result<()> {
    if !v.is_finite() || v < lo || v > hi {
        return Err(Error::Config(format!("{name} = {v} outside [{lo}, {hi}]")));
    }
    Ok(())
}

fn as_f64<const N: usize>(levels: &[u32; N]) -> [f64; 5] {
    let mut out = [0.0; 5];
    for (o, &v) in out.iter_mut().zip(levels) {
        *o = v as f64;
    }
    out
}

impl SeverityTable {
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: SeverityTable =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        table.validate()?;
        Ok(table)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Canonical serialization, embedded in corpus manifests.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("severity table serializes")
    }

    pub fn validate(&self) -> Result<()> {
        use Trend::*;
        if self.schema_version != REGISTRY_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported registry schema_version {} (expected {REGISTRY_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        check_levels("brightness.alpha", &self.brightness.alpha, 1.0, 100.0, Rising)?;
        check_levels("darkness.alpha", &self.darkness.alpha, 0.0, 1.0, Falling)?;
        check_levels("contrast.alpha", &self.contrast.alpha, 0.0, 1.0, Falling)?;
        check_levels("fog.omega", &self.fog.omega, 0.0, 1.0, Rising)?;
        check_scalar("fog.atmospheric_light", self.fog.atmospheric_light, 0.0, 1.0)?;
        check_scalar("fog.plasma_roughness", self.fog.plasma_roughness, 0.0, 1.0)?;
        check_levels("defocus_blur.radius", &self.defocus_blur.radius, 0.0, 256.0, Rising)?;
        check_levels("glass_blur.sigma", &self.glass_blur.sigma, 0.0, 64.0, Rising)?;
        check_levels("glass_blur.iterations", &as_f64(&self.glass_blur.iterations), 0.0, 1000.0, Rising)?;
        check_levels("motion_blur.length", &as_f64(&self.motion_blur.length), 1.0, 513.0, Rising)?;
        check_levels("zoom_blur.max_zoom", &self.zoom_blur.max_zoom, 1.0, 4.0, Rising)?;
        check_scalar("zoom_blur.step", self.zoom_blur.step, 1e-4, 1.0)?;
        check_levels("gaussian_noise.sigma", &self.gaussian_noise.sigma, 0.0, 10.0, Rising)?;
        check_levels("impulse_noise.probability", &self.impulse_noise.probability, 0.0, 1.0, Rising)?;
        check_levels("shot_noise.lambda", &self.shot_noise.lambda, 1e-6, 1e12, Falling)?;
        check_levels("iso_noise.luma_sigma", &self.iso_noise.luma_sigma, 0.0, 10.0, Rising)?;
        check_levels("iso_noise.chroma_sigma", &self.iso_noise.chroma_sigma, 0.0, 10.0, Rising)?;
        check_levels("lens_distortion.k1", &self.lens_distortion.k1, -1.0, 0.0, Falling)?;
        check_levels("resolution_change.factor", &self.resolution_change.factor, 1e-6, 1.0, Falling)?;
        let spec = &self.specular_reflection;
        check_levels("specular_reflection.blobs", &as_f64(&spec.blobs), 0.0, 10_000.0, Rising)?;
        check_levels("specular_reflection.gain", &spec.gain, 0.0, 10.0, Rising)?;
        check_scalar("specular_reflection.min_sigma_fraction", spec.min_sigma_fraction, 1e-6, 0.5)?;
        check_scalar("specular_reflection.max_sigma_fraction", spec.max_sigma_fraction, spec.min_sigma_fraction, 0.5)?;
        check_scalar("specular_reflection.min_aspect", spec.min_aspect, 1e-6, 1.0)?;
        check_levels("color_changes.hue_shift_deg", &self.color_changes.hue_shift_deg, 0.0, 360.0, Rising)?;
        check_levels("color_changes.saturation_scale", &self.color_changes.saturation_scale, 0.0, 100.0, Rising)?;
        Ok(())
    }

    /// Concrete parameters for one cell of the grid.
    pub fn params(&self, kind: CorruptionKind, severity: Severity) -> CorruptionParams {
        let i = severity.index();
        use CorruptionKind as K;
        match kind {
            K::Brightness => CorruptionParams::Brightness { alpha: self.brightness.alpha[i] },
            K::Darkness => CorruptionParams::Darkness { alpha: self.darkness.alpha[i] },
            K::Contrast => CorruptionParams::Contrast { alpha: self.contrast.alpha[i] },
            K::Fog => CorruptionParams::Fog {
                omega: self.fog.omega[i],
                atmospheric_light: self.fog.atmospheric_light,
                field: match self.fog.field {
                    FogFieldKind::Uniform => FogField::Uniform,
                    FogFieldKind::Plasma => FogField::Plasma {
                        roughness: self.fog.plasma_roughness,
                    },
                },
            },
            K::DefocusBlur => CorruptionParams::DefocusBlur { radius: self.defocus_blur.radius[i] },
            K::GlassBlur => CorruptionParams::GlassBlur {
                sigma: self.glass_blur.sigma[i],
                iterations: self.glass_blur.iterations[i],
            },
            K::MotionBlur => CorruptionParams::MotionBlur {
                length: self.motion_blur.length[i],
                angle: None,
            },
            K::ZoomBlur => CorruptionParams::ZoomBlur {
                max_zoom: self.zoom_blur.max_zoom[i],
                step: self.zoom_blur.step,
            },
            K::GaussianNoise => CorruptionParams::GaussianNoise { sigma: self.gaussian_noise.sigma[i] },
            K::ImpulseNoise => CorruptionParams::ImpulseNoise {
                probability: self.impulse_noise.probability[i],
            },
            K::ShotNoise => CorruptionParams::ShotNoise { lambda: self.shot_noise.lambda[i] },
            K::IsoNoise => CorruptionParams::IsoNoise {
                luma_sigma: self.iso_noise.luma_sigma[i],
                chroma_sigma: self.iso_noise.chroma_sigma[i],
            },
            K::LensDistortion => CorruptionParams::LensDistortion { k1: self.lens_distortion.k1[i] },
            K::ResolutionChange => CorruptionParams::ResolutionChange {
                factor: self.resolution_change.factor[i],
            },
            K::SpecularReflection => CorruptionParams::SpecularReflection(SpecularParams {
                blobs: self.specular_reflection.blobs[i],
                gain: self.specular_reflection.gain[i],
                min_sigma_fraction: self.specular_reflection.min_sigma_fraction,
                max_sigma_fraction: self.specular_reflection.max_sigma_fraction,
                min_aspect: self.specular_reflection.min_aspect,
            }),
            K::ColorChanges => CorruptionParams::ColorChanges {
                hue_shift_deg: self.color_changes.hue_shift_deg[i],
                saturation_scale: self.color_changes.saturation_scale[i],
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_documented_values() {
        let t = SeverityTable::default();
        assert_eq!(t.brightness.alpha, [1.1, 1.2, 1.3, 1.4, 1.5]);
        assert_eq!(t.darkness.alpha, [0.7, 0.55, 0.4, 0.3, 0.2]);
        assert_eq!(t.contrast.alpha, [0.75, 0.6, 0.45, 0.3, 0.15]);
        assert_eq!(t.fog.omega, [0.15, 0.3, 0.45, 0.6, 0.75]);
        assert_eq!(t.fog.atmospheric_light, 1.0);
        assert_eq!(t.fog.field, FogFieldKind::Uniform);
        assert_eq!(t.defocus_blur.radius, [2.0, 3.0, 4.0, 6.0, 8.0]);
        assert_eq!(t.glass_blur.sigma, [0.7, 0.9, 1.1, 1.3, 1.5]);
        assert_eq!(t.glass_blur.iterations, [1, 2, 3, 4, 5]);
        assert_eq!(t.motion_blur.length, [7, 11, 15, 19, 23]);
        assert_eq!(t.zoom_blur.max_zoom, [1.06, 1.11, 1.16, 1.21, 1.26]);
        assert_eq!(t.gaussian_noise.sigma, [0.04, 0.06, 0.09, 0.13, 0.18]);
        assert_eq!(t.impulse_noise.probability, [0.01, 0.02, 0.05, 0.08, 0.12]);
        assert_eq!(t.shot_noise.lambda, [60.0, 25.0, 12.0, 5.0, 3.0]);
        assert_eq!(t.iso_noise.luma_sigma, [0.02, 0.04, 0.06, 0.09, 0.13]);
        assert_eq!(t.iso_noise.chroma_sigma, [0.01, 0.02, 0.04, 0.06, 0.09]);
        assert_eq!(t.lens_distortion.k1, [-0.05, -0.1, -0.2, -0.3, -0.4]);
        assert_eq!(t.resolution_change.factor, [0.8, 0.6, 0.45, 0.3, 0.2]);
        assert_eq!(t.specular_reflection.blobs, [1, 2, 3, 4, 5]);
        assert_eq!(t.specular_reflection.gain, [0.4, 0.5, 0.6, 0.8, 1.0]);
        assert_eq!(t.color_changes.hue_shift_deg, [6.0, 12.0, 18.0, 24.0, 30.0]);
        assert_eq!(t.color_changes.saturation_scale, [1.1, 1.2, 1.35, 1.5, 1.7]);
    }

    #[test]
    fn canonical_toml_round_trips() {
        let t = SeverityTable::default();
        assert_eq!(SeverityTable::from_toml(&t.to_toml()).unwrap(), t);
    }

    #[test]
    fn rejects_non_monotone_and_out_of_range() {
        let bad = DEFAULT_REGISTRY_TOML.replace(
            "alpha = [1.1, 1.2, 1.3, 1.4, 1.5]",
            "alpha = [1.1, 1.3, 1.2, 1.4, 1.5]",
        );
        assert!(matches!(SeverityTable::from_toml(&bad), Err(Error::Config(_))));
        let bad = DEFAULT_REGISTRY_TOML.replace(
            "probability = [0.01, 0.02, 0.05, 0.08, 0.12]",
            "probability = [0.01, 0.02, 0.05, 0.08, 1.2]",
        );
        assert!(SeverityTable::from_toml(&bad).is_err());
        let bad = DEFAULT_REGISTRY_TOML.replace("factor = [0.8, 0.6, 0.45, 0.3, 0.2]", "factor = [0.8, 0.6]");
        assert!(SeverityTable::from_toml(&bad).is_err());
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = format!("{DEFAULT_REGISTRY_TOML}\n[sharpen]\namount = [1, 2, 3, 4, 5]\n");
        assert!(SeverityTable::from_toml(&bad).is_err());
    }
}
