//! TOML simulation config for the `synth` command.

use crate::{CliError, CliResult};
use pushbroom_core::rotation::AxisAngle;
use pushbroom_core::synth::{PerturbationSpec, SegmentSpec, SimConfig, TextureKind};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub scene: SceneConfig,
    pub camera: CameraConfig,
    pub flight: FlightConfig,
    #[serde(rename = "segment")]
    pub segments: Vec<SegmentConfig>,
    #[serde(default)]
    pub perturbation: PerturbationConfig,
    #[serde(default)]
    pub truth: TruthConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    /// gp_sample | checker_plus_blobs | from_file
    pub kind: String,
    #[serde(default = "default_scene_size")]
    pub size: usize,
    #[serde(default = "default_length_scale")]
    pub length_scale: f64,
    #[serde(default = "default_gsd")]
    pub gsd_m: f64,
    #[serde(default)]
    pub path: Option<PathBuf>,
}

fn default_scene_size() -> usize {
    512
}
fn default_length_scale() -> f64 {
    4.0
}
fn default_gsd() -> f64 {
    0.6
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraConfig {
    pub samples_per_line: usize,
    pub focal_px: f64,
    #[serde(default = "default_bands")]
    pub bands: usize,
}

fn default_bands() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlightConfig {
    pub height_m: f64,
    pub line_rate_hz: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    pub heading_deg: f64,
    pub speed_mps: f64,
    pub lines: usize,
    #[serde(default)]
    pub lateral_offset_m: f64,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbationConfig {
    pub roll_amp_rad: Option<f64>,
    pub roll_freq_hz: Option<f64>,
    pub pitch_amp_rad: Option<f64>,
    pub pitch_freq_hz: Option<f64>,
    pub motion_noise_rad: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct TruthConfig {
    /// Planted boresight axis-angle components, degrees.
    pub boresight_deg: Option<[f64; 3]>,
    pub time_offset_lines: Option<f64>,
    pub degraded_attitude_noise_deg: Option<f64>,
    pub ties_per_crossing: Option<usize>,
}

impl SynthConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))
    }

    pub fn texture_kind(&self) -> CliResult<TextureKind> {
        match self.scene.kind.as_str() {
            "gp_sample" => Ok(TextureKind::GpSample {
                length_scale: self.scene.length_scale,
            }),
            "checker_plus_blobs" => Ok(TextureKind::CheckerPlusBlobs),
            "from_file" => {
                let path = self.scene.path.clone().ok_or_else(|| {
                    CliError::usage("scene.kind = \"from_file\" requires scene.path")
                })?;
                Ok(TextureKind::FromFile(path))
            }
            other => Err(CliError::usage(format!("unknown scene.kind {other:?}"))),
        }
    }

    pub fn sim_config(&self) -> SimConfig {
        let defaults = PerturbationSpec::default();
        let p = &self.perturbation;
        let t = &self.truth;
        let boresight = match t.boresight_deg {
            Some([x, y, z]) => AxisAngle::from_components(
                x.to_radians(),
                y.to_radians(),
                z.to_radians(),
            ),
            None => AxisAngle::zero(),
        };
        SimConfig {
            height_m: self.flight.height_m,
            line_rate_hz: self.flight.line_rate_hz,
            samples_per_line: self.camera.samples_per_line,
            focal_px: self.camera.focal_px,
            bands: self.camera.bands,
            segments: self
                .segments
                .iter()
                .map(|s| SegmentSpec {
                    heading_rad: s.heading_deg.to_radians(),
                    speed_mps: s.speed_mps,
                    lines: s.lines,
                    lateral_offset_m: s.lateral_offset_m,
                })
                .collect(),
            perturbation: PerturbationSpec {
                roll_amp_rad: p.roll_amp_rad.unwrap_or(defaults.roll_amp_rad),
                roll_freq_hz: p.roll_freq_hz.unwrap_or(defaults.roll_freq_hz),
                pitch_amp_rad: p.pitch_amp_rad.unwrap_or(defaults.pitch_amp_rad),
                pitch_freq_hz: p.pitch_freq_hz.unwrap_or(defaults.pitch_freq_hz),
                motion_noise_rad: p.motion_noise_rad.unwrap_or(defaults.motion_noise_rad),
            },
            boresight,
            time_offset_lines: t.time_offset_lines.unwrap_or(0.0),
            degraded_attitude_noise_rad: t
                .degraded_attitude_noise_deg
                .unwrap_or(0.05)
                .to_radians(),
            ties_per_crossing: t.ties_per_crossing.unwrap_or(300),
            seed: self.seed,
        }
    }
}
