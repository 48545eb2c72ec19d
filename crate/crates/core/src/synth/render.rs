//! Synthetic push-broom renderer with exact ground truth.
//!
//! Flat terrain at z = 0 in an ENU world; the platform flies straight
//! segments centered over the scene origin at constant height. The body
//! frame is x forward, y right, z down; roll and pitch sinusoids plus
//! white noise perturb the attitude. Rays pass through the nominal camera
//! mount and the planted boresight, so every downstream estimator has an
//! exact reference:
//!
//! - per-line-pair true shifts from forward projection,
//! - a degraded trajectory with planted clock offset and attitude noise,
//! - exact tie points between crossing (or parallel) segments, consistent
//!   with the sampled trajectory to machine precision.

use super::texture::SceneTexture;
use crate::boresight::camera_mount;
use crate::camera::CameraModel;
use crate::cube::HyperCube;
use crate::error::Error;
use crate::interp;
use crate::rotation::{exp_map, log_map, AxisAngle, Mat3, Vec3};
use crate::shift::{ShiftEstimate, ShiftSeries};
use crate::features::{TiePoint, TiePointSet};
use crate::trajectory::{PoseSample, Trajectory};
use crate::Result;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Copy)]
pub struct SegmentSpec {
    /// Flight heading, radians counterclockwise from world +x.
    pub heading_rad: f64,
    pub speed_mps: f64,
    pub lines: usize,
    /// Cross-track displacement of the whole segment, meters.
    pub lateral_offset_m: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct PerturbationSpec {
    pub roll_amp_rad: f64,
    pub roll_freq_hz: f64,
    pub pitch_amp_rad: f64,
    pub pitch_freq_hz: f64,
    /// White attitude noise of the true motion, radians, per line.
    pub motion_noise_rad: f64,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        Self {
            roll_amp_rad: 5e-4,
            roll_freq_hz: 0.5,
            pitch_amp_rad: 2e-4,
            pitch_freq_hz: 0.3,
            motion_noise_rad: 5e-5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub height_m: f64,
    pub line_rate_hz: f64,
    pub samples_per_line: usize,
    pub focal_px: f64,
    pub bands: usize,
    pub segments: Vec<SegmentSpec>,
    pub perturbation: PerturbationSpec,
    /// Planted camera-to-IMU boresight.
    pub boresight: AxisAngle,
    /// Planted camera-to-trajectory clock offset, in lines.
    pub time_offset_lines: f64,
    /// Attitude white noise of the degraded trajectory, radians per axis.
    pub degraded_attitude_noise_rad: f64,
    /// Ground-truth tie points emitted per crossing segment pair.
    pub ties_per_crossing: usize,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            height_m: 500.0,
            line_rate_hz: 100.0,
            samples_per_line: 300,
            focal_px: 1345.0,
            bands: 1,
            segments: vec![SegmentSpec {
                heading_rad: 0.0,
                speed_mps: 30.0,
                lines: 800,
                lateral_offset_m: 0.0,
            }],
            perturbation: PerturbationSpec::default(),
            boresight: AxisAngle::zero(),
            time_offset_lines: 0.0,
            degraded_attitude_noise_rad: 0.0,
            ties_per_crossing: 300,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthDataset {
    pub cube: HyperCube,
    pub camera: CameraModel,
    pub truth_trajectory: Trajectory,
    pub degraded_trajectory: Trajectory,
    /// True per-pair shifts; segment-seam pairs are flagged unconverged.
    pub true_shifts: ShiftSeries,
    /// Exact correspondences per segment pair `(i, j)`, chunk-relative.
    pub true_ties: Vec<((usize, usize), TiePointSet)>,
    /// Line ranges `[start, end)` per segment.
    pub segments: Vec<(usize, usize)>,
    pub config: SimConfig,
}

/// Per-line attitude perturbation series, drawn once up front.
struct Perturbations {
    roll: Vec<f64>,
    pitch: Vec<f64>,
    /// Index offset: entry 0 is padded line `-pad`.
    pad: usize,
}

impl Perturbations {
    fn at(&self, padded_line: isize) -> (f64, f64) {
        let idx = (padded_line + self.pad as isize).clamp(0, self.roll.len() as isize - 1) as usize;
        (self.roll[idx], self.pitch[idx])
    }
}

fn nominal_frame(heading: f64) -> Mat3 {
    let forward = Vec3::new(heading.cos(), heading.sin(), 0.0);
    let right = Vec3::new(heading.sin(), -heading.cos(), 0.0);
    let down = Vec3::new(0.0, 0.0, -1.0);
    Mat3::from_columns(&[forward, right, down])
}

struct Simulation<'a> {
    scene: &'a SceneTexture,
    cfg: &'a SimConfig,
    camera: CameraModel,
    /// Camera-to-body rotation including the planted boresight.
    cam_to_body: Mat3,
    /// Segment start lines (unpadded global line index).
    seg_starts: Vec<usize>,
    perturb: Perturbations,
    tau: f64,
}

impl<'a> Simulation<'a> {
    /// Body-to-world attitude and position at a (possibly fractional,
    /// possibly padded) global line index.
    fn pose_at(&self, global_line: f64) -> (Mat3, Vec3) {
        // Segment lookup with clamped extrapolation beyond the ends.
        let mut seg = 0usize;
        for (i, &start) in self.seg_starts.iter().enumerate() {
            if global_line >= start as f64 {
                seg = i;
            }
        }
        let spec = &self.cfg.segments[seg];
        let local = global_line - self.seg_starts[seg] as f64;
        let along = (local - spec.lines as f64 / 2.0) * spec.speed_mps * self.tau;
        let frame = nominal_frame(spec.heading_rad);
        let forward: Vec3 = frame.column(0).into();
        let right: Vec3 = frame.column(1).into();
        let position =
            forward * along + right * spec.lateral_offset_m + Vec3::new(0.0, 0.0, self.cfg.height_m);

        // Perturbations interpolate linearly between per-line draws.
        let k0 = global_line.floor() as isize;
        let frac = global_line - k0 as f64;
        let (r0, p0) = self.perturb.at(k0);
        let (r1, p1) = self.perturb.at(k0 + 1);
        let roll = r0 * (1.0 - frac) + r1 * frac;
        let pitch = p0 * (1.0 - frac) + p1 * frac;
        let attitude = frame * exp_map(&AxisAngle::from_components(roll, pitch, 0.0));
        (attitude, position)
    }

    /// Ground intersection of the ray through `sample` at a line pose.
    fn ground_point(&self, attitude: &Mat3, position: &Vec3, sample: f64) -> Result<Vec3> {
        let v_cam = self.camera.ray(sample);
        let w = attitude * self.cam_to_body * v_cam;
        if w.z >= -1e-6 {
            return Err(Error::InvalidInput(
                "viewing ray does not intersect the ground".into(),
            ));
        }
        let lambda = position.z / (-w.z);
        Ok(position + w * lambda)
    }

    /// Texture value at a world point, or None when outside the scene.
    fn radiance(&self, ground: &Vec3) -> Option<f64> {
        let (h, w) = self.scene.raster.dim();
        let row = ground.y / self.scene.gsd + h as f64 / 2.0;
        let col = ground.x / self.scene.gsd + w as f64 / 2.0;
        interp::sample_raster(&self.scene.raster, row, col)
    }

    /// Sample coordinate observing a ground point from a line pose, plus
    /// the scan-plane residual (camera-frame y component).
    fn observe(&self, attitude: &Mat3, position: &Vec3, ground: &Vec3) -> (f64, f64, f64) {
        let v_cam = (attitude * self.cam_to_body).transpose() * (ground - position);
        (
            self.camera.sample_for_ray(&v_cam.normalize()),
            v_cam.y,
            v_cam.z,
        )
    }
}

/// Renders a synthetic dataset. Deterministic for a given seed.
pub fn render_pushbroom(scene: &SceneTexture, cfg: &SimConfig) -> Result<SynthDataset> {
    if cfg.segments.is_empty() {
        return Err(Error::InvalidInput("at least one segment required".into()));
    }
    if !(cfg.height_m > 0.0) || !(cfg.line_rate_hz > 0.0) {
        return Err(Error::InvalidInput("height and line rate must be positive".into()));
    }
    for (i, s) in cfg.segments.iter().enumerate() {
        if !(s.speed_mps > 0.0) || s.lines < 2 {
            return Err(Error::InvalidInput(format!(
                "segment {i}: speed must be positive and lines >= 2"
            )));
        }
    }
    let camera = CameraModel::centered(cfg.focal_px, cfg.samples_per_line)?;
    let tau = 1.0 / cfg.line_rate_hz;
    let total_lines: usize = cfg.segments.iter().map(|s| s.lines).sum();
    let mut seg_starts = Vec::with_capacity(cfg.segments.len());
    let mut acc = 0usize;
    for s in &cfg.segments {
        seg_starts.push(acc);
        acc += s.lines;
    }
    let segments: Vec<(usize, usize)> = seg_starts
        .iter()
        .zip(&cfg.segments)
        .map(|(start, s)| (*start, start + s.lines))
        .collect();

    // Trajectory padding so a shifted clock still covers every line time.
    let pad = cfg.time_offset_lines.abs().ceil() as usize + 600;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let normal = |rng: &mut ChaCha8Rng, std: f64| -> f64 {
        if std <= 0.0 {
            return 0.0;
        }
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        std * (-2.0 * u1.ln()).sqrt() * u2.cos()
    };
    let roll_phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let pitch_phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let n_padded = total_lines + 2 * pad;
    let mut roll = Vec::with_capacity(n_padded);
    let mut pitch = Vec::with_capacity(n_padded);
    for k in 0..n_padded {
        let t = (k as isize - pad as isize) as f64 * tau;
        let p = &cfg.perturbation;
        roll.push(
            p.roll_amp_rad * (std::f64::consts::TAU * p.roll_freq_hz * t + roll_phase).sin()
                + normal(&mut rng, p.motion_noise_rad),
        );
        pitch.push(
            p.pitch_amp_rad * (std::f64::consts::TAU * p.pitch_freq_hz * t + pitch_phase).sin()
                + normal(&mut rng, p.motion_noise_rad),
        );
    }

    let sim = Simulation {
        scene,
        cfg,
        camera,
        cam_to_body: camera_mount() * exp_map(&cfg.boresight),
        seg_starts,
        perturb: Perturbations { roll, pitch, pad },
        tau,
    };

    // Render the cube line by line.
    let mut data = Vec::with_capacity(total_lines * cfg.bands * cfg.samples_per_line);
    let mut line_times = Vec::with_capacity(total_lines);
    let mut poses = Vec::with_capacity(total_lines);
    for k in 0..total_lines {
        let (attitude, position) = sim.pose_at(k as f64);
        for band in 0..cfg.bands {
            let gain = 1.0 + 0.05 * band as f64;
            for s in 0..cfg.samples_per_line {
                let g = sim.ground_point(&attitude, &position, s as f64)?;
                let Some(tex) = sim.radiance(&g) else {
                    return Err(Error::InvalidInput(format!(
                        "footprint leaves the scene at line {k}, sample {s}"
                    )));
                };
                data.push(((100.0 + 20.0 * tex) * gain) as f32);
            }
        }
        line_times.push(k as f64 * tau);
        poses.push((attitude, position));
    }
    let cube = HyperCube::new(
        total_lines,
        cfg.samples_per_line,
        cfg.bands,
        data,
        line_times.clone(),
    )?;

    // True trajectory: one sample per padded line time.
    let mut truth_samples = Vec::with_capacity(n_padded);
    for k in 0..n_padded {
        let line = (k as isize - pad as isize) as f64;
        let (attitude, position) = sim.pose_at(line);
        truth_samples.push(PoseSample {
            time: line * tau,
            position,
            attitude: log_map(&attitude),
        });
    }
    let truth_trajectory = Trajectory::new(truth_samples.clone(), 0.0)?;

    // Degraded: timestamps shifted by the planted offset, attitude noise.
    let offset_s = cfg.time_offset_lines * tau;
    let degraded_samples: Vec<PoseSample> = truth_samples
        .iter()
        .map(|s| {
            let noise = AxisAngle::from_components(
                normal(&mut rng, cfg.degraded_attitude_noise_rad),
                normal(&mut rng, cfg.degraded_attitude_noise_rad),
                normal(&mut rng, cfg.degraded_attitude_noise_rad),
            );
            PoseSample {
                time: s.time + offset_s,
                position: s.position,
                attitude: log_map(&(exp_map(&s.attitude) * exp_map(&noise))),
            }
        })
        .collect();
    let degraded_trajectory = Trajectory::new(degraded_samples, 0.0)?;

    // True shifts by forward projection of the principal sample.
    let principal = camera.principal_sample();
    let seg_of = |line: usize| -> usize {
        segments
            .iter()
            .position(|(a, b)| line >= *a && line < *b)
            .expect("line within a segment")
    };
    let cross_gpp = cfg.height_m / cfg.focal_px;
    let mut estimates = Vec::with_capacity(total_lines - 1);
    for k in 0..total_lines - 1 {
        if seg_of(k) != seg_of(k + 1) {
            estimates.push(ShiftEstimate {
                dx: 0.0,
                dy: 0.0,
                neg_log_posterior: f64::NAN,
                converged: false,
                n_patches: 0,
            });
            continue;
        }
        let (att_b, pos_b) = &poses[k + 1];
        let (att_a, pos_a) = &poses[k];
        let g = sim.ground_point(att_b, pos_b, principal)?;
        let (q, _, _) = sim.observe(att_a, pos_a, &g);
        let g_a = sim.ground_point(att_a, pos_a, principal)?;
        let spec = &cfg.segments[seg_of(k)];
        let forward: Vec3 = nominal_frame(spec.heading_rad).column(0).into();
        let dy = (g - g_a).dot(&forward).max(0.0) / cross_gpp;
        estimates.push(ShiftEstimate {
            dx: principal - q,
            dy,
            neg_log_posterior: 0.0,
            converged: true,
            n_patches: 0,
        });
    }
    let true_shifts = ShiftSeries { estimates };

    // Exact tie points between every segment pair, generated against the
    // sampled trajectory so epipolar residuals vanish to machine precision.
    let mut true_ties = Vec::new();
    for i in 0..cfg.segments.len() {
        for j in i + 1..cfg.segments.len() {
            let ties = generate_ties(
                &sim,
                &truth_trajectory,
                &cube,
                &segments,
                i,
                j,
                cfg.ties_per_crossing,
                &mut rng,
            );
            true_ties.push(((i, j), ties));
        }
    }

    Ok(SynthDataset {
        cube,
        camera,
        truth_trajectory,
        degraded_trajectory,
        true_shifts,
        true_ties,
        segments,
        config: cfg.clone(),
    })
}

/// Pose from the sampled trajectory at a fractional line, through the same
/// interpolation path the downstream consumers use.
fn sampled_pose(
    traj: &Trajectory,
    cube: &HyperCube,
    line: f64,
) -> Option<(Mat3, Vec3)> {
    let t = cube.time_at_line(line);
    let pose = traj.interpolate(t).ok()?;
    Some((exp_map(&pose.attitude), pose.position))
}

/// Projects a ground point into a segment: finds the fractional line where
/// the camera-frame y component crosses zero, by scan plus bisection.
fn project_into_segment(
    sim: &Simulation,
    traj: &Trajectory,
    cube: &HyperCube,
    seg_range: (usize, usize),
    ground: &Vec3,
) -> Option<(f64, f64)> {
    let residual = |line: f64| -> Option<f64> {
        let (att, pos) = sampled_pose(traj, cube, line)?;
        let v = (att * sim.cam_to_body).transpose() * (ground - pos);
        if v.z <= 0.0 {
            return None;
        }
        Some(v.y)
    };
    let (start, end) = seg_range;
    let mut prev_line = start as f64;
    let mut prev = residual(prev_line)?;
    let mut bracket = None;
    for k in start + 1..end {
        let line = k as f64;
        let cur = residual(line)?;
        if prev == 0.0 || prev.signum() != cur.signum() {
            bracket = Some((prev_line, line, prev));
            break;
        }
        prev = cur;
        prev_line = line;
    }
    let (mut lo, mut hi, f_lo) = bracket?;
    let mut f_lo = f_lo;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let f_mid = residual(mid)?;
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let line = 0.5 * (lo + hi);
    let (att, pos) = sampled_pose(traj, cube, line)?;
    let v = ((att * sim.cam_to_body).transpose() * (ground - pos)).normalize();
    let sample = sim.camera.sample_for_ray(&v);
    if !(0.0..=(sim.cfg.samples_per_line - 1) as f64).contains(&sample) {
        return None;
    }
    Some((line, sample))
}

#[allow(clippy::too_many_arguments)]
fn generate_ties(
    sim: &Simulation,
    traj: &Trajectory,
    cube: &HyperCube,
    segments: &[(usize, usize)],
    seg_i: usize,
    seg_j: usize,
    target: usize,
    rng: &mut ChaCha8Rng,
) -> TiePointSet {
    let (h, w) = sim.scene.raster.dim();
    let half_extent = 0.5 * sim.scene.gsd * (h.min(w) as f64) - 2.0 * sim.scene.gsd;
    let mut matches = Vec::new();
    let mut attempts = 0;
    while matches.len() < target && attempts < target * 200 {
        attempts += 1;
        let g = Vec3::new(
            rng.gen_range(-half_extent..half_extent),
            rng.gen_range(-half_extent..half_extent),
            0.0,
        );
        let Some((line1, sample1)) = project_into_segment(sim, traj, cube, segments[seg_i], &g)
        else {
            continue;
        };
        let Some((line2, sample2)) = project_into_segment(sim, traj, cube, segments[seg_j], &g)
        else {
            continue;
        };
        matches.push(TiePoint {
            pt1: (sample1, line1 - segments[seg_i].0 as f64),
            pt2: (sample2, line2 - segments[seg_j].0 as f64),
            distance: 0.0,
        });
    }
    TiePointSet {
        chunk1_start_line: segments[seg_i].0,
        chunk2_start_line: segments[seg_j].0,
        matches,
        inlier_flags: None,
    }
}

/// Ground-truth manifest stored alongside synthetic datasets.
#[derive(Debug, Clone)]
pub struct DatasetManifest {
    pub focal_px: f64,
    pub principal_sample: f64,
    pub samples_per_line: usize,
    pub boresight: AxisAngle,
    pub time_offset_lines: f64,
    pub line_period_s: f64,
    /// Line ranges `[start, end)` and headings per segment.
    pub segments: Vec<(usize, usize, f64)>,
}

impl DatasetManifest {
    pub fn camera(&self) -> Result<CameraModel> {
        CameraModel::new(self.focal_px, self.samples_per_line, self.principal_sample)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let b = self.boresight.vector();
        let mut out = String::new();
        out.push_str(&format!("focal_px = {}\n", self.focal_px));
        out.push_str(&format!("principal_sample = {}\n", self.principal_sample));
        out.push_str(&format!("samples_per_line = {}\n", self.samples_per_line));
        out.push_str(&format!("boresight_rx = {}\n", b.x));
        out.push_str(&format!("boresight_ry = {}\n", b.y));
        out.push_str(&format!("boresight_rz = {}\n", b.z));
        out.push_str(&format!("time_offset_lines = {}\n", self.time_offset_lines));
        out.push_str(&format!("line_period_s = {}\n", self.line_period_s));
        out.push_str(&format!("segments = {}\n", self.segments.len()));
        for (i, (start, end, heading)) in self.segments.iter().enumerate() {
            out.push_str(&format!("segment_{i}_start = {start}\n"));
            out.push_str(&format!("segment_{i}_end = {end}\n"));
            out.push_str(&format!("segment_{i}_heading_rad = {heading}\n"));
        }
        fs::write(path, out)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut map = std::collections::BTreeMap::new();
        for row in text.lines() {
            if let Some((k, v)) = row.split_once('=') {
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        let get = |key: &str| -> Result<f64> {
            map.get(key)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Parse {
                    path: path.display().to_string(),
                    message: format!("missing or invalid {key}"),
                })
        };
        let n_segments = get("segments")? as usize;
        let mut segments = Vec::with_capacity(n_segments);
        for i in 0..n_segments {
            segments.push((
                get(&format!("segment_{i}_start"))? as usize,
                get(&format!("segment_{i}_end"))? as usize,
                get(&format!("segment_{i}_heading_rad"))?,
            ));
        }
        Ok(Self {
            focal_px: get("focal_px")?,
            principal_sample: get("principal_sample")?,
            samples_per_line: get("samples_per_line")? as usize,
            boresight: AxisAngle::from_components(
                get("boresight_rx")?,
                get("boresight_ry")?,
                get("boresight_rz")?,
            ),
            time_offset_lines: get("time_offset_lines")?,
            line_period_s: get("line_period_s")?,
            segments,
        })
    }
}

impl SynthDataset {
    pub fn manifest(&self) -> DatasetManifest {
        DatasetManifest {
            focal_px: self.config.focal_px,
            principal_sample: self.camera.principal_sample(),
            samples_per_line: self.config.samples_per_line,
            boresight: self.config.boresight,
            time_offset_lines: self.config.time_offset_lines,
            line_period_s: 1.0 / self.config.line_rate_hz,
            segments: self
                .segments
                .iter()
                .zip(&self.config.segments)
                .map(|((a, b), s)| (*a, *b, s.heading_rad))
                .collect(),
        }
    }

    /// Writes the full dataset directory: cube, degraded + true
    /// trajectories, manifest, true shifts and true tie points.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        self.cube.write(&dir.join("cube"))?;
        self.degraded_trajectory.write(&dir.join("trajectory.csv"))?;
        self.truth_trajectory
            .write(&dir.join("trajectory_true.csv"))?;
        self.manifest().write(&dir.join("manifest.txt"))?;
        self.true_shifts.write(&dir.join("shifts_true.csv"))?;
        for ((i, j), ties) in &self.true_ties {
            ties.write(&dir.join(format!("ties_true_{i}_{j}.csv")))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boresight::{build_epipolar_pairs, epipolar_residual};
    use crate::synth::texture::{generate_texture, TextureKind};
    use approx::assert_relative_eq;

    fn quiet_config(lines: usize) -> SimConfig {
        SimConfig {
            segments: vec![SegmentSpec {
                heading_rad: 0.0,
                speed_mps: 30.0,
                lines,
                lateral_offset_m: 0.0,
            }],
            perturbation: PerturbationSpec {
                roll_amp_rad: 0.0,
                roll_freq_hz: 0.5,
                pitch_amp_rad: 0.0,
                pitch_freq_hz: 0.3,
                motion_noise_rad: 0.0,
            },
            ties_per_crossing: 0,
            ..SimConfig::default()
        }
    }

    fn scene(seed: u64) -> SceneTexture {
        let mut tex = generate_texture(&TextureKind::GpSample { length_scale: 4.0 }, (512, 512), seed)
            .unwrap();
        tex.gsd = 0.6;
        tex
    }

    #[test]
    fn zero_perturbation_gives_zero_true_shifts_and_straight_columns() {
        let dataset = render_pushbroom(&scene(1), &quiet_config(300)).unwrap();
        for e in &dataset.true_shifts.estimates {
            assert!(e.converged);
            assert!(e.dx.abs() < 1e-9, "true dx {} without perturbation", e.dx);
        }
        // Along-track spacing in pixels: speed/line_rate over h/f.
        let expected_dy = (30.0 / 100.0) / (500.0 / 1345.0);
        for e in &dataset.true_shifts.estimates {
            assert_relative_eq!(e.dy, expected_dy, epsilon = 1e-6);
        }
    }

    #[test]
    fn roll_increment_maps_to_pixel_shift_through_focal_length() {
        let mut cfg = quiet_config(400);
        cfg.perturbation.roll_amp_rad = 4e-4;
        cfg.perturbation.roll_freq_hz = 0.7;
        let dataset = render_pushbroom(&scene(2), &cfg).unwrap();
        // Reconstruct roll increments from the truth trajectory.
        let times: Vec<f64> = dataset.cube.line_times().to_vec();
        let rates = crate::timesync::roll_rate_series(&dataset.truth_trajectory, &times).unwrap();
        let ppr = dataset.camera.pixels_per_radian(0.0);
        for (e, rate) in dataset.true_shifts.estimates.iter().zip(&rates) {
            let predicted = rate * ppr;
            assert!(
                (e.dx - predicted).abs() <= 0.01 * predicted.abs().max(0.05),
                "true dx {} vs roll projection {predicted}",
                e.dx
            );
        }
    }

    #[test]
    fn rendering_is_deterministic_per_seed() {
        let mut cfg = quiet_config(120);
        cfg.perturbation.motion_noise_rad = 1e-4;
        let a = render_pushbroom(&scene(3), &cfg).unwrap();
        let b = render_pushbroom(&scene(3), &cfg).unwrap();
        assert_eq!(a.cube.line_band(50, 0), b.cube.line_band(50, 0));
        assert_eq!(
            a.true_shifts.estimates[10].dx.to_bits(),
            b.true_shifts.estimates[10].dx.to_bits()
        );
    }

    #[test]
    fn footprint_leaving_scene_is_reported() {
        let mut cfg = quiet_config(40000); // far longer than the scene
        cfg.ties_per_crossing = 0;
        let err = render_pushbroom(&scene(4), &cfg).unwrap_err();
        match err {
            Error::InvalidInput(msg) => assert!(msg.contains("footprint leaves the scene")),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn crossing_ties_have_machine_precision_epipolar_residuals() {
        let mut cfg = quiet_config(600);
        cfg.segments = vec![
            SegmentSpec {
                heading_rad: 0.0,
                speed_mps: 30.0,
                lines: 600,
                lateral_offset_m: 0.0,
            },
            SegmentSpec {
                heading_rad: std::f64::consts::FRAC_PI_2,
                speed_mps: 30.0,
                lines: 600,
                lateral_offset_m: 0.0,
            },
        ];
        cfg.perturbation.roll_amp_rad = 3e-4;
        cfg.perturbation.motion_noise_rad = 2e-5;
        cfg.boresight = AxisAngle::from_components(0.008, -0.004, 0.006);
        cfg.ties_per_crossing = 150;
        let dataset = render_pushbroom(&scene(5), &cfg).unwrap();
        let ties = &dataset.true_ties[0].1;
        assert!(ties.len() >= 100, "only {} ties", ties.len());
        let (pairs, skipped) = build_epipolar_pairs(
            ties,
            &dataset.cube,
            &dataset.truth_trajectory,
            &dataset.camera,
        )
        .unwrap();
        assert_eq!(skipped, 0);
        for p in &pairs {
            let r = epipolar_residual(p, &cfg.boresight);
            assert!(r.abs() < 1e-9, "residual {r} at planted boresight");
        }
    }

    #[test]
    fn speed_ratio_controls_y_scale_between_passes() {
        let mut cfg = quiet_config(500);
        cfg.segments = vec![
            SegmentSpec {
                heading_rad: 0.0,
                speed_mps: 30.0,
                lines: 500,
                lateral_offset_m: 0.0,
            },
            SegmentSpec {
                heading_rad: 0.0,
                speed_mps: 60.0,
                lines: 250,
                lateral_offset_m: 0.0,
            },
        ];
        cfg.ties_per_crossing = 60;
        let dataset = render_pushbroom(&scene(6), &cfg).unwrap();
        // Along-track line spacing doubles, so per-pair dy doubles.
        let seg0_dy = dataset.true_shifts.estimates[100].dy;
        let seg1_dy = dataset.true_shifts.estimates[600].dy;
        assert_relative_eq!(seg1_dy / seg0_dy, 2.0, epsilon = 1e-6);
        // Ground-truth ties exist between the two parallel passes.
        assert!(!dataset.true_ties[0].1.is_empty());
    }

    #[test]
    fn manifest_round_trip() {
        let cfg = quiet_config(100);
        let dataset = render_pushbroom(&scene(7), &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        dataset.write_dir(dir.path()).unwrap();
        let manifest = DatasetManifest::read(&dir.path().join("manifest.txt")).unwrap();
        assert_relative_eq!(manifest.focal_px, cfg.focal_px);
        assert_eq!(manifest.segments.len(), 1);
        assert_eq!(manifest.segments[0].1, 100);
        let cube = HyperCube::read(&dir.path().join("cube")).unwrap();
        assert_eq!(cube.lines(), 100);
        let traj = Trajectory::read(&dir.path().join("trajectory.csv")).unwrap();
        assert!(traj.samples().len() >= 100);
    }
}
