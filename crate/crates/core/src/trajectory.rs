//! Platform pose time series and interpolation.
//!
//! Trajectory files are comma-delimited text with a required header row
//! `time_s,pos_x_m,pos_y_m,pos_z_m,att_rx,att_ry,att_rz` (attitude as
//! axis-angle, body to world). An optional comment line
//! `# clock_offset_s <v>` before the header stores the camera-to-trajectory
//! clock offset: trajectory time = camera time + clock_offset.

use crate::error::Error;
use crate::rotation::{exp_map, log_map, AxisAngle, Vec3};
use crate::Result;
use std::fs;
use std::path::Path;

#[derive(Debug, Clone, Copy)]
pub struct PoseSample {
    /// Seconds on the trajectory clock.
    pub time: f64,
    /// Meters, world frame.
    pub position: Vec3,
    /// Body-to-world rotation.
    pub attitude: AxisAngle,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    samples: Vec<PoseSample>,
    /// Seconds added to camera-clock times to obtain trajectory-clock times.
    pub clock_offset: f64,
}

impl Trajectory {
    pub fn new(samples: Vec<PoseSample>, clock_offset: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidInput("empty trajectory".into()));
        }
        if samples.windows(2).any(|w| w[1].time <= w[0].time) {
            return Err(Error::InvalidInput(
                "trajectory sample times must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            samples,
            clock_offset,
        })
    }

    pub fn samples(&self) -> &[PoseSample] {
        &self.samples
    }

    /// Time span on the trajectory clock.
    pub fn span(&self) -> (f64, f64) {
        (
            self.samples[0].time,
            self.samples[self.samples.len() - 1].time,
        )
    }

    /// Pose at a camera-clock time: linear interpolation of position,
    /// geodesic (slerp) interpolation of attitude between bracketing
    /// samples. Out-of-span times are an error.
    pub fn interpolate(&self, t_camera: f64) -> Result<PoseSample> {
        let t = t_camera + self.clock_offset;
        let (start, end) = self.span();
        if t < start || t > end {
            return Err(Error::TimeOutOfRange { time: t, start, end });
        }
        // Index of the first sample with time > t; bracketing segment is [idx-1, idx].
        let idx = self.samples.partition_point(|s| s.time <= t);
        if idx == 0 {
            return Ok(self.samples[0]);
        }
        if idx == self.samples.len() {
            return Ok(self.samples[idx - 1]);
        }
        let a = &self.samples[idx - 1];
        let b = &self.samples[idx];
        let u = (t - a.time) / (b.time - a.time);
        let position = a.position * (1.0 - u) + b.position * u;

        let ra = exp_map(&a.attitude);
        let rb = exp_map(&b.attitude);
        let rel = log_map(&(ra.transpose() * rb));
        let step = AxisAngle::new(rel.vector() * u);
        let attitude = log_map(&(ra * exp_map(&step)));

        Ok(PoseSample {
            time: t,
            position,
            attitude,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        out.push_str(&format!("# clock_offset_s {}\n", self.clock_offset));
        out.push_str("time_s,pos_x_m,pos_y_m,pos_z_m,att_rx,att_ry,att_rz\n");
        for s in &self.samples {
            let r = s.attitude.vector();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                s.time, s.position.x, s.position.y, s.position.z, r.x, r.y, r.z
            ));
        }
        fs::write(path, out)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let parse_err = |message: String| Error::Parse {
            path: path.display().to_string(),
            message,
        };
        let mut clock_offset = 0.0;
        let mut samples = Vec::new();
        let mut saw_header = false;
        for row in text.lines() {
            let row = row.trim();
            if row.is_empty() {
                continue;
            }
            if let Some(rest) = row.strip_prefix('#') {
                let mut parts = rest.split_whitespace();
                if parts.next() == Some("clock_offset_s") {
                    let v = parts
                        .next()
                        .ok_or_else(|| parse_err("missing clock_offset_s value".into()))?;
                    clock_offset = v
                        .parse()
                        .map_err(|e| parse_err(format!("clock_offset_s: {e}")))?;
                }
                continue;
            }
            if !saw_header {
                if !row.starts_with("time_s") {
                    return Err(parse_err(format!("expected header row, got {row:?}")));
                }
                saw_header = true;
                continue;
            }
            let fields: Vec<&str> = row.split(',').map(str::trim).collect();
            if fields.len() != 7 {
                return Err(parse_err(format!(
                    "expected 7 fields, got {} in {row:?}",
                    fields.len()
                )));
            }
            let mut values = [0.0; 7];
            for (v, f) in values.iter_mut().zip(&fields) {
                *v = f.parse().map_err(|e| parse_err(format!("{f:?}: {e}")))?;
            }
            samples.push(PoseSample {
                time: values[0],
                position: Vec3::new(values[1], values[2], values[3]),
                attitude: AxisAngle::from_components(values[4], values[5], values[6]),
            });
        }
        if !saw_header {
            return Err(parse_err("missing header row".into()));
        }
        Self::new(samples, clock_offset)
    }
}
