//! Camera-to-trajectory clock offset recovery.
//!
//! The estimated horizontal shift series is strongly correlated with the
//! platform roll rate. Cross-correlating the two recovers the residual
//! time offset between the camera clock and the trajectory clock without
//! hardware synchronization.

use crate::camera::CameraModel;
use crate::error::Error;
use crate::rotation::{exp_map, log_map};
use crate::shift::ShiftSeries;
use crate::trajectory::Trajectory;
use crate::Result;

/// Peak correlations below this raise the low-confidence flag.
pub const LOW_CONFIDENCE_THRESHOLD: f64 = 0.2;
/// Default search half-range in lines.
pub const DEFAULT_SEARCH_LINES: usize = 500;

/// Body-frame roll increment (radians) between each consecutive pair of
/// line times, extracted from interpolated attitudes. Roll is the rotation
/// about the body x (along-track) axis.
pub fn roll_rate_series(traj: &Trajectory, line_times: &[f64]) -> Result<Vec<f64>> {
    if line_times.len() < 2 {
        return Err(Error::InvalidInput("need at least 2 line times".into()));
    }
    let mut out = Vec::with_capacity(line_times.len() - 1);
    let mut prev = traj.interpolate(line_times[0])?;
    for &t in &line_times[1..] {
        let next = traj.interpolate(t)?;
        let rel = log_map(&(exp_map(&prev.attitude).transpose() * exp_map(&next.attitude)));
        out.push(rel.vector().x);
        prev = next;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
pub struct TimeOffsetEstimate {
    /// Offset in line counts (sub-line resolution): the amount by which the
    /// roll series must be advanced to align with the shift series. Add
    /// `offset_lines * line_period` to the trajectory clock offset.
    pub offset_lines: f64,
    /// Pearson correlation at the peak lag.
    pub peak_correlation: f64,
    pub low_confidence: bool,
}

/// Recovers the time offset by cross-correlating the shift series against
/// the roll increments projected to pixels. Both series are compared with
/// per-lag Pearson correlation (invariant to affine transforms of either
/// series); the integer argmax is refined with a 3-point parabolic fit.
pub fn estimate_time_offset(
    shifts: &ShiftSeries,
    roll_rate: &[f64],
    cam: &CameraModel,
    search: usize,
) -> Result<TimeOffsetEstimate> {
    let shift_series = shifts.dx_values();
    if shift_series.len() < 2 * search || roll_rate.len() < 2 * search {
        return Err(Error::InvalidInput(format!(
            "series of {} / {} samples too short for a +/-{search} line search",
            shift_series.len(),
            roll_rate.len()
        )));
    }
    let projected: Vec<f64> = roll_rate
        .iter()
        .map(|r| r * cam.pixels_per_radian(0.0))
        .collect();

    let search = search as isize;
    let mut correlations = Vec::with_capacity((2 * search + 1) as usize);
    for lag in -search..=search {
        correlations.push(lagged_pearson(&shift_series, &projected, lag));
    }
    let mut best = 0usize;
    for (i, c) in correlations.iter().enumerate() {
        if *c > correlations[best] {
            best = i;
        }
    }
    let mut offset = best as f64 - search as f64;
    if best > 0 && best + 1 < correlations.len() {
        let (l, c, r) = (
            correlations[best - 1],
            correlations[best],
            correlations[best + 1],
        );
        let denom = l - 2.0 * c + r;
        if denom.abs() > 1e-12 {
            offset += ((l - r) / (2.0 * denom)).clamp(-0.5, 0.5);
        }
    }
    let peak = correlations[best];
    Ok(TimeOffsetEstimate {
        offset_lines: offset,
        peak_correlation: peak,
        low_confidence: peak < LOW_CONFIDENCE_THRESHOLD,
    })
}

/// Pearson correlation of `(a[t], b[t + lag])` over the overlapping range.
fn lagged_pearson(a: &[f64], b: &[f64], lag: isize) -> f64 {
    let t_lo = 0.max(-lag) as usize;
    let t_hi = (a.len() as isize).min(b.len() as isize - lag).max(0) as usize;
    if t_hi <= t_lo + 2 {
        return 0.0;
    }
    let n = (t_hi - t_lo) as f64;
    let mut sa = 0.0;
    let mut sb = 0.0;
    for t in t_lo..t_hi {
        sa += a[t];
        sb += b[(t as isize + lag) as usize];
    }
    let (ma, mb) = (sa / n, sb / n);
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for t in t_lo..t_hi {
        let da = a[t] - ma;
        let db = b[(t as isize + lag) as usize] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if va <= 0.0 || vb <= 0.0 {
        return 0.0;
    }
    cov / (va * vb).sqrt()
}
