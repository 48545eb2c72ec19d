//! Stationary covariance kernels and their calibration from image rows.

use crate::cube::HyperCube;
use crate::error::Error;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Matern32,
    ExponentiatedQuadratic,
}

impl KernelKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "matern_3_2" => Ok(Self::Matern32),
            "exponentiated_quadratic" => Ok(Self::ExponentiatedQuadratic),
            other => Err(Error::InvalidInput(format!("unknown kernel kind {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Matern32 => "matern_3_2",
            Self::ExponentiatedQuadratic => "exponentiated_quadratic",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct KernelParams {
    /// Marginal variance of the intensity, sigma^2.
    pub variance: f64,
    /// Correlation length in pixels.
    pub length_scale: f64,
    pub kind: KernelKind,
}

impl KernelParams {
    pub fn new(variance: f64, length_scale: f64, kind: KernelKind) -> Result<Self> {
        if !(variance > 0.0) || !(length_scale > 0.0) {
            return Err(Error::InvalidInput(format!(
                "kernel parameters must be positive: variance {variance}, length scale {length_scale}"
            )));
        }
        Ok(Self {
            variance,
            length_scale,
            kind,
        })
    }

    /// Kernel value as a function of radial distance rho (pixels).
    pub fn at_distance(&self, rho: f64) -> f64 {
        match self.kind {
            KernelKind::Matern32 => {
                let a = 3f64.sqrt() / self.length_scale;
                self.variance * (1.0 + a * rho) * (-a * rho).exp()
            }
            KernelKind::ExponentiatedQuadratic => {
                let q = rho / self.length_scale;
                self.variance * (-0.5 * q * q).exp()
            }
        }
    }
}

/// Covariance between two pixels separated by a horizontal distance `d`
/// when one line is displaced by `(dx, dy)` relative to the other:
/// the kernel evaluated at `rho = sqrt((dx + d)^2 + dy^2)`.
/// Same-row pairs use `dx = dy = 0`.
pub fn covariance_entry(params: &KernelParams, d: f64, dx: f64, dy: f64) -> f64 {
    let u = dx + d;
    params.at_distance((u * u + dy * dy).sqrt())
}

/// Partial derivatives of [`covariance_entry`] with respect to `dx` and
/// `dy`. Both kernels yield forms that stay smooth through `rho = 0`.
pub(crate) fn covariance_entry_grad(params: &KernelParams, d: f64, dx: f64, dy: f64) -> (f64, f64) {
    let u = dx + d;
    let rho = (u * u + dy * dy).sqrt();
    match params.kind {
        KernelKind::Matern32 => {
            // dk/drho = -sigma^2 a^2 rho e^(-a rho), so dk/du = -sigma^2 a^2 u e^(-a rho)
            let a = 3f64.sqrt() / params.length_scale;
            let common = -params.variance * a * a * (-a * rho).exp();
            (common * u, common * dy)
        }
        KernelKind::ExponentiatedQuadratic => {
            let l2 = params.length_scale * params.length_scale;
            let common = -params.variance / l2 * (-0.5 * rho * rho / l2).exp();
            (common * u, common * dy)
        }
    }
}

/// Maximum lag used when fitting the length scale to same-row covariances.
const CALIBRATION_MAX_LAG: usize = 8;
/// Lower bound for the fitted length scale, in pixels.
pub const LENGTH_SCALE_FLOOR: f64 = 0.5;
const LENGTH_SCALE_CEIL: f64 = 256.0;

/// Calibrates kernel parameters from same-row pixel covariances of a cube.
///
/// The pseudo-panchromatic image is standardized globally, so the fitted
/// variance is 1 by construction; the length scale is chosen by a 1-D
/// least-squares match between the empirical lag-1..8 autocovariance and
/// the kernel evaluated with zero shift.
pub fn calibrate_kernel(cube: &HyperCube, kind: KernelKind) -> Result<KernelParams> {
    if cube.lines() < 100 {
        return Err(Error::InvalidInput(format!(
            "kernel calibration needs at least 100 lines, got {}",
            cube.lines()
        )));
    }
    let rows: Vec<Vec<f64>> = (0..cube.lines()).map(|l| cube.pan_line(l)).collect();
    calibrate_from_rows(&rows, kind)
}

/// Calibration core shared with benchmarks that work on bare line sets.
pub fn calibrate_from_rows(rows: &[Vec<f64>], kind: KernelKind) -> Result<KernelParams> {
    let n_total: usize = rows.iter().map(|r| r.len()).sum();
    if n_total == 0 {
        return Err(Error::InvalidInput("no pixels to calibrate from".into()));
    }
    let mean = rows.iter().flatten().sum::<f64>() / n_total as f64;
    let var = rows
        .iter()
        .flatten()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / n_total as f64;
    if var < 1e-12 {
        return Err(Error::DegenerateInput(
            "constant image: zero intensity variance".into(),
        ));
    }
    let std = var.sqrt();

    // Empirical standardized autocovariance at lags 1..=8.
    let mut gamma = [0.0; CALIBRATION_MAX_LAG];
    for (lag_idx, g) in gamma.iter_mut().enumerate() {
        let d = lag_idx + 1;
        let mut acc = 0.0;
        let mut count = 0usize;
        for row in rows {
            if row.len() <= d {
                continue;
            }
            for c in 0..row.len() - d {
                let a = (row[c] - mean) / std;
                let b = (row[c + d] - mean) / std;
                acc += a * b;
            }
            count += row.len() - d;
        }
        if count == 0 {
            return Err(Error::InvalidInput("rows shorter than calibration lag".into()));
        }
        *g = acc / count as f64;
    }

    let objective = |l: f64| -> f64 {
        let params = KernelParams {
            variance: 1.0,
            length_scale: l,
            kind,
        };
        gamma
            .iter()
            .enumerate()
            .map(|(i, g)| {
                let k = covariance_entry(&params, (i + 1) as f64, 0.0, 0.0);
                (k - g) * (k - g)
            })
            .sum()
    };

    // Coarse log-spaced scan, then golden-section refinement.
    let n_grid = 120;
    let log_lo = LENGTH_SCALE_FLOOR.ln();
    let log_hi = LENGTH_SCALE_CEIL.ln();
    let mut best_i = 0;
    let mut best_v = f64::INFINITY;
    let grid: Vec<f64> = (0..n_grid)
        .map(|i| (log_lo + (log_hi - log_lo) * i as f64 / (n_grid - 1) as f64).exp())
        .collect();
    for (i, &l) in grid.iter().enumerate() {
        let v = objective(l);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let mut lo = grid[best_i.saturating_sub(1)];
    let mut hi = grid[(best_i + 1).min(n_grid - 1)];
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if objective(a) < objective(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let length_scale = 0.5 * (lo + hi);

    KernelParams::new(1.0, length_scale.max(LENGTH_SCALE_FLOOR), kind)
}
