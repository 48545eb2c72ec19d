//! Tie-point outlier rejection with a homography model and RANSAC.
//!
//! Two rectified chunks of push-broom data are related, approximately, by
//! a single projective transform. The approximation is deliberately loose
//! (non-planar scenes), so the default inlier threshold is large and the
//! fitted homography itself is discarded after flagging.

use crate::error::Error;
use crate::features::TiePointSet;
use crate::rotation::Mat3;
use crate::Result;
use nalgebra::{DMatrix, Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Scale-normalized full-rank homography, `pt1 ~ H pt2`.
#[derive(Debug, Clone, Copy)]
pub struct Homography(Mat3);

impl Homography {
    pub fn from_matrix(m: Mat3) -> Result<Self> {
        if m.determinant().abs() < 1e-12 {
            return Err(Error::DegenerateConfiguration(
                "homography matrix is rank deficient".into(),
            ));
        }
        let scale = m[(2, 2)];
        let normalized = if scale.abs() > 1e-12 { m / scale } else { m };
        Ok(Self(normalized))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self.0.try_inverse().ok_or_else(|| {
            Error::DegenerateConfiguration("homography not invertible".into())
        })?;
        Self::from_matrix(inv)
    }

    /// Maps a point from chunk-2 coordinates to chunk-1 coordinates.
    pub fn map(&self, pt: (f64, f64)) -> (f64, f64) {
        let v = self.0 * Vector3::new(pt.0, pt.1, 1.0);
        (v.x / v.z, v.y / v.z)
    }
}

/// Hartley normalization: translate the centroid to the origin and scale
/// so the mean distance from it is sqrt(2).
fn normalize_points(points: &[(f64, f64)]) -> Result<(Vec<(f64, f64)>, Mat3)> {
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let cy = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mean_dist = points
        .iter()
        .map(|p| ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt())
        .sum::<f64>()
        / n;
    if mean_dist < 1e-12 {
        return Err(Error::DegenerateConfiguration(
            "all points coincide".into(),
        ));
    }
    let s = 2f64.sqrt() / mean_dist;
    let t = Matrix3::new(s, 0.0, -s * cx, 0.0, s, -s * cy, 0.0, 0.0, 1.0);
    let normalized = points
        .iter()
        .map(|p| (s * (p.0 - cx), s * (p.1 - cy)))
        .collect();
    Ok((normalized, t))
}

fn any_three_collinear(points: &[(f64, f64)]) -> bool {
    let n = points.len();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let (a, b, c) = (points[i], points[j], points[k]);
                let area = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
                let scale = ((b.0 - a.0).hypot(b.1 - a.1) * (c.0 - a.0).hypot(c.1 - a.1)).max(1e-12);
                if (area / scale).abs() < 1e-9 {
                    return true;
                }
            }
        }
    }
    false
}

/// Direct linear transform estimate of `H` with `pt1 ~ H pt2` from at
/// least 4 correspondences `(pt1, pt2)`. Points are Hartley-normalized,
/// the stacked `2n x 9` system is solved by smallest-singular-vector
/// extraction, and the normalization undone.
pub fn dlt_homography(pairs: &[((f64, f64), (f64, f64))]) -> Result<Homography> {
    let n = pairs.len();
    if n < 4 {
        return Err(Error::InvalidInput(format!(
            "homography needs at least 4 correspondences, got {n}"
        )));
    }
    let pts1: Vec<(f64, f64)> = pairs.iter().map(|p| p.0).collect();
    let pts2: Vec<(f64, f64)> = pairs.iter().map(|p| p.1).collect();
    if n == 4 && any_three_collinear(&pts2) {
        return Err(Error::DegenerateConfiguration(
            "three of the four source points are collinear".into(),
        ));
    }
    let (n1, t1) = normalize_points(&pts1)?;
    let (n2, t2) = normalize_points(&pts2)?;

    // Rows express pt1 x (H pt2) = 0 in the normalized frames.
    let rows = (2 * n).max(9);
    let mut a = DMatrix::<f64>::zeros(rows, 9);
    for (i, (p1, p2)) in n1.iter().zip(&n2).enumerate() {
        let (u, v) = *p1;
        let (x, y) = *p2;
        let r0 = 2 * i;
        let r1 = 2 * i + 1;
        a[(r0, 0)] = -x;
        a[(r0, 1)] = -y;
        a[(r0, 2)] = -1.0;
        a[(r0, 6)] = u * x;
        a[(r0, 7)] = u * y;
        a[(r0, 8)] = u;
        a[(r1, 3)] = -x;
        a[(r1, 4)] = -y;
        a[(r1, 5)] = -1.0;
        a[(r1, 6)] = v * x;
        a[(r1, 7)] = v * y;
        a[(r1, 8)] = v;
    }

    let svd = a.svd(true, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numerical("svd failed on homography system".into()))?;
    // Singular values are sorted descending; rank < 8 means the system does
    // not pin down the homography direction.
    let sv = &svd.singular_values;
    if sv[7] < 1e-10 * sv[0].max(1e-300) {
        return Err(Error::DegenerateConfiguration(
            "correspondence configuration has rank < 8".into(),
        ));
    }
    let h_vec = v_t.row(v_t.nrows() - 1);
    let mut h = Mat3::zeros();
    for r in 0..3 {
        for c in 0..3 {
            h[(r, c)] = h_vec[3 * r + c];
        }
    }
    let t1_inv = t1.try_inverse().expect("normalization is invertible");
    Homography::from_matrix(t1_inv * h * t2)
}

#[derive(Debug, Clone, Copy)]
pub struct RansacParams {
    /// Inlier threshold on the symmetric transfer distance, pixels.
    pub threshold_px: f64,
    pub confidence: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for RansacParams {
    fn default() -> Self {
        Self {
            threshold_px: 60.0,
            confidence: 0.999,
            max_iters: 2000,
            seed: 0,
        }
    }
}

/// Symmetric transfer distance: the larger of the forward and backward
/// reprojection distances, so the decision is identical when the chunk
/// roles are exchanged.
fn symmetric_distance(h: &Homography, h_inv: &Homography, pt1: (f64, f64), pt2: (f64, f64)) -> f64 {
    let fwd = h.map(pt2);
    let bwd = h_inv.map(pt1);
    let d_fwd = (fwd.0 - pt1.0).hypot(fwd.1 - pt1.1);
    let d_bwd = (bwd.0 - pt2.0).hypot(bwd.1 - pt2.1);
    d_fwd.max(d_bwd)
}

/// Seeded 4-point RANSAC over tie points. Returns the input set with
/// inlier flags from the best minimal model; the refit homography is
/// computed for diagnostics but intentionally not used for re-flagging.
pub fn ransac_filter(ties: &TiePointSet, params: &RansacParams) -> Result<(TiePointSet, Homography)> {
    let n = ties.matches.len();
    if n < 4 {
        return Err(Error::InsufficientMatches { got: n, need: 4 });
    }
    let pairs: Vec<((f64, f64), (f64, f64))> =
        ties.matches.iter().map(|m| (m.pt1, m.pt2)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut best_flags: Option<Vec<bool>> = None;
    let mut best_count = 0usize;
    let mut required_iters = params.max_iters;
    let mut iter = 0usize;
    while iter < required_iters.min(params.max_iters) {
        iter += 1;
        let sample = rand::seq::index::sample(&mut rng, n, 4).into_vec();
        let minimal: Vec<_> = sample.iter().map(|&i| pairs[i]).collect();
        let Ok(h) = dlt_homography(&minimal) else {
            continue;
        };
        let Ok(h_inv) = h.inverse() else {
            continue;
        };
        let flags: Vec<bool> = pairs
            .iter()
            .map(|(p1, p2)| symmetric_distance(&h, &h_inv, *p1, *p2) <= params.threshold_px)
            .collect();
        let count = flags.iter().filter(|f| **f).count();
        if count > best_count {
            best_count = count;
            best_flags = Some(flags);
            // Adaptive iteration bound from the observed inlier ratio.
            let w = count as f64 / n as f64;
            let p_all = w.powi(4);
            if p_all > 1e-12 && p_all < 1.0 {
                let needed = (1.0 - params.confidence).ln() / (1.0 - p_all).ln();
                required_iters = needed.ceil().max(1.0) as usize;
            } else if p_all >= 1.0 {
                required_iters = iter;
            }
        }
    }

    let Some(flags) = best_flags else {
        return Err(Error::FilterFailure(
            "no non-degenerate minimal sample found".into(),
        ));
    };
    if best_count < 4 {
        return Err(Error::FilterFailure(format!(
            "best model has only {best_count} inliers"
        )));
    }

    let inlier_pairs: Vec<_> = pairs
        .iter()
        .zip(&flags)
        .filter(|(_, f)| **f)
        .map(|(p, _)| *p)
        .collect();
    let refit = dlt_homography(&inlier_pairs)?;

    let mut out = ties.clone();
    out.inlier_flags = Some(flags);
    Ok((out, refit))
}
