//! Keypoint detection and matching across image chunks with invariance to
//! along-track (y) scaling.

mod detect;
mod pyramid;

pub use detect::{
    detect_and_describe, detect_and_describe_with, Keypoint, DEFAULT_RESPONSE_THRESHOLD,
};
pub use pyramid::{build_anisotropic_pyramid, resample_anisotropic, PyramidLevel};

use crate::error::Error;
use crate::Result;
use std::fs;
use std::path::Path;

/// Default Lowe ratio threshold for descriptor matching.
pub const DEFAULT_RATIO_THRESHOLD: f64 = 0.8;

/// One matched correspondence between two chunks, base-image coordinates.
#[derive(Debug, Clone)]
pub struct TiePoint {
    pub pt1: (f64, f64),
    pub pt2: (f64, f64),
    /// Descriptor Hamming distance of the match.
    pub distance: f64,
}

/// Matched correspondences between two chunks, with optional inlier flags
/// produced by RANSAC filtering. Chunk ids are the absolute start lines of
/// the chunks within their cube, so y coordinates are chunk-relative.
#[derive(Debug, Clone, Default)]
pub struct TiePointSet {
    pub chunk1_start_line: usize,
    pub chunk2_start_line: usize,
    pub matches: Vec<TiePoint>,
    pub inlier_flags: Option<Vec<bool>>,
}

impl TiePointSet {
    pub fn len(&self) -> usize {
        self.matches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matches.is_empty()
    }

    /// Matches flagged as inliers; all matches when no flags are present.
    pub fn inliers(&self) -> Vec<&TiePoint> {
        match &self.inlier_flags {
            Some(flags) => self
                .matches
                .iter()
                .zip(flags)
                .filter(|(_, f)| **f)
                .map(|(m, _)| m)
                .collect(),
            None => self.matches.iter().collect(),
        }
    }

    pub fn inlier_count(&self) -> usize {
        match &self.inlier_flags {
            Some(flags) => flags.iter().filter(|f| **f).count(),
            None => self.matches.len(),
        }
    }

    /// Writes `x1,y1,x2,y2,distance,inlier_flag` rows; the flag is -1 when
    /// filtering has not run.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        out.push_str(&format!("# chunk1_start_line {}\n", self.chunk1_start_line));
        out.push_str(&format!("# chunk2_start_line {}\n", self.chunk2_start_line));
        out.push_str("x1,y1,x2,y2,distance,inlier_flag\n");
        for (i, m) in self.matches.iter().enumerate() {
            let flag = match &self.inlier_flags {
                Some(flags) => flags[i] as i8,
                None => -1,
            };
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                m.pt1.0, m.pt1.1, m.pt2.0, m.pt2.1, m.distance, flag
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
        let mut set = TiePointSet::default();
        let mut flags = Vec::new();
        let mut any_flagged = false;
        let mut saw_header = false;
        for row in text.lines() {
            let row = row.trim();
            if row.is_empty() {
                continue;
            }
            if let Some(rest) = row.strip_prefix('#') {
                let mut parts = rest.split_whitespace();
                match parts.next() {
                    Some("chunk1_start_line") => {
                        set.chunk1_start_line =
                            parts.next().and_then(|v| v.parse().ok()).unwrap_or(0)
                    }
                    Some("chunk2_start_line") => {
                        set.chunk2_start_line =
                            parts.next().and_then(|v| v.parse().ok()).unwrap_or(0)
                    }
                    _ => {}
                }
                continue;
            }
            if !saw_header {
                saw_header = true;
                continue;
            }
            let f: Vec<&str> = row.split(',').map(str::trim).collect();
            if f.len() != 6 {
                return Err(parse_err(format!("expected 6 fields in {row:?}")));
            }
            let num = |s: &str| -> Result<f64> {
                s.parse().map_err(|e| parse_err(format!("{s:?}: {e}")))
            };
            set.matches.push(TiePoint {
                pt1: (num(f[0])?, num(f[1])?),
                pt2: (num(f[2])?, num(f[3])?),
                distance: num(f[4])?,
            });
            let flag: i8 = f[5].parse().map_err(|e| parse_err(format!("flag: {e}")))?;
            if flag >= 0 {
                any_flagged = true;
            }
            flags.push(flag == 1);
        }
        if any_flagged {
            set.inlier_flags = Some(flags);
        }
        Ok(set)
    }
}

/// Mutual-nearest-neighbor matching in Hamming distance with a Lowe-style
/// ratio test and both-direction cross checking.
pub fn match_keypoints(
    set_a: &[Keypoint],
    set_b: &[Keypoint],
    ratio_threshold: f64,
) -> TiePointSet {
    let mut matches = Vec::new();
    if set_a.is_empty() || set_b.is_empty() {
        return TiePointSet {
            matches,
            ..Default::default()
        };
    }

    // Nearest neighbor of every b in a, for the cross check.
    let nearest_in_a: Vec<usize> = set_b
        .iter()
        .map(|kb| {
            let mut best = 0usize;
            let mut best_d = u32::MAX;
            for (i, ka) in set_a.iter().enumerate() {
                let d = kb.hamming(ka);
                if d < best_d {
                    best_d = d;
                    best = i;
                }
            }
            best
        })
        .collect();

    for (i, ka) in set_a.iter().enumerate() {
        let mut best = usize::MAX;
        let mut d1 = u32::MAX;
        let mut d2 = u32::MAX;
        for (j, kb) in set_b.iter().enumerate() {
            let d = ka.hamming(kb);
            if d < d1 {
                d2 = d1;
                d1 = d;
                best = j;
            } else if d < d2 {
                d2 = d;
            }
        }
        if best == usize::MAX {
            continue;
        }
        if (d1 as f64) >= ratio_threshold * (d2 as f64) {
            continue;
        }
        if nearest_in_a[best] != i {
            continue;
        }
        matches.push(TiePoint {
            pt1: (ka.x, ka.y),
            pt2: (set_b[best].x, set_b[best].y),
            distance: d1 as f64,
        });
    }

    TiePointSet {
        matches,
        ..Default::default()
    }
}
