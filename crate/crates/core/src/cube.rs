//! Line-sequential image raster with per-line timestamps, plus file I/O.
//!
//! On disk a cube is three files sharing a stem: `<stem>.hdr` (plain-text
//! header), `<stem>.bil` (raw 32-bit little-endian floats, band-interleaved
//! by line) and `<stem>.times` (one timestamp in seconds per line).

use crate::error::Error;
use crate::Result;
use ndarray::Array2;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

#[derive(Debug, Clone)]
pub struct HyperCube {
    lines: usize,
    samples_per_line: usize,
    bands: usize,
    /// Band-interleaved by line: `data[line][band][sample]`.
    data: Vec<f32>,
    line_times: Vec<f64>,
}

impl HyperCube {
    pub fn new(
        lines: usize,
        samples_per_line: usize,
        bands: usize,
        data: Vec<f32>,
        line_times: Vec<f64>,
    ) -> Result<Self> {
        if data.len() != lines * samples_per_line * bands {
            return Err(Error::InvalidInput(format!(
                "data length {} does not match {} lines x {} samples x {} bands",
                data.len(),
                lines,
                samples_per_line,
                bands
            )));
        }
        if line_times.len() != lines {
            return Err(Error::InvalidInput(format!(
                "{} line times for {} lines",
                line_times.len(),
                lines
            )));
        }
        if line_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "line times must be strictly increasing".into(),
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite intensity value".into()));
        }
        Ok(Self {
            lines,
            samples_per_line,
            bands,
            data,
            line_times,
        })
    }

    /// Like [`HyperCube::new`] but permits NaN sentinels for invalid
    /// pixels, as produced by rectification. Infinities stay rejected.
    pub fn new_with_gaps(
        lines: usize,
        samples_per_line: usize,
        bands: usize,
        data: Vec<f32>,
        line_times: Vec<f64>,
    ) -> Result<Self> {
        if data.len() != lines * samples_per_line * bands {
            return Err(Error::InvalidInput(format!(
                "data length {} does not match {} lines x {} samples x {} bands",
                data.len(),
                lines,
                samples_per_line,
                bands
            )));
        }
        if line_times.len() != lines {
            return Err(Error::InvalidInput(format!(
                "{} line times for {} lines",
                line_times.len(),
                lines
            )));
        }
        if line_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "line times must be strictly increasing".into(),
            ));
        }
        if data.iter().any(|v| v.is_infinite()) {
            return Err(Error::InvalidInput("infinite intensity value".into()));
        }
        Ok(Self {
            lines,
            samples_per_line,
            bands,
            data,
            line_times,
        })
    }

    pub fn lines(&self) -> usize {
        self.lines
    }

    pub fn samples_per_line(&self) -> usize {
        self.samples_per_line
    }

    pub fn bands(&self) -> usize {
        self.bands
    }

    pub fn line_times(&self) -> &[f64] {
        &self.line_times
    }

    pub fn value(&self, line: usize, sample: usize, band: usize) -> f32 {
        self.data[(line * self.bands + band) * self.samples_per_line + sample]
    }

    /// One band of one line as a contiguous slice.
    pub fn line_band(&self, line: usize, band: usize) -> &[f32] {
        let start = (line * self.bands + band) * self.samples_per_line;
        &self.data[start..start + self.samples_per_line]
    }

    /// Pseudo-panchromatic line: mean over bands, in f64.
    pub fn pan_line(&self, line: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.samples_per_line];
        for band in 0..self.bands {
            for (o, v) in out.iter_mut().zip(self.line_band(line, band)) {
                *o += *v as f64;
            }
        }
        let scale = 1.0 / self.bands as f64;
        out.iter_mut().for_each(|v| *v *= scale);
        out
    }

    /// Pseudo-panchromatic image, `lines x samples`.
    pub fn pan_image(&self) -> Array2<f64> {
        let mut img = Array2::zeros((self.lines, self.samples_per_line));
        for line in 0..self.lines {
            let row = self.pan_line(line);
            for (s, v) in row.into_iter().enumerate() {
                img[(line, s)] = v;
            }
        }
        img
    }

    /// Linearly interpolated acquisition time at a fractional line index.
    pub fn time_at_line(&self, line: f64) -> f64 {
        let n = self.lines;
        if n == 1 {
            return self.line_times[0];
        }
        let clamped = line.clamp(0.0, (n - 1) as f64);
        let i = (clamped.floor() as usize).min(n - 2);
        let t = clamped - i as f64;
        self.line_times[i] * (1.0 - t) + self.line_times[i + 1] * t
    }

    /// Writes `<stem>.hdr`, `<stem>.bil` and `<stem>.times`.
    pub fn write(&self, stem: &Path) -> Result<()> {
        let hdr = format!(
            "lines = {}\nsamples = {}\nbands = {}\ninterleave = bil\ndata type = float32\nbyte order = little-endian\n",
            self.lines, self.samples_per_line, self.bands
        );
        fs::write(stem.with_extension("hdr"), hdr)?;

        let mut bil = BufWriter::new(fs::File::create(stem.with_extension("bil"))?);
        for v in &self.data {
            bil.write_all(&v.to_le_bytes())?;
        }
        bil.flush()?;

        let mut times = String::new();
        for t in &self.line_times {
            times.push_str(&format!("{t}\n"));
        }
        fs::write(stem.with_extension("times"), times)?;
        Ok(())
    }

    /// Reads a cube written by [`HyperCube::write`].
    pub fn read(stem: &Path) -> Result<Self> {
        let hdr_path = stem.with_extension("hdr");
        let hdr = fs::read_to_string(&hdr_path)?;
        let mut lines = None;
        let mut samples = None;
        let mut bands = None;
        for row in hdr.lines() {
            let Some((key, value)) = row.split_once('=') else {
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "lines" => lines = value.parse::<usize>().ok(),
                "samples" => samples = value.parse::<usize>().ok(),
                "bands" => bands = value.parse::<usize>().ok(),
                "interleave" if value != "bil" => {
                    return Err(Error::Parse {
                        path: hdr_path.display().to_string(),
                        message: format!("unsupported interleave {value}"),
                    })
                }
                "data type" if value != "float32" => {
                    return Err(Error::Parse {
                        path: hdr_path.display().to_string(),
                        message: format!("unsupported data type {value}"),
                    })
                }
                "byte order" if value != "little-endian" => {
                    return Err(Error::Parse {
                        path: hdr_path.display().to_string(),
                        message: format!("unsupported byte order {value}"),
                    })
                }
                _ => {}
            }
        }
        let (lines, samples, bands) = match (lines, samples, bands) {
            (Some(l), Some(s), Some(b)) => (l, s, b),
            _ => {
                return Err(Error::Parse {
                    path: hdr_path.display().to_string(),
                    message: "missing lines/samples/bands".into(),
                })
            }
        };

        let raw = fs::read(stem.with_extension("bil"))?;
        let expected = lines * samples * bands * 4;
        if raw.len() != expected {
            return Err(Error::Parse {
                path: stem.with_extension("bil").display().to_string(),
                message: format!("payload is {} bytes, expected {expected}", raw.len()),
            });
        }
        let data: Vec<f32> = raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();

        let times_path = stem.with_extension("times");
        let times_text = fs::read_to_string(&times_path)?;
        let line_times = times_text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.trim().parse::<f64>().map_err(|e| Error::Parse {
                    path: times_path.display().to_string(),
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;

        // Rectified cubes legitimately carry NaN sentinels.
        Self::new_with_gaps(lines, samples, bands, data, line_times)
    }
}

/// Writes a per-pixel validity mask (`lines x samples`, 1 = valid) as
/// `<stem>.hdr` + `<stem>.u8`.
pub fn write_mask(mask: &Array2<u8>, stem: &Path) -> Result<()> {
    let (lines, samples) = mask.dim();
    let hdr = format!(
        "lines = {lines}\nsamples = {samples}\nbands = 1\ninterleave = bil\ndata type = uint8\nbyte order = little-endian\n",
    );
    fs::write(stem.with_extension("hdr"), hdr)?;
    let mut out = BufWriter::new(fs::File::create(stem.with_extension("u8"))?);
    for row in mask.rows() {
        out.write_all(row.as_slice().expect("contiguous mask row"))?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a mask written by [`write_mask`].
pub fn read_mask(stem: &Path, lines: usize, samples: usize) -> Result<Array2<u8>> {
    let raw = fs::read(stem.with_extension("u8"))?;
    if raw.len() != lines * samples {
        return Err(Error::Parse {
            path: stem.with_extension("u8").display().to_string(),
            message: format!("mask is {} bytes, expected {}", raw.len(), lines * samples),
        });
    }
    Ok(Array2::from_shape_vec((lines, samples), raw).expect("shape checked"))
}
