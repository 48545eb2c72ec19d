//! Cubic (Catmull-Rom) interpolation for 1-D lines and 2-D rasters.

use ndarray::Array2;

/// Catmull-Rom weights for a fractional position `t` in `[0, 1)` between
/// the middle two of four taps.
#[inline]
fn catmull_rom_weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        -0.5 * t3 + t2 - 0.5 * t,
        1.5 * t3 - 2.5 * t2 + 1.0,
        -1.5 * t3 + 2.0 * t2 + 0.5 * t,
        0.5 * t3 - 0.5 * t2,
    ]
}

/// Linearly extrapolated tap; keeps cubic interpolation exact for linear
/// signals next to the ends.
#[inline]
fn tap_1d(line: &[f64], k: isize) -> f64 {
    let n = line.len() as isize;
    if k < 0 {
        2.0 * line[0] - line[(-k).min(n - 1) as usize]
    } else if k >= n {
        2.0 * line[(n - 1) as usize] - line[(2 * n - 2 - k).max(0) as usize]
    } else {
        line[k as usize]
    }
}

/// Cubic sample of `line` at fractional position `x`, with linearly
/// extrapolated edge taps. Returns `None` when `x` lies outside
/// `[0, len-1]`.
pub fn sample_line(line: &[f64], x: f64) -> Option<f64> {
    let n = line.len();
    if n == 0 || x < 0.0 || x > (n - 1) as f64 {
        return None;
    }
    if n == 1 {
        return Some(line[0]);
    }
    let i = (x.floor() as isize).min(n as isize - 2).max(0);
    let t = x - i as f64;
    let w = catmull_rom_weights(t);
    Some(
        w[0] * tap_1d(line, i - 1)
            + w[1] * tap_1d(line, i)
            + w[2] * tap_1d(line, i + 1)
            + w[3] * tap_1d(line, i + 2),
    )
}

/// Resamples a line by `shift` pixels: `out[x] = in[x - shift]`, cubic.
/// Positions outside the input are `None` in the validity sense and filled
/// with NaN.
pub fn shift_line(line: &[f64], shift: f64) -> Vec<f64> {
    (0..line.len())
        .map(|x| sample_line(line, x as f64 - shift).unwrap_or(f64::NAN))
        .collect()
}

/// Bicubic sample of a raster at fractional `(row, col)`, with linearly
/// extrapolated edge taps. Returns `None` outside the raster bounds.
pub fn sample_raster(img: &Array2<f64>, row: f64, col: f64) -> Option<f64> {
    let (h, w) = img.dim();
    if h == 0 || w == 0 || row < 0.0 || col < 0.0 || row > (h - 1) as f64 || col > (w - 1) as f64 {
        return None;
    }
    if h == 1 {
        let line: Vec<f64> = img.row(0).to_vec();
        return sample_line(&line, col);
    }
    let i = (row.floor() as isize).min(h as isize - 2).max(0);
    let j = (col.floor() as isize).min(w as isize - 2).max(0);
    let wr = catmull_rom_weights(row - i as f64);
    let wc = catmull_rom_weights(col - j as f64);

    let tap_2d = |r: isize, c: isize| -> f64 {
        let reflect = |k: isize, n: isize| -> (usize, usize, bool) {
            // (index, mirror index, needs extrapolation)
            if k < 0 {
                (0, (-k).min(n - 1) as usize, true)
            } else if k >= n {
                ((n - 1) as usize, (2 * n - 2 - k).max(0) as usize, true)
            } else {
                (k as usize, k as usize, false)
            }
        };
        let (ri, rm, r_out) = reflect(r, h as isize);
        let (ci, cm, c_out) = reflect(c, w as isize);
        match (r_out, c_out) {
            (false, false) => img[(ri, ci)],
            (true, false) => 2.0 * img[(ri, ci)] - img[(rm, ci)],
            (false, true) => 2.0 * img[(ri, ci)] - img[(ri, cm)],
            (true, true) => {
                let edge = 2.0 * img[(ri, ci)] - img[(rm, ci)];
                let edge_m = 2.0 * img[(ri, cm)] - img[(rm, cm)];
                2.0 * edge - edge_m
            }
        }
    };

    let mut acc = 0.0;
    for (a, wa) in wr.iter().enumerate() {
        let r = i - 1 + a as isize;
        let mut row_acc = 0.0;
        for (b, wb) in wc.iter().enumerate() {
            row_acc += wb * tap_2d(r, j - 1 + b as isize);
        }
        acc += wa * row_acc;
    }
    Some(acc)
}
