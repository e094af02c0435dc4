//! Grayscale heatmaps of square matrices as binary PPM images.
//!
//! Each entry becomes a `CELL_PIXELS` x `CELL_PIXELS` block. The smallest
//! entry maps to white, the largest to black, linearly in between; a matrix
//! whose entries are all equal renders uniformly as `MID_GRAY`.

use std::path::Path;

use netflow_core::Matrix;

use crate::error::{CliError, CliResult};
use crate::FORMAT_HEADER;

pub const CELL_PIXELS: usize = 20;
pub const MID_GRAY: u8 = 128;

/// Gray level of every cell, row-major.
pub fn gray_levels(m: &Matrix) -> Vec<u8> {
    let data = m.as_slice();
    let (lo, hi) = data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let range = hi - lo;
    if !(range > 0.0) || !range.is_finite() {
        return vec![MID_GRAY; data.len()];
    }
    data.iter()
        .map(|&x| {
            let level = 255.0 - (255.0 * (x - lo) / range).round();
            level.clamp(0.0, 255.0) as u8
        })
        .collect()
}

/// Complete PPM file contents.
pub fn render_ppm(m: &Matrix) -> Vec<u8> {
    let (rows, cols) = (m.rows(), m.cols());
    let (width, height) = (cols * CELL_PIXELS, rows * CELL_PIXELS);
    let mut out = format!("P6\n{FORMAT_HEADER}\n{width} {height}\n255\n").into_bytes();
    out.reserve(width * height * 3);
    let levels = gray_levels(m);
    for r in 0..rows {
        let mut scanline = Vec::with_capacity(width * 3);
        for &g in &levels[r * cols..(r + 1) * cols] {
            scanline.extend(std::iter::repeat_n(g, CELL_PIXELS * 3));
        }
        for _ in 0..CELL_PIXELS {
            out.extend_from_slice(&scanline);
        }
    }
    out
}

pub fn write_heatmap(m: &Matrix, path: &Path) -> CliResult<()> {
    std::fs::write(path, render_ppm(m)).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pixels(bytes: &[u8]) -> &[u8] {
        let header = format!("P6\n{FORMAT_HEADER}\n");
        assert!(bytes.starts_with(header.as_bytes()));
        let mut newlines = 0;
        let start = bytes
            .iter()
            .position(|&b| {
                newlines += (b == b'\n') as usize;
                newlines == 4
            })
            .unwrap();
        &bytes[start + 1..]
    }

    #[test]
    fn single_zero_is_mid_gray() {
        let bytes = render_ppm(&Matrix::zeros(1, 1));
        let px = pixels(&bytes);
        assert_eq!(px.len(), CELL_PIXELS * CELL_PIXELS * 3);
        assert!(px.iter().all(|&b| b == MID_GRAY));
    }

    #[test]
    fn two_by_two_endpoints() {
        let m = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_eq!(gray_levels(&m), vec![255, 0, 0, 255]);
        let bytes = render_ppm(&m);
        let px = pixels(&bytes);
        let w = 2 * CELL_PIXELS * 3;
        assert_eq!(px.len(), w * 2 * CELL_PIXELS);
        // top-left block white, top-right black, bottom-left black
        assert_eq!(px[0], 255);
        assert_eq!(px[w - 1], 0);
        assert_eq!(px[w * CELL_PIXELS], 0);
        assert_eq!(px[px.len() - 1], 255);
    }

    #[test]
    fn linear_midpoint() {
        let m = Matrix::from_rows(&[[0.0, 2.0], [1.0, 0.5]]).unwrap();
        assert_eq!(gray_levels(&m), vec![255, 0, 127, 191]);
    }
}
