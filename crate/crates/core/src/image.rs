//! Plain-text PGM/PPM images, scribble masks, and the color-affinity pixel
//! graph for segmentation.

use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use rayon::prelude::*;
use std::io::{BufRead, Write};
use std::path::Path;

/// An RGB raster with pixel values in [0,1]^3 and an optional scribble mask
/// (-1 / +1 per labeled pixel, 0 where unlabeled).
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    width: usize,
    height: usize,
    rgb: Vec<[f64; 3]>,
    mask: Option<Vec<i8>>,
}

impl ImageGrid {
    pub fn new(width: usize, height: usize, rgb: Vec<[f64; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::EmptyInput("image"));
        }
        if rgb.len() != width * height {
            return Err(Error::SizeMismatch {
                context: "image pixels",
                expected: width * height,
                got: rgb.len(),
            });
        }
        for px in &rgb {
            for &c in px {
                if !(c.is_finite() && (0.0..=1.0).contains(&c)) {
                    return Err(Error::invalid(format!("pixel channel {c} outside [0,1]")));
                }
            }
        }
        Ok(ImageGrid { width, height, rgb, mask: None })
    }

    pub fn with_mask(mut self, mask: Vec<i8>) -> Result<Self> {
        if mask.len() != self.width * self.height {
            return Err(Error::SizeMismatch {
                context: "scribble mask",
                expected: self.width * self.height,
                got: mask.len(),
            });
        }
        if mask.iter().any(|&m| !(-1..=1).contains(&m)) {
            return Err(Error::invalid("mask entries must be -1, 0, or +1"));
        }
        self.mask = Some(mask);
        Ok(self)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.rgb.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rgb.is_empty()
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.rgb
    }

    pub fn mask(&self) -> Option<&[i8]> {
        self.mask.as_deref()
    }

    /// Pixel-center position in [0,1]^2, row-major index.
    pub fn position(&self, idx: usize) -> [f64; 2] {
        let r = idx / self.width;
        let c = idx % self.width;
        [(c as f64 + 0.5) / self.width as f64, (r as f64 + 0.5) / self.height as f64]
    }

    /// (index, +-1) pairs from the scribble mask.
    pub fn labeled_pixels(&self) -> Vec<(usize, f64)> {
        match &self.mask {
            Some(m) => m
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0)
                .map(|(i, &v)| (i, v as f64))
                .collect(),
            None => Vec::new(),
        }
    }

    /// Parses plain-text P2 (grayscale) or P3 (RGB), 8-bit. Gray values are
    /// replicated across the three channels.
    pub fn read_pnm<R: BufRead>(reader: R) -> Result<Self> {
        let (magic, w, h, maxval, data) = parse_pnm_tokens(reader)?;
        let m = maxval as f64;
        let rgb: Vec<[f64; 3]> = match magic {
            2 => data.iter().map(|&v| [v as f64 / m; 3]).collect(),
            3 => data
                .chunks_exact(3)
                .map(|c| [c[0] as f64 / m, c[1] as f64 / m, c[2] as f64 / m])
                .collect(),
            _ => unreachable!(),
        };
        ImageGrid::new(w, h, rgb)
    }

    pub fn read_pnm_path(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_pnm(std::io::BufReader::new(f))
    }

    /// P3 at maxval 255. Round-trips exactly for images that came from 8-bit
    /// data.
    pub fn write_ppm<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "P3")?;
        writeln!(w, "{} {}", self.width, self.height)?;
        writeln!(w, "255")?;
        for px in &self.rgb {
            let q = |c: f64| (c * 255.0).round() as u8;
            writeln!(w, "{} {} {}", q(px[0]), q(px[1]), q(px[2]))?;
        }
        Ok(())
    }
}

/// Shared plain-PNM tokenizer: magic, width, height, maxval, data values.
fn parse_pnm_tokens<R: BufRead>(mut reader: R) -> Result<(u8, usize, usize, u32, Vec<u32>)> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let mut cleaned = String::with_capacity(text.len());
    for line in text.lines() {
        match line.find('#') {
            Some(k) => cleaned.push_str(&line[..k]),
            None => cleaned.push_str(line),
        }
        cleaned.push('\n');
    }
    let mut toks = cleaned.split_whitespace();
    let magic = match toks.next() {
        Some("P2") => 2u8,
        Some("P3") => 3u8,
        Some(other) => {
            return Err(Error::Parse { line: 1, msg: format!("unsupported magic {other:?} (plain P2/P3 only)") })
        }
        None => return Err(Error::EmptyInput("pnm stream")),
    };
    let mut next_int = |what: &str| -> Result<u32> {
        toks.next()
            .ok_or_else(|| Error::Parse { line: 0, msg: format!("missing {what}") })?
            .parse::<u32>()
            .map_err(|e| Error::Parse { line: 0, msg: format!("bad {what}: {e}") })
    };
    let w = next_int("width")? as usize;
    let h = next_int("height")? as usize;
    let maxval = next_int("maxval")?;
    if w == 0 || h == 0 {
        return Err(Error::EmptyInput("image"));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::invalid(format!("maxval {maxval} outside 1..=255")));
    }
    let count = w * h * if magic == 3 { 3 } else { 1 };
    let mut data = Vec::with_capacity(count);
    for _ in 0..count {
        let v = next_int("pixel value")?;
        if v > maxval {
            return Err(Error::invalid(format!("pixel value {v} exceeds maxval {maxval}")));
        }
        data.push(v);
    }
    if toks.next().is_some() {
        return Err(Error::Parse { line: 0, msg: "trailing data after pixels".into() });
    }
    Ok((magic, w, h, maxval, data))
}

/// Reads a P2 scribble mask: 0 = unlabeled, 1..=127 = class -1,
/// 128..=255 = class +1. Returns (width, height, labels).
pub fn read_mask_pgm<R: BufRead>(reader: R) -> Result<(usize, usize, Vec<i8>)> {
    let (magic, w, h, _maxval, data) = parse_pnm_tokens(reader)?;
    if magic != 2 {
        return Err(Error::Parse { line: 1, msg: "mask must be P2 grayscale".into() });
    }
    let labels = data
        .iter()
        .map(|&v| {
            if v == 0 {
                0i8
            } else if v < 128 {
                -1
            } else {
                1
            }
        })
        .collect();
    Ok((w, h, labels))
}

/// Writes thresholded labels as P2: +1 -> 255, everything else -> 0.
pub fn write_label_pgm<W: Write>(
    mut w: W,
    width: usize,
    height: usize,
    labels: &[f64],
) -> Result<()> {
    if labels.len() != width * height {
        return Err(Error::SizeMismatch {
            context: "label image",
            expected: width * height,
            got: labels.len(),
        });
    }
    writeln!(w, "P2")?;
    writeln!(w, "{width} {height}")?;
    writeln!(w, "255")?;
    for v in labels {
        writeln!(w, "{}", if *v >= 0.0 { 255 } else { 0 })?;
    }
    Ok(())
}

/// Builds the segmentation graph on pixel centers in [0,1]^2:
/// W_ij = eps^-2 * exp(-|y_i - y_j|^2 / tau_color) when |x_i - x_j| <= eps.
pub fn build_pixel_graph(img: &ImageGrid, tau_color: f64, eps: f64) -> Result<SparseGraph> {
    if !(tau_color.is_finite() && tau_color > 0.0) {
        return Err(Error::invalid(format!("tau_color must be finite and > 0, got {tau_color}")));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid(format!("eps must be finite and > 0, got {eps}")));
    }
    let (w, h) = (img.width, img.height);
    let n = w * h;
    let scale = 1.0 / (eps * eps);
    let drop = 1e-14 * scale;
    // tiny slack keeps boundary pairs (distance exactly eps) included even
    // when the coordinates are not dyadic
    let cut2 = (eps * (1.0 + 1e-12)).powi(2);
    let reach_c = (eps * w as f64).floor() as isize + 1;
    let reach_r = (eps * h as f64).floor() as isize + 1;
    let rows: Vec<Vec<(u32, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (ri, ci) = ((i / w) as isize, (i % w) as isize);
            let xi = img.position(i);
            let yi = img.rgb[i];
            let mut row = Vec::new();
            for dr in -reach_r..=reach_r {
                let rj = ri + dr;
                if rj < 0 || rj >= h as isize {
                    continue;
                }
                for dc in -reach_c..=reach_c {
                    let cj = ci + dc;
                    if cj < 0 || cj >= w as isize {
                        continue;
                    }
                    let j = rj as usize * w + cj as usize;
                    let xj = img.position(j);
                    let dx = xi[0] - xj[0];
                    let dy = xi[1] - xj[1];
                    if dx * dx + dy * dy > cut2 {
                        continue;
                    }
                    let yj = img.rgb[j];
                    let mut color2 = 0.0;
                    for k in 0..3 {
                        let d = yi[k] - yj[k];
                        color2 += d * d;
                    }
                    let wgt = scale * (-color2 / tau_color).exp();
                    if wgt >= drop {
                        row.push((j as u32, wgt));
                    }
                }
            }
            row.sort_unstable_by_key(|e| e.0);
            row
        })
        .collect();
    let total: usize = rows.iter().map(Vec::len).sum();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    offsets.push(0);
    for row in rows {
        for (c, wt) in row {
            cols.push(c);
            weights.push(wt);
        }
        offsets.push(cols.len());
    }
    Ok(SparseGraph::from_parts(n, 2, eps, offsets, cols, weights, None))
}
