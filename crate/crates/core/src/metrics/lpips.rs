//! Patch-feature perceptual distance.
//!
//! The distance is the mean, over aligned patches, of the L2 norm between
//! the two images' patch features. Learned LPIPS plugs in by supplying
//! network features through [`lpips_from_features`] or a custom
//! [`PatchEmbedder`]; [`GridStatsEmbedder`] is a network-free default.

use super::ImageFrame;
use crate::error::{Error, Result};

/// Maps an image to one feature vector per patch.
pub trait PatchEmbedder {
    fn embed(&self, img: &ImageFrame) -> Result<Vec<Vec<f64>>>;
}

/// Splits the luma plane into a `grid x grid` lattice and describes each cell
/// by `(mean, std, mean |dx|, mean |dy|)`, with intensities scaled to `[0, 1]`.
///
/// Cell `(r, c)` spans rows `r*H/grid .. (r+1)*H/grid` (integer division) and
/// likewise for columns. Gradients are forward differences between pixels
/// that both lie in the cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridStatsEmbedder {
    pub grid: usize,
}

impl Default for GridStatsEmbedder {
    fn default() -> Self {
        Self { grid: 8 }
    }
}

impl PatchEmbedder for GridStatsEmbedder {
    fn embed(&self, img: &ImageFrame) -> Result<Vec<Vec<f64>>> {
        let (h, w, g) = (img.height(), img.width(), self.grid);
        if g == 0 || h < g || w < g {
            return Err(Error::Contract(format!(
                "{h}x{w} image cannot be split into a {g}x{g} grid"
            )));
        }
        let scale = 1.0 / img.max_value();
        let plane: Vec<f64> = img.luma().iter().map(|v| v * scale).collect();
        let mut feats = Vec::with_capacity(g * g);
        for r in 0..g {
            let (y0, y1) = (r * h / g, (r + 1) * h / g);
            for c in 0..g {
                let (x0, x1) = (c * w / g, (c + 1) * w / g);
                let n = ((y1 - y0) * (x1 - x0)) as f64;
                let mut sum = 0.0;
                let mut sq = 0.0;
                let (mut gx, mut nx, mut gy, mut ny) = (0.0, 0usize, 0.0, 0usize);
                for y in y0..y1 {
                    for x in x0..x1 {
                        let v = plane[y * w + x];
                        sum += v;
                        sq += v * v;
                        if x + 1 < x1 {
                            gx += (plane[y * w + x + 1] - v).abs();
                            nx += 1;
                        }
                        if y + 1 < y1 {
                            gy += (plane[(y + 1) * w + x] - v).abs();
                            ny += 1;
                        }
                    }
                }
                let mean = sum / n;
                let var = (sq / n - mean * mean).max(0.0);
                let gx = if nx > 0 { gx / nx as f64 } else { 0.0 };
                let gy = if ny > 0 { gy / ny as f64 } else { 0.0 };
                feats.push(vec![mean, var.sqrt(), gx, gy]);
            }
        }
        Ok(feats)
    }
}

pub fn lpips_from_features(pred: &[Vec<f64>], truth: &[Vec<f64>]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::Shape(format!(
            "patch counts differ: {} vs {}",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::Contract("no patches to compare".into()));
    }
    let mut total = 0.0;
    for (i, (p, t)) in pred.iter().zip(truth).enumerate() {
        if p.len() != t.len() {
            return Err(Error::Shape(format!(
                "patch {i} feature widths differ: {} vs {}",
                p.len(),
                t.len()
            )));
        }
        total += p.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    }
    Ok(total / pred.len() as f64)
}

pub fn lpips(pred: &ImageFrame, truth: &ImageFrame, embedder: &dyn PatchEmbedder) -> Result<f64> {
    lpips_from_features(&embedder.embed(pred)?, &embedder.embed(truth)?)
}
