//! Brute-force reference implementations used as test oracles. Each one is
//! written directly from the defining formula and shares no code with the
//! library path it checks.

#![allow(dead_code)]

pub mod corpus;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Counts window placements by sliding over an explicitly padded sequence.
pub fn enumerate_windows(t_enc: usize, w: usize, s: usize, p: usize) -> usize {
    let padded_len = t_enc + 2 * p;
    let mut count = 0;
    let mut start = 0;
    while start + w <= padded_len {
        count += 1;
        start += s;
    }
    count
}

/// Gathers windows from a zero-padded copy of `rows`.
pub fn gather_windows(rows: &[Vec<f32>], w: usize, s: usize, p: usize) -> Vec<Vec<Vec<f32>>> {
    let dim = rows[0].len();
    let mut padded = vec![vec![0.0f32; dim]; p];
    padded.extend(rows.iter().cloned());
    padded.extend(vec![vec![0.0f32; dim]; p]);
    let mut out = Vec::new();
    let mut start = 0;
    while start + w <= padded.len() {
        out.push(padded[start..start + w].to_vec());
        start += s;
    }
    out
}

/// Slaney mel scale written as a piecewise closed form.
pub fn slaney_mel(hz: f64) -> f64 {
    if hz < 1000.0 {
        3.0 * hz / 200.0
    } else {
        15.0 + 27.0 * (hz / 1000.0).ln() / 6.4f64.ln()
    }
}

pub fn slaney_hz(mel: f64) -> f64 {
    if mel < 15.0 {
        200.0 * mel / 3.0
    } else {
        1000.0 * 6.4f64.powf((mel - 15.0) / 27.0)
    }
}

/// Center frequencies of `n_mels` filters evenly spaced on the mel axis.
pub fn mel_centers(n_mels: usize, fmin: f64, fmax: f64) -> Vec<f64> {
    let (a, b) = (slaney_mel(fmin), slaney_mel(fmax));
    (1..=n_mels)
        .map(|i| slaney_hz(a + (b - a) * i as f64 / (n_mels + 1) as f64))
        .collect()
}

/// Whisper clamp-and-scale computed in f64.
pub fn clamp_scale(values: &[f32]) -> Vec<f64> {
    let max = values.iter().map(|&v| v as f64).fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .map(|&v| ((v as f64).max(max - 8.0) + 4.0) / 4.0)
        .collect()
}

pub fn naive_mse(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        s += d * d;
    }
    s / a.len() as f64
}

pub fn naive_psnr(a: &[f64], b: &[f64], max: f64) -> f64 {
    let e = naive_mse(a, b);
    if e == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (max * max / e).log10()
    }
}

/// Mean SSIM with a 2-D Gaussian window evaluated independently at every
/// fully-contained window position of two single-plane images.
pub fn naive_ssim(x: &[f64], y: &[f64], h: usize, w: usize, max: f64) -> f64 {
    let size = 11usize;
    let sigma = 1.5f64;
    let mut g = vec![vec![0.0; size]; size];
    let mut total = 0.0;
    for (i, row) in g.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let di = i as f64 - 5.0;
            let dj = j as f64 - 5.0;
            *v = (-(di * di + dj * dj) / (2.0 * sigma * sigma)).exp();
            total += *v;
        }
    }
    let c1 = (0.01 * max) * (0.01 * max);
    let c2 = (0.03 * max) * (0.03 * max);
    let mut acc = 0.0;
    let mut count = 0;
    for top in 0..=h - size {
        for left in 0..=w - size {
            let (mut mx, mut my) = (0.0, 0.0);
            for i in 0..size {
                for j in 0..size {
                    let wt = g[i][j] / total;
                    mx += wt * x[(top + i) * w + left + j];
                    my += wt * y[(top + i) * w + left + j];
                }
            }
            let (mut vx, mut vy, mut cxy) = (0.0, 0.0, 0.0);
            for i in 0..size {
                for j in 0..size {
                    let wt = g[i][j] / total;
                    let dx = x[(top + i) * w + left + j] - mx;
                    let dy = y[(top + i) * w + left + j] - my;
                    vx += wt * dx * dx;
                    vy += wt * dy * dy;
                    cxy += wt * dx * dy;
                }
            }
            acc += (2.0 * mx * my + c1) * (2.0 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    acc / count as f64
}

/// 8x8-grid (mean, std, mean |dx|, mean |dy|) features then mean L2 distance.
pub fn naive_grid_lpips(x: &[f64], y: &[f64], h: usize, w: usize, max: f64) -> f64 {
    let feats = |img: &[f64]| {
        let mut out = Vec::new();
        for r in 0..8 {
            for c in 0..8 {
                let (y0, y1, x0, x1) = (r * h / 8, (r + 1) * h / 8, c * w / 8, (c + 1) * w / 8);
                let mut vals = Vec::new();
                for yy in y0..y1 {
                    for xx in x0..x1 {
                        vals.push(img[yy * w + xx] / max);
                    }
                }
                let n = vals.len() as f64;
                let mean = vals.iter().sum::<f64>() / n;
                let std = (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
                let mut gx = Vec::new();
                let mut gy = Vec::new();
                for yy in y0..y1 {
                    for xx in x0..x1 {
                        if xx + 1 < x1 {
                            gx.push(((img[yy * w + xx + 1] - img[yy * w + xx]) / max).abs());
                        }
                        if yy + 1 < y1 {
                            gy.push(((img[(yy + 1) * w + xx] - img[yy * w + xx]) / max).abs());
                        }
                    }
                }
                let avg = |v: &Vec<f64>| {
                    if v.is_empty() {
                        0.0
                    } else {
                        v.iter().sum::<f64>() / v.len() as f64
                    }
                };
                out.push([mean, std, avg(&gx), avg(&gy)]);
            }
        }
        out
    };
    let (fa, fb) = (feats(x), feats(y));
    let mut s = 0.0;
    for (a, b) in fa.iter().zip(&fb) {
        s += (0..4).map(|k| (a[k] - b[k]).powi(2)).sum::<f64>().sqrt();
    }
    s / fa.len() as f64
}

pub fn naive_lmd(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += ((a[i].0 - b[i].0).powi(2) + (a[i].1 - b[i].1).powi(2)).sqrt();
    }
    s / a.len() as f64
}

pub fn naive_aue(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]).powi(2);
    }
    s / a.len() as f64
}

pub fn naive_sync(v: &[Vec<f64>], s: &[Vec<f64>], eps: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..v.len() {
        let mut dot = 0.0;
        let mut nv = 0.0;
        let mut ns = 0.0;
        for k in 0..v[i].len() {
            dot += v[i][k] * s[i][k];
            nv += v[i][k] * v[i][k];
            ns += s[i][k] * s[i][k];
        }
        let denom = nv.sqrt() * ns.sqrt();
        total += dot / if denom > eps { denom } else { eps };
    }
    total / v.len() as f64
}

/// Fréchet distance between Gaussians with diagonal covariances.
pub fn fid_diagonal(mu_r: &[f64], var_r: &[f64], mu_g: &[f64], var_g: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..mu_r.len() {
        s += (mu_r[i] - mu_g[i]).powi(2);
        s += var_r[i] + var_g[i] - 2.0 * (var_r[i] * var_g[i]).sqrt();
    }
    s
}

pub fn random_u8_image(r: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| r.random::<u8>()).collect()
}

pub fn random_vec(r: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| r.random_range(lo..hi)).collect()
}

/// Random symmetric positive definite matrix `A A^T + d I`, row-major.
pub fn random_spd(r: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let a: Vec<f64> = (0..d * d).map(|_| r.random_range(-1.0..1.0)).collect();
    let mut m = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let mut s = 0.0;
            for k in 0..d {
                s += a[i * d + k] * a[j * d + k];
            }
            m[i * d + j] = s + if i == j { 0.1 * d as f64 } else { 0.0 };
        }
    }
    m
}

pub fn matmul(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let mut s = 0.0;
            for k in 0..d {
                s += a[i * d + k] * b[k * d + j];
            }
            out[i * d + j] = s;
        }
    }
    out
}

pub fn frobenius(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}
