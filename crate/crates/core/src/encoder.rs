//! Encoder embeddings with Whisper-tiny geometry.
//!
//! The reference encoder is a deterministic stand-in for the learned network:
//! it concatenates mel frame pairs `(2t, 2t + 1)`, projects the pair with a
//! seeded Gaussian matrix and applies the exact GELU. It reproduces the 2x
//! temporal downsample and embedding width of the real encoder, nothing more.
//! Real features produced elsewhere enter through [`import_embeddings`].

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mel::MelSpectrogram;
use crate::tensor::{TensorFile, TensorHeader, TensorKind};

pub const DEFAULT_EMBED_DIM: usize = 384;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Reference,
    Imported,
}

/// Row-major `(n_rows, dim)` embedding matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    data: Vec<f32>,
    n_rows: usize,
    dim: usize,
    enc_frame_rate_hz: f64,
    provenance: Provenance,
}

impl EmbeddingMatrix {
    pub fn new(
        data: Vec<f32>,
        n_rows: usize,
        dim: usize,
        enc_frame_rate_hz: f64,
        provenance: Provenance,
    ) -> Result<Self> {
        if dim == 0 || data.len() != n_rows * dim {
            return Err(Error::Shape(format!(
                "{} values cannot form a {n_rows} x {dim} embedding matrix",
                data.len()
            )));
        }
        if !(enc_frame_rate_hz.is_finite() && enc_frame_rate_hz > 0.0) {
            return Err(Error::Contract(format!(
                "invalid encoder frame rate {enc_frame_rate_hz}"
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Contract(format!("embedding value {i} is not finite")));
        }
        Ok(Self {
            data,
            n_rows,
            dim,
            enc_frame_rate_hz,
            provenance,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.dim)
    }

    pub fn enc_frame_rate_hz(&self) -> f64 {
        self.enc_frame_rate_hz
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn values(&self) -> &[f32] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn to_tensor(&self) -> TensorFile {
        let mut header = TensorHeader::new(TensorKind::Emb, vec![self.n_rows, self.dim]);
        header.rate_hz = Some(self.enc_frame_rate_hz);
        header.dim = Some(self.dim);
        TensorFile {
            header,
            data: self.data.clone(),
        }
    }

    pub fn from_tensor(t: TensorFile) -> Result<Self> {
        let (rows, cols) = t.matrix_dims()?;
        if t.header.kind != TensorKind::Emb {
            return Err(Error::Format(format!(
                "expected an emb tensor, got {:?}",
                t.header.kind
            )));
        }
        let rate = t
            .header
            .rate_hz
            .ok_or_else(|| Error::Format("emb header lacks 'rate_hz'".into()))?;
        if let Some(dim) = t.header.dim {
            if dim != cols {
                return Err(Error::Shape(format!(
                    "header dim {dim} disagrees with shape {:?}",
                    t.header.shape
                )));
            }
        }
        Self::new(t.data, rows, cols, rate, Provenance::Imported)
    }
}

/// Fixed projection for the reference encoder.
///
/// `proj` is a row-major `(2 * n_mels, dim)` matrix whose entries are drawn,
/// in row-major order, from a standard normal using `ChaCha8Rng` seeded with
/// `seed` via `seed_from_u64`, then scaled by `1 / sqrt(2 * n_mels)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceEncoderParams {
    pub seed: u64,
    pub n_mels: usize,
    pub dim: usize,
    pub proj: Vec<f32>,
    pub gelu_enabled: bool,
}

impl ReferenceEncoderParams {
    pub fn new(seed: u64, n_mels: usize, dim: usize) -> Self {
        let fan_in = 2 * n_mels;
        let scale = 1.0 / (fan_in as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let proj = (0..fan_in * dim)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                (z * scale) as f32
            })
            .collect();
        Self {
            seed,
            n_mels,
            dim,
            proj,
            gelu_enabled: true,
        }
    }

    /// 80 mel bins in, 384 dimensions out.
    pub fn whisper_tiny(seed: u64) -> Self {
        Self::new(seed, 80, DEFAULT_EMBED_DIM)
    }
}

/// Exact GELU, `x * Phi(x)`.
pub fn gelu(x: f64) -> f64 {
    0.5 * x * (1.0 + libm::erf(x / std::f64::consts::SQRT_2))
}

pub fn encode_reference(m: &MelSpectrogram, p: &ReferenceEncoderParams) -> Result<EmbeddingMatrix> {
    let n_mels = m.n_mels();
    if p.n_mels != n_mels {
        return Err(Error::Shape(format!(
            "encoder expects {} mel bins, spectrogram has {n_mels}",
            p.n_mels
        )));
    }
    if m.n_frames() == 0 {
        return Err(Error::Contract("spectrogram has no frames".into()));
    }
    let dim = p.dim;
    let n_rows = m.n_frames().div_ceil(2);
    let mut out = vec![0f32; n_rows * dim];
    out.par_chunks_mut(dim).enumerate().for_each_init(
        || (vec![0f32; 2 * n_mels], vec![0f64; dim]),
        |(pair, acc), (t, row)| {
            pair[..n_mels].copy_from_slice(m.frame(2 * t));
            if 2 * t + 1 < m.n_frames() {
                pair[n_mels..].copy_from_slice(m.frame(2 * t + 1));
            } else {
                pair[n_mels..].fill(0.0);
            }
            acc.fill(0.0);
            for (i, &x) in pair.iter().enumerate() {
                let x = x as f64;
                for (a, &w) in acc.iter_mut().zip(&p.proj[i * dim..(i + 1) * dim]) {
                    *a += x * w as f64;
                }
            }
            for (o, &a) in row.iter_mut().zip(acc.iter()) {
                *o = if p.gelu_enabled { gelu(a) } else { a } as f32;
            }
        },
    );
    EmbeddingMatrix::new(out, n_rows, dim, m.frame_rate_hz() / 2.0, Provenance::Reference)
}

pub fn import_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    EmbeddingMatrix::from_tensor(TensorFile::load(path)?)
}

pub fn export_embeddings(e: &EmbeddingMatrix, path: impl AsRef<Path>) -> Result<()> {
    e.to_tensor().save(path)
}
