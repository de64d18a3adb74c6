//! Sliding-window alignment of encoder frames to video frames.
//!
//! The encoder sequence is zero-padded by `padding` rows on both sides and
//! windows of `window` rows are taken every `stride` rows. With 50 Hz encoder
//! frames, `stride = 2` gives one window per 25 FPS video frame.

use crate::encoder::{EmbeddingMatrix, Provenance};
use crate::error::{Error, Result};
use crate::tensor::{TensorFile, TensorHeader, TensorKind};

const RATE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct AlignConfig {
    pub window: usize,
    pub stride: usize,
    pub padding: usize,
    pub video_fps: f64,
}

impl Default for AlignConfig {
    fn default() -> Self {
        Self {
            window: 16,
            stride: 2,
            padding: 7,
            video_fps: 25.0,
        }
    }
}

impl AlignConfig {
    fn validate(&self) -> Result<()> {
        if self.window == 0 || self.stride == 0 {
            return Err(Error::Contract("window and stride must be at least 1".into()));
        }
        if !(self.video_fps.is_finite() && self.video_fps > 0.0) {
            return Err(Error::Contract(format!("invalid video fps {}", self.video_fps)));
        }
        Ok(())
    }

    /// Checks `enc_rate_hz / video_fps == stride`.
    pub fn check_rate(&self, enc_rate_hz: f64) -> Result<()> {
        let ratio = enc_rate_hz / self.video_fps;
        if (ratio - self.stride as f64).abs() > RATE_TOLERANCE * ratio.abs().max(1.0) {
            return Err(Error::RateMismatch {
                enc_rate_hz,
                video_fps: self.video_fps,
                ratio,
                stride: self.stride,
            });
        }
        Ok(())
    }

    /// Replaces the stride with `round(enc_rate_hz / video_fps)`.
    pub fn with_stride_for_rate(mut self, enc_rate_hz: f64) -> Result<Self> {
        let s = (enc_rate_hz / self.video_fps).round();
        if s.is_nan() || s < 1.0 {
            return Err(Error::Contract(format!(
                "encoder rate {enc_rate_hz} Hz is below the video rate {} fps",
                self.video_fps
            )));
        }
        self.stride = s as usize;
        Ok(self)
    }
}

/// `floor((t_enc + 2p - w) / s) + 1`.
pub fn window_count(t_enc: usize, cfg: &AlignConfig) -> Result<usize> {
    cfg.validate()?;
    if t_enc == 0 {
        return Err(Error::Contract("encoder sequence is empty".into()));
    }
    let padded = t_enc + 2 * cfg.padding;
    if cfg.window > padded {
        return Err(Error::Contract(format!(
            "window {} is longer than the padded sequence {padded}",
            cfg.window
        )));
    }
    Ok((padded - cfg.window) / cfg.stride + 1)
}

/// Center of window `i` in unpadded encoder coordinates, `i*s + (w-1)/2 - p`.
/// Even windows have a half-frame center, which is reported as is.
pub fn frame_center(i: usize, cfg: &AlignConfig, t_enc: usize) -> Result<f64> {
    let n = window_count(t_enc, cfg)?;
    if i >= n {
        return Err(Error::Contract(format!("frame index {i} out of range 0..{n}")));
    }
    Ok((i * cfg.stride) as f64 + (cfg.window as f64 - 1.0) / 2.0 - cfg.padding as f64)
}

/// Row-major `(n_frames, window, dim)` tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedFeatureTensor {
    data: Vec<f32>,
    n_frames: usize,
    window: usize,
    dim: usize,
    video_fps: f64,
    source_provenance: Provenance,
}

impl AlignedFeatureTensor {
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n_frames, self.window, self.dim)
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn video_fps(&self) -> f64 {
        self.video_fps
    }

    pub fn source_provenance(&self) -> Provenance {
        self.source_provenance
    }

    pub fn values(&self) -> &[f32] {
        &self.data
    }

    /// Slot `j` of window `i`.
    pub fn slot(&self, i: usize, j: usize) -> &[f32] {
        let start = (i * self.window + j) * self.dim;
        &self.data[start..start + self.dim]
    }

    pub fn to_tensor(&self) -> TensorFile {
        let mut header = TensorHeader::new(TensorKind::Aligned, vec![self.n_frames, self.window, self.dim]);
        header.fps = Some(self.video_fps);
        TensorFile {
            header,
            data: self.data.clone(),
        }
    }

    /// Imported tensors carry no provenance and are marked as imported.
    pub fn from_tensor(t: TensorFile) -> Result<Self> {
        if t.header.kind != TensorKind::Aligned {
            return Err(Error::Format(format!(
                "expected an aligned tensor, got {:?}",
                t.header.kind
            )));
        }
        let [n, w, c] = t.header.shape[..] else {
            return Err(Error::Shape(format!(
                "expected a 3-D tensor, got shape {:?}",
                t.header.shape
            )));
        };
        let fps = t
            .header
            .fps
            .ok_or_else(|| Error::Format("aligned header lacks 'fps'".into()))?;
        Ok(Self {
            data: t.data,
            n_frames: n,
            window: w,
            dim: c,
            video_fps: fps,
            source_provenance: Provenance::Imported,
        })
    }
}

pub fn align(e: &EmbeddingMatrix, cfg: &AlignConfig) -> Result<AlignedFeatureTensor> {
    cfg.check_rate(e.enc_frame_rate_hz())?;
    let t_enc = e.n_rows();
    let n = window_count(t_enc, cfg)?;
    let dim = e.dim();
    let mut data = vec![0f32; n * cfg.window * dim];
    for (slot_idx, out) in data.chunks_exact_mut(dim).enumerate() {
        let (i, j) = (slot_idx / cfg.window, slot_idx % cfg.window);
        let padded = i * cfg.stride + j;
        if padded >= cfg.padding && padded - cfg.padding < t_enc {
            out.copy_from_slice(e.row(padded - cfg.padding));
        }
    }
    Ok(AlignedFeatureTensor {
        data,
        n_frames: n,
        window: cfg.window,
        dim,
        video_fps: cfg.video_fps,
        source_provenance: e.provenance(),
    })
}
