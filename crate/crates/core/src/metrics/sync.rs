use crate::error::{Error, Result};

pub const DEFAULT_SYNC_EPS: f64 = 1e-8;

/// Paired per-frame video and audio embeddings, both `(n, d)` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingPairSeries {
    video: Vec<f64>,
    audio: Vec<f64>,
    n: usize,
    d: usize,
    pub eps: f64,
}

impl EmbeddingPairSeries {
    pub fn new(video: Vec<f64>, audio: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if d == 0 || video.len() != n * d || audio.len() != n * d {
            return Err(Error::Shape(format!(
                "video ({}) and audio ({}) values must both form {n} x {d}",
                video.len(),
                audio.len()
            )));
        }
        Ok(Self {
            video,
            audio,
            n,
            d,
            eps: DEFAULT_SYNC_EPS,
        })
    }

    pub fn from_rows(video: &[Vec<f64>], audio: &[Vec<f64>]) -> Result<Self> {
        if video.len() != audio.len() {
            return Err(Error::Shape(format!(
                "{} video rows vs {} audio rows",
                video.len(),
                audio.len()
            )));
        }
        let d = video.first().map_or(0, Vec::len);
        if video.iter().chain(audio).any(|r| r.len() != d) {
            return Err(Error::Shape("embedding rows differ in width".into()));
        }
        Self::new(video.concat(), audio.concat(), video.len(), d)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn pair(&self, i: usize) -> (&[f64], &[f64]) {
        let r = i * self.d..(i + 1) * self.d;
        (&self.video[r.clone()], &self.audio[r])
    }

    /// Per-pair confidences in order.
    pub fn confidences(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let (v, s) = self.pair(i);
                cosine_confidence(v, s, self.eps)
            })
            .collect()
    }
}

/// `v . s / max(|v| |s|, eps)`.
pub fn cosine_confidence(v: &[f64], s: &[f64], eps: f64) -> f64 {
    let dot: f64 = v.iter().zip(s).map(|(a, b)| a * b).sum();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let ns = s.iter().map(|a| a * a).sum::<f64>().sqrt();
    dot / (nv * ns).max(eps)
}

/// Mean cosine confidence across all pairs.
pub fn sync_conf(series: &EmbeddingPairSeries) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::Contract("embedding series is empty".into()));
    }
    Ok(series.confidences().iter().sum::<f64>() / series.len() as f64)
}
