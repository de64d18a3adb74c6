//! Whisper-convention log-mel spectrograms.
//!
//! Center-padded STFT (reflection padding, periodic Hann window), power
//! spectrum, a triangular filterbank on the Slaney mel scale, then
//! `log10(max(power, 1e-10))`. [`normalize_log_mel`] applies the Whisper
//! clamp-and-scale step.

use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::audio::AudioBuffer;
use crate::error::{Error, Result};
use crate::tensor::{TensorFile, TensorHeader, TensorKind};

/// Power floor applied before the logarithm.
pub const LOG_FLOOR: f64 = 1e-10;
/// Dynamic range kept by [`normalize_log_mel`], in log10 units.
pub const NORM_DYNAMIC_RANGE: f32 = 8.0;

#[derive(Debug, Clone, PartialEq)]
pub struct MelConfig {
    pub sample_rate: u32,
    pub window_ms: f64,
    pub hop_ms: f64,
    pub n_fft: usize,
    pub hop: usize,
    pub n_mels: usize,
    pub fmin: f64,
    pub fmax: f64,
}

impl Default for MelConfig {
    fn default() -> Self {
        Self::from_ms(16000, 25.0, 10.0, 80, 0.0, 8000.0)
    }
}

impl MelConfig {
    /// Derives `n_fft` and `hop` in samples from millisecond durations.
    pub fn from_ms(sample_rate: u32, window_ms: f64, hop_ms: f64, n_mels: usize, fmin: f64, fmax: f64) -> Self {
        let sr = sample_rate as f64;
        Self {
            sample_rate,
            window_ms,
            hop_ms,
            n_fft: (window_ms / 1000.0 * sr).round() as usize,
            hop: (hop_ms / 1000.0 * sr).round() as usize,
            n_mels,
            fmin,
            fmax,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sr = self.sample_rate as f64;
        if self.sample_rate == 0 {
            return Err(Error::Contract("mel sample rate must be positive".into()));
        }
        if self.n_fft == 0 || self.hop == 0 {
            return Err(Error::Contract("n_fft and hop must be positive".into()));
        }
        if self.n_fft != (self.window_ms / 1000.0 * sr).round() as usize
            || self.hop != (self.hop_ms / 1000.0 * sr).round() as usize
        {
            return Err(Error::Contract(format!(
                "n_fft {} / hop {} disagree with {} ms / {} ms at {} Hz",
                self.n_fft, self.hop, self.window_ms, self.hop_ms, self.sample_rate
            )));
        }
        if self.n_mels == 0 {
            return Err(Error::Contract("n_mels must be at least 1".into()));
        }
        if !(self.fmin >= 0.0 && self.fmin < self.fmax && self.fmax <= sr / 2.0) {
            return Err(Error::Contract(format!(
                "need 0 <= fmin < fmax <= {}, got [{}, {}]",
                sr / 2.0,
                self.fmin,
                self.fmax
            )));
        }
        Ok(())
    }

    pub fn frame_rate_hz(&self) -> f64 {
        self.sample_rate as f64 / self.hop as f64
    }

    pub fn n_freqs(&self) -> usize {
        self.n_fft / 2 + 1
    }
}

/// Time-major matrix of shape `(n_frames, n_mels)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MelSpectrogram {
    frames: Vec<f32>,
    n_frames: usize,
    config: MelConfig,
    normalized: bool,
}

impl MelSpectrogram {
    pub fn from_raw(frames: Vec<f32>, n_frames: usize, config: MelConfig, normalized: bool) -> Result<Self> {
        if frames.len() != n_frames * config.n_mels {
            return Err(Error::Shape(format!(
                "{} values cannot form {} x {} mel frames",
                frames.len(),
                n_frames,
                config.n_mels
            )));
        }
        Ok(Self {
            frames,
            n_frames,
            config,
            normalized,
        })
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn n_mels(&self) -> usize {
        self.config.n_mels
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_frames, self.config.n_mels)
    }

    pub fn frame_rate_hz(&self) -> f64 {
        self.config.frame_rate_hz()
    }

    pub fn config(&self) -> &MelConfig {
        &self.config
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn values(&self) -> &[f32] {
        &self.frames
    }

    pub fn frame(&self, t: usize) -> &[f32] {
        let m = self.config.n_mels;
        &self.frames[t * m..(t + 1) * m]
    }

    pub fn to_tensor(&self) -> TensorFile {
        let header = TensorHeader::new(TensorKind::Mel, vec![self.n_frames, self.config.n_mels]);
        TensorFile {
            header,
            data: self.frames.clone(),
        }
    }

    /// Rebuilds a spectrogram from a `mel` tensor. The header does not record
    /// the analysis parameters, so `config` supplies them.
    pub fn from_tensor(t: TensorFile, config: MelConfig, normalized: bool) -> Result<Self> {
        if t.header.kind != TensorKind::Mel {
            return Err(Error::Format(format!("expected a mel tensor, got {:?}", t.header.kind)));
        }
        let (rows, cols) = t.matrix_dims()?;
        if cols != config.n_mels {
            return Err(Error::Shape(format!(
                "mel tensor has {cols} bins, config expects {}",
                config.n_mels
            )));
        }
        Self::from_raw(t.data, rows, config, normalized)
    }
}

/// Slaney mel scale: linear below 1 kHz, logarithmic above.
pub fn hz_to_mel(hz: f64) -> f64 {
    const F_SP: f64 = 200.0 / 3.0;
    const MIN_LOG_HZ: f64 = 1000.0;
    let min_log_mel = MIN_LOG_HZ / F_SP;
    let logstep = (6.4f64).ln() / 27.0;
    if hz >= MIN_LOG_HZ {
        min_log_mel + (hz / MIN_LOG_HZ).ln() / logstep
    } else {
        hz / F_SP
    }
}

pub fn mel_to_hz(mel: f64) -> f64 {
    const F_SP: f64 = 200.0 / 3.0;
    const MIN_LOG_HZ: f64 = 1000.0;
    let min_log_mel = MIN_LOG_HZ / F_SP;
    let logstep = (6.4f64).ln() / 27.0;
    if mel >= min_log_mel {
        MIN_LOG_HZ * (logstep * (mel - min_log_mel)).exp()
    } else {
        mel * F_SP
    }
}

/// Triangular mel filterbank, `n_mels` rows over `n_fft / 2 + 1` bins.
///
/// Every row is scaled so its largest weight is exactly 1. A filter narrower
/// than the FFT bin spacing, which would sample to all zeros, collapses onto
/// the bin nearest its center.
#[derive(Debug, Clone)]
pub struct MelFilterbank {
    weights: Vec<f64>,
    n_mels: usize,
    n_freqs: usize,
    centers_hz: Vec<f64>,
}

impl MelFilterbank {
    pub fn new(cfg: &MelConfig) -> Self {
        let n_freqs = cfg.n_freqs();
        let bin_hz = cfg.sample_rate as f64 / cfg.n_fft as f64;
        let (mlo, mhi) = (hz_to_mel(cfg.fmin), hz_to_mel(cfg.fmax));
        let edges: Vec<f64> = (0..cfg.n_mels + 2)
            .map(|i| mel_to_hz(mlo + (mhi - mlo) * i as f64 / (cfg.n_mels + 1) as f64))
            .collect();
        let mut weights = vec![0.0; cfg.n_mels * n_freqs];
        for (m, row) in weights.chunks_exact_mut(n_freqs).enumerate() {
            let (lo, c, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            for (k, w) in row.iter_mut().enumerate() {
                let f = k as f64 * bin_hz;
                let up = (f - lo) / (c - lo);
                let down = (hi - f) / (hi - c);
                *w = up.min(down).max(0.0);
            }
            let peak = row.iter().cloned().fold(0.0, f64::max);
            if peak > 0.0 {
                row.iter_mut().for_each(|w| *w /= peak);
            } else {
                let k = ((c / bin_hz).round() as usize).min(n_freqs - 1);
                row[k] = 1.0;
            }
        }
        Self {
            weights,
            n_mels: cfg.n_mels,
            n_freqs,
            centers_hz: edges[1..=cfg.n_mels].to_vec(),
        }
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.weights[m * self.n_freqs..(m + 1) * self.n_freqs]
    }

    pub fn n_mels(&self) -> usize {
        self.n_mels
    }

    pub fn n_freqs(&self) -> usize {
        self.n_freqs
    }

    pub fn center_hz(&self, m: usize) -> f64 {
        self.centers_hz[m]
    }

    fn apply(&self, power: &[f64], out: &mut [f32]) {
        for (m, o) in out.iter_mut().enumerate() {
            let e: f64 = self.row(m).iter().zip(power).map(|(w, p)| w * p).sum();
            *o = e.max(LOG_FLOOR).log10() as f32;
        }
    }
}

/// Periodic Hann window of length `n`.
pub fn hann_window(n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| 0.5 - 0.5 * (2.0 * PI * j as f64 / n as f64).cos())
        .collect()
}

/// Maps a possibly out-of-range index into `0..len` by mirror reflection
/// about the first and last samples (edge samples are not repeated).
fn reflect(i: isize, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * (len as isize - 1);
    let m = i.rem_euclid(period);
    if m >= len as isize {
        (period - m) as usize
    } else {
        m as usize
    }
}

/// Number of center-padded frames for `len` samples: `ceil(len / hop)`.
pub fn frame_count(len: usize, hop: usize) -> usize {
    len.div_ceil(hop)
}

pub fn log_mel_spectrogram(a: &AudioBuffer, cfg: &MelConfig) -> Result<MelSpectrogram> {
    cfg.validate()?;
    if a.sample_rate() != cfg.sample_rate {
        return Err(Error::Contract(format!(
            "audio is {} Hz but the mel config expects {} Hz; resample first",
            a.sample_rate(),
            cfg.sample_rate
        )));
    }
    if a.is_empty() {
        return Err(Error::Contract("audio buffer is empty".into()));
    }
    let samples = a.samples();
    let n_frames = frame_count(samples.len(), cfg.hop);
    let n_fft = cfg.n_fft;
    let half = (n_fft / 2) as isize;
    let window = hann_window(n_fft);
    let bank = MelFilterbank::new(cfg);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n_fft);

    let mut out = vec![0f32; n_frames * cfg.n_mels];
    out.par_chunks_mut(cfg.n_mels).enumerate().for_each_init(
        || {
            (
                vec![Complex::new(0.0, 0.0); n_fft],
                vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()],
                vec![0.0f64; n_fft / 2 + 1],
            )
        },
        |(buf, scratch, power), (t, row)| {
            let start = (t * cfg.hop) as isize - half;
            for (j, slot) in buf.iter_mut().enumerate() {
                let s = samples[reflect(start + j as isize, samples.len())] as f64;
                *slot = Complex::new(s * window[j], 0.0);
            }
            fft.process_with_scratch(buf, scratch);
            for (p, x) in power.iter_mut().zip(buf.iter()) {
                *p = x.norm_sqr();
            }
            bank.apply(power, row);
        },
    );
    MelSpectrogram::from_raw(out, n_frames, cfg.clone(), false)
}

/// Whisper clamp-and-scale: `x <- max(x, max_all - 8)`, then `(x + 4) / 4`.
pub fn normalize_log_mel(m: &MelSpectrogram) -> MelSpectrogram {
    let peak = m.frames.iter().cloned().fold(f32::NEG_INFINITY, f32::max);
    let floor = peak - NORM_DYNAMIC_RANGE;
    let frames = m.frames.iter().map(|&x| (x.max(floor) + 4.0) / 4.0).collect();
    MelSpectrogram {
        frames,
        n_frames: m.n_frames,
        config: m.config.clone(),
        normalized: true,
    }
}
