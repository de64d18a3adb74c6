use std::collections::hash_map::DefaultHasher;
use std::hash::Hasher;
use std::io::{Cursor, Write};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::aligner::{align, AlignConfig};
use crate::audio::{decode_wav, resample, AudioBuffer};
use crate::encoder::{encode_reference, EmbeddingMatrix, ReferenceEncoderParams};
use crate::error::{Error, Result};
use crate::mel::{log_mel_spectrogram, normalize_log_mel, MelConfig, MelSpectrogram};

/// Something that turns a normalized spectrogram into encoder embeddings.
pub trait AfeBackend {
    fn name(&self) -> &str;
    fn encode(&self, mel: &MelSpectrogram) -> Result<EmbeddingMatrix>;
}

#[derive(Debug, Clone)]
pub struct ReferenceBackend {
    pub params: ReferenceEncoderParams,
}

impl ReferenceBackend {
    pub fn new(seed: u64) -> Self {
        Self {
            params: ReferenceEncoderParams::whisper_tiny(seed),
        }
    }
}

impl AfeBackend for ReferenceBackend {
    fn name(&self) -> &str {
        "reference"
    }

    fn encode(&self, mel: &MelSpectrogram) -> Result<EmbeddingMatrix> {
        encode_reference(mel, &self.params)
    }
}

/// Seeded uniform noise in `[-0.5, 0.5)`, `round(duration_s * sample_rate)` samples.
pub fn synth_audio(duration_s: f64, sample_rate: u32, seed: u64) -> Result<AudioBuffer> {
    if !(duration_s > 0.0 && duration_s.is_finite()) {
        return Err(Error::Contract(format!("invalid audio duration {duration_s}")));
    }
    let n = (duration_s * sample_rate as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..n).map(|_| rng.random::<f32>() - 0.5).collect();
    AudioBuffer::new(samples, sample_rate)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchPoint {
    pub duration_s: f64,
    pub mean_s: f64,
    pub std_s: f64,
    pub median_s: f64,
    pub repeats: usize,
    /// Shape of the aligned output, `(frames, window, dim)`.
    pub aligned_shape: (usize, usize, usize),
    /// Hash of the WAV bytes fed to the chain.
    pub input_digest: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchCurve {
    pub backend: String,
    pub points: Vec<BenchPoint>,
}

impl BenchCurve {
    /// `duration_s,mean_s,std_s,repeats`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["duration_s", "mean_s", "std_s", "repeats"])?;
        for p in &self.points {
            wr.write_record([
                p.duration_s.to_string(),
                p.mean_s.to_string(),
                p.std_s.to_string(),
                p.repeats.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("curve serializes")
    }
}

fn summarize(times: &mut [f64]) -> (f64, f64, f64) {
    let n = times.len() as f64;
    let mean = times.iter().sum::<f64>() / n;
    let std = if times.len() > 1 {
        (times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    times.sort_by(f64::total_cmp);
    let mid = times.len() / 2;
    let median = if times.len() % 2 == 1 {
        times[mid]
    } else {
        0.5 * (times[mid - 1] + times[mid])
    };
    (mean, std, median)
}

/// Times decode -> mel -> encode -> align end to end for each audio length.
///
/// Input audio is seeded noise encoded as 16-bit WAV before timing starts.
/// Each point discards one warm-up run and then times `repeats` runs.
pub fn bench_afe(backend: &dyn AfeBackend, durations: &[f64], repeats: usize, seed: u64) -> Result<BenchCurve> {
    if durations.is_empty() {
        return Err(Error::Contract("no bench durations given".into()));
    }
    if durations.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Contract("bench durations must be strictly increasing".into()));
    }
    if repeats == 0 {
        return Err(Error::Contract("repeats must be at least 1".into()));
    }
    let mel_cfg = MelConfig::default();
    let align_cfg = AlignConfig::default();
    let mut points = Vec::with_capacity(durations.len());
    for &d in durations {
        let audio = synth_audio(d, mel_cfg.sample_rate, seed)?;
        let mut wav = Cursor::new(Vec::new());
        audio.write_wav_i16(&mut wav)?;
        let wav = wav.into_inner();
        let mut hasher = DefaultHasher::new();
        hasher.write(&wav);
        let input_digest = hasher.finish();

        let run = || -> Result<(usize, usize, usize)> {
            let a = decode_wav(Cursor::new(&wav[..]))?;
            let a = resample(&a, mel_cfg.sample_rate)?;
            let m = normalize_log_mel(&log_mel_spectrogram(&a, &mel_cfg)?);
            let e = backend.encode(&m)?;
            Ok(align(&e, &align_cfg)?.shape())
        };
        let aligned_shape = run()?;
        let mut times = Vec::with_capacity(repeats);
        for _ in 0..repeats {
            let start = Instant::now();
            let shape = run()?;
            times.push(start.elapsed().as_secs_f64());
            debug_assert_eq!(shape, aligned_shape);
        }
        let (mean_s, std_s, median_s) = summarize(&mut times);
        points.push(BenchPoint {
            duration_s: d,
            mean_s,
            std_s,
            median_s,
            repeats,
            aligned_shape,
            input_digest,
        });
    }
    Ok(BenchCurve {
        backend: backend.name().to_string(),
        points,
    })
}
