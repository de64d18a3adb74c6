//! PCM audio ingest: WAV decoding, mono downmix and band-limited resampling.

use std::f64::consts::PI;
use std::io::{Read, Seek, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Mono PCM signal with amplitudes nominally in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    samples: Vec<f32>,
    sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(samples: Vec<f32>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Contract("sample rate must be positive".into()));
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::Contract(format!("sample {i} is not finite")));
        }
        Ok(Self { samples, sample_rate })
    }

    pub fn samples(&self) -> &[f32] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn into_samples(self) -> Vec<f32> {
        self.samples
    }

    /// Encodes as a mono 16-bit PCM WAV stream.
    pub fn write_wav_i16<W: Write + Seek>(&self, w: W) -> Result<()> {
        let spec = hound::WavSpec {
            channels: 1,
            sample_rate: self.sample_rate,
            bits_per_sample: 16,
            sample_format: hound::SampleFormat::Int,
        };
        let mut writer = hound::WavWriter::new(w, spec).map_err(map_hound)?;
        for &s in &self.samples {
            let q = (s.clamp(-1.0, 1.0) * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
            writer.write_sample(q).map_err(map_hound)?;
        }
        writer.finalize().map_err(map_hound)
    }
}

fn map_hound(e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::Io(io),
        hound::Error::Unsupported => Error::Unsupported("wav codec".into()),
        hound::Error::FormatError(msg) => Error::Format(format!("wav: {msg}")),
        other => Error::Format(format!("wav: {other}")),
    }
}

/// Reads a RIFF/WAVE file holding 16-bit integer or 32-bit float PCM.
pub fn load_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let reader = hound::WavReader::open(path).map_err(map_hound)?;
    read_wav(reader)
}

/// Like [`load_wav`] but from any seekable byte stream.
pub fn decode_wav<R: Read>(r: R) -> Result<AudioBuffer> {
    let reader = hound::WavReader::new(r).map_err(map_hound)?;
    read_wav(reader)
}

fn read_wav<R: Read>(reader: hound::WavReader<R>) -> Result<AudioBuffer> {
    let spec = reader.spec();
    let channels = spec.channels as usize;
    if channels == 0 {
        return Err(Error::Format("wav header declares zero channels".into()));
    }
    let interleaved: Vec<f32> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| v as f32 / 32768.0))
            .collect::<std::result::Result<_, _>>()
            .map_err(map_hound)?,
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .collect::<std::result::Result<_, _>>()
            .map_err(map_hound)?,
        (fmt, bits) => {
            return Err(Error::Unsupported(format!("{bits}-bit {fmt:?} wav samples")));
        }
    };
    if !interleaved.len().is_multiple_of(channels) {
        return Err(Error::Format(
            "sample count is not a multiple of the channel count".into(),
        ));
    }
    let mono = if channels == 1 {
        interleaved
    } else {
        let scale = 1.0 / channels as f32;
        interleaved
            .chunks_exact(channels)
            .map(|frame| frame.iter().sum::<f32>() * scale)
            .collect()
    };
    AudioBuffer::new(mono, spec.sample_rate)
}

/// Zero crossings of the sinc kernel kept on each side.
const SINC_ZEROS: f64 = 16.0;

/// Band-limited resampling with a Blackman-windowed sinc kernel.
///
/// When downsampling the kernel cutoff is lowered to the output Nyquist
/// frequency. The output holds `round(len * target / source)` samples.
pub fn resample(a: &AudioBuffer, target_rate: u32) -> Result<AudioBuffer> {
    if target_rate == 0 {
        return Err(Error::Contract("target rate must be positive".into()));
    }
    if target_rate == a.sample_rate {
        return Ok(a.clone());
    }
    let src = a.sample_rate as u64;
    let dst = target_rate as u64;
    let out_len = ((a.len() as u64 * dst + src / 2) / src) as usize;
    let step = src as f64 / dst as f64;
    let cutoff = (dst as f64 / src as f64).min(1.0);
    let half_width = SINC_ZEROS / cutoff;
    let input = a.samples();
    let n_in = input.len() as isize;

    let out: Vec<f32> = (0..out_len)
        .map(|n| {
            let center = n as f64 * step;
            let lo = (center - half_width).ceil().max(0.0) as isize;
            let hi = ((center + half_width).floor() as isize).min(n_in - 1);
            let mut acc = 0.0f64;
            for k in lo..=hi {
                let x = center - k as f64;
                acc += input[k as usize] as f64 * cutoff * sinc(cutoff * x) * blackman(x / half_width);
            }
            acc as f32
        })
        .collect();
    AudioBuffer::new(out, target_rate)
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// Blackman window over `u` in `[-1, 1]`, zero outside.
fn blackman(u: f64) -> f64 {
    if u.abs() > 1.0 {
        return 0.0;
    }
    let t = PI * (u + 1.0);
    0.42 - 0.5 * t.cos() + 0.08 * (2.0 * t).cos()
}
