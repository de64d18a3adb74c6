use std::collections::HashSet;
use std::fmt;
use std::thread;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use super::bench::synth_audio;
use super::report::PipelineReport;
use crate::aligner::{align, AlignConfig, AlignedFeatureTensor};
use crate::audio::{resample, AudioBuffer};
use crate::encoder::{encode_reference, EmbeddingMatrix, ReferenceEncoderParams};
use crate::error::{Error, Result};
use crate::mel::{log_mel_spectrogram, normalize_log_mel, MelConfig, MelSpectrogram};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StageName {
    Listening,
    Stt,
    Language,
    Tts,
    Afe,
    FrameRendering,
    AudioOverlay,
    Custom(String),
}

impl fmt::Display for StageName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StageName::Listening => "Listening",
            StageName::Stt => "STT",
            StageName::Language => "Language",
            StageName::Tts => "TTS",
            StageName::Afe => "AFE",
            StageName::FrameRendering => "FrameRendering",
            StageName::AudioOverlay => "AudioOverlay",
            StageName::Custom(s) => s,
        })
    }
}

/// Data handed from one stage to the next.
#[derive(Debug, Clone, Default)]
pub enum Payload {
    #[default]
    Empty,
    Audio(AudioBuffer),
    Text(String),
    Mel(MelSpectrogram),
    Embeddings(EmbeddingMatrix),
    Aligned(AlignedFeatureTensor),
    Frames(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum StageKind {
    Real,
    MockFixed(Duration),
    /// Seeded log-normal delay with the given median (seconds) and log-space sigma.
    MockDistribution {
        median_s: f64,
        sigma: f64,
        seed: u64,
    },
    /// Reports a recorded duration without waiting.
    Replay(Duration),
}

type Executor = Box<dyn FnMut(Payload) -> std::result::Result<Payload, String> + Send>;

pub struct Stage {
    pub name: StageName,
    pub kind: StageKind,
    executor: Executor,
    delay: Option<(LogNormal<f64>, ChaCha8Rng)>,
}

impl fmt::Debug for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Stage")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .finish_non_exhaustive()
    }
}

impl Stage {
    pub fn real<F>(name: StageName, f: F) -> Self
    where
        F: FnMut(Payload) -> std::result::Result<Payload, String> + Send + 'static,
    {
        Self {
            name,
            kind: StageKind::Real,
            executor: Box::new(f),
            delay: None,
        }
    }

    pub fn mock_fixed(name: StageName, seconds: f64) -> Self {
        Self {
            name,
            kind: StageKind::MockFixed(Duration::from_secs_f64(seconds)),
            executor: Box::new(Ok),
            delay: None,
        }
    }

    pub fn mock_lognormal(name: StageName, median_s: f64, sigma: f64, seed: u64) -> Result<Self> {
        if median_s.is_nan() || median_s <= 0.0 || sigma.is_nan() || sigma < 0.0 {
            return Err(Error::Contract(format!(
                "log-normal delay needs median > 0 and sigma >= 0, got {median_s}, {sigma}"
            )));
        }
        let dist = LogNormal::new(median_s.ln(), sigma).map_err(|e| Error::Contract(e.to_string()))?;
        Ok(Self {
            name,
            kind: StageKind::MockDistribution { median_s, sigma, seed },
            executor: Box::new(Ok),
            delay: Some((dist, ChaCha8Rng::seed_from_u64(seed))),
        })
    }

    pub fn replay(name: StageName, seconds: f64) -> Self {
        Self {
            name,
            kind: StageKind::Replay(Duration::from_secs_f64(seconds)),
            executor: Box::new(Ok),
            delay: None,
        }
    }

    /// Replaces the pass-through executor of a mock or replay stage.
    pub fn with_executor<F>(mut self, f: F) -> Self
    where
        F: FnMut(Payload) -> std::result::Result<Payload, String> + Send + 'static,
    {
        self.executor = Box::new(f);
        self
    }

    /// Executes the stage and returns its output and measured (or recorded) seconds.
    fn execute(&mut self, input: Payload, time_scale: f64) -> (std::result::Result<Payload, String>, f64) {
        if let StageKind::Replay(d) = self.kind {
            return ((self.executor)(input), d.as_secs_f64());
        }
        let wait = match (&self.kind, &mut self.delay) {
            (StageKind::MockFixed(d), _) => Some(d.as_secs_f64()),
            (StageKind::MockDistribution { .. }, Some((dist, rng))) => Some(dist.sample(rng)),
            _ => None,
        };
        let start = Instant::now();
        if let Some(secs) = wait {
            thread::sleep(Duration::from_secs_f64(secs * time_scale));
        }
        let out = (self.executor)(input);
        (out, start.elapsed().as_secs_f64())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOptions {
    /// Listening depends on how long the user talks and is left out of
    /// reports unless this is set. The stage still runs.
    pub include_listening: bool,
    pub answer_tokens: usize,
    pub answer_duration_s: f64,
    /// Multiplier applied to mock delays.
    pub time_scale: f64,
    /// Scheduler jitter expected on a mock stage, in seconds.
    pub jitter_bound_s: f64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            include_listening: false,
            answer_tokens: 0,
            answer_duration_s: 0.0,
            time_scale: 1.0,
            jitter_bound_s: 0.05,
        }
    }
}

/// Runs stages in order, threading the payload through and timing each body.
pub fn run_pipeline(stages: &mut [Stage], input: Payload, opts: &PipelineOptions) -> Result<PipelineReport> {
    if stages.is_empty() {
        return Err(Error::Contract("pipeline has no stages".into()));
    }
    let mut seen = HashSet::new();
    for s in stages.iter() {
        if !seen.insert(s.name.to_string()) {
            return Err(Error::Contract(format!("duplicate stage name '{}'", s.name)));
        }
    }
    let mut payload = input;
    let mut recorded: Vec<(String, f64)> = Vec::with_capacity(stages.len());
    for stage in stages.iter_mut() {
        let (out, secs) = stage.execute(payload, opts.time_scale);
        let counted = opts.include_listening || stage.name != StageName::Listening;
        match out {
            Ok(next) => {
                if counted {
                    recorded.push((stage.name.to_string(), secs));
                }
                payload = next;
            }
            Err(message) => {
                return Err(Error::StageFailed {
                    stage: stage.name.to_string(),
                    message,
                    partial: Box::new(PipelineReport::from_durations(
                        &recorded,
                        opts.answer_tokens,
                        opts.answer_duration_s,
                    )),
                });
            }
        }
    }
    if recorded.is_empty() {
        return Err(Error::Contract("every stage was excluded from the report".into()));
    }
    Ok(PipelineReport::from_durations(
        &recorded,
        opts.answer_tokens,
        opts.answer_duration_s,
    ))
}

/// One row of recorded per-stage execution times (seconds) for an answer of
/// `tokens` tokens lasting `duration_s` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table3Row {
    pub tokens: usize,
    pub duration_s: f64,
    pub stt: f64,
    pub language: f64,
    pub tts: f64,
    pub afe: f64,
    pub rendering: f64,
    pub overlay: f64,
}

impl Table3Row {
    pub fn durations(&self) -> Vec<(String, f64)> {
        [
            (StageName::Stt, self.stt),
            (StageName::Language, self.language),
            (StageName::Tts, self.tts),
            (StageName::Afe, self.afe),
            (StageName::FrameRendering, self.rendering),
            (StageName::AudioOverlay, self.overlay),
        ]
        .into_iter()
        .map(|(n, d)| (n.to_string(), d))
        .collect()
    }
}

const fn row(tokens: usize, duration_s: f64, t: [f64; 6]) -> Table3Row {
    Table3Row {
        tokens,
        duration_s,
        stt: t[0],
        language: t[1],
        tts: t[2],
        afe: t[3],
        rendering: t[4],
        overlay: t[5],
    }
}

/// Recorded component timings of the reference avatar system, one row per
/// answer length.
pub const TABLE3_ROWS: [Table3Row; 7] = [
    row(1, 0.41, [0.06, 0.80, 0.22, 0.29, 4.05, 0.14]),
    row(8, 1.69, [0.07, 0.96, 0.33, 0.28, 4.75, 0.16]),
    row(14, 3.63, [0.07, 2.45, 0.44, 0.28, 5.45, 0.14]),
    row(21, 5.08, [0.10, 2.27, 0.44, 0.28, 5.88, 0.17]),
    row(30, 6.55, [0.06, 2.76, 0.49, 0.27, 6.58, 0.15]),
    row(39, 9.55, [0.09, 1.95, 0.78, 0.28, 7.52, 0.18]),
    row(50, 12.16, [0.07, 2.08, 0.55, 0.28, 8.65, 0.18]),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MockLatency {
    Fixed,
    LogNormal { sigma: f64, seed: u64 },
}

/// STT through Audio Overlay as mock stages sized from `row`.
///
/// With `real_afe`, the TTS mock emits deterministic audio of the answer's
/// length and AFE runs the reference extraction chain on it.
pub fn mock_pipeline(row: &Table3Row, latency: MockLatency, real_afe: bool) -> Result<Vec<Stage>> {
    let mut stages = Vec::with_capacity(6);
    for (i, (name, secs)) in [
        (StageName::Stt, row.stt),
        (StageName::Language, row.language),
        (StageName::Tts, row.tts),
        (StageName::Afe, row.afe),
        (StageName::FrameRendering, row.rendering),
        (StageName::AudioOverlay, row.overlay),
    ]
    .into_iter()
    .enumerate()
    {
        if real_afe && name == StageName::Afe {
            stages.push(afe_stage(
                ReferenceEncoderParams::whisper_tiny(0),
                MelConfig::default(),
                AlignConfig::default(),
            ));
            continue;
        }
        let mut stage = match latency {
            MockLatency::Fixed => Stage::mock_fixed(name.clone(), secs),
            MockLatency::LogNormal { sigma, seed } => {
                Stage::mock_lognormal(name.clone(), secs, sigma, seed.wrapping_add(i as u64))?
            }
        };
        if real_afe && name == StageName::Tts {
            let secs = row.duration_s;
            stage = stage.with_executor(move |_| {
                synth_audio(secs, 16000, 0)
                    .map(Payload::Audio)
                    .map_err(|e| e.to_string())
            });
        }
        stages.push(stage);
    }
    Ok(stages)
}

/// Real AFE stage: audio in, aligned features out.
pub fn afe_stage(params: ReferenceEncoderParams, mel: MelConfig, cfg: AlignConfig) -> Stage {
    Stage::real(StageName::Afe, move |p| {
        let Payload::Audio(a) = p else {
            return Err("AFE stage expects audio".to_string());
        };
        let run = || -> Result<AlignedFeatureTensor> {
            let a = resample(&a, mel.sample_rate)?;
            let m = normalize_log_mel(&log_mel_spectrogram(&a, &mel)?);
            align(&encode_reference(&m, &params)?, &cfg)
        };
        run().map(Payload::Aligned).map_err(|e| e.to_string())
    })
}
