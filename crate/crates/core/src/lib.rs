//! Audio feature extraction, audio-to-video alignment, talking-head quality
//! metrics and staged-pipeline latency analysis.
//!
//! The processing chain mirrors a Whisper-tiny front end:
//!
//! ```text
//! wav -> AudioBuffer -> (resample 16 kHz) -> log-mel (100 Hz, 80 bins)
//!     -> normalize -> encoder (50 Hz, 384 dims) -> sliding windows (25 FPS)
//! ```
//!
//! Quality metrics live in [`metrics`] and the latency harness in [`harness`].

pub mod aligner;
pub mod audio;
pub mod encoder;
pub mod error;
pub mod harness;
pub mod mel;
pub mod metrics;
pub mod tensor;

pub use aligner::{align, frame_center, window_count, AlignConfig, AlignedFeatureTensor};
pub use audio::{decode_wav, load_wav, resample, AudioBuffer};
pub use encoder::{
    encode_reference, export_embeddings, import_embeddings, EmbeddingMatrix, Provenance, ReferenceEncoderParams,
    DEFAULT_EMBED_DIM,
};
pub use error::{Error, Result};
pub use harness::{
    bench_afe, replay_report, run_pipeline, split_dataset, BenchCurve, Payload, PipelineReport, Stage, StageKind,
    StageTiming,
};
pub use mel::{log_mel_spectrogram, normalize_log_mel, MelConfig, MelSpectrogram};
pub use tensor::{TensorFile, TensorHeader, TensorKind};
