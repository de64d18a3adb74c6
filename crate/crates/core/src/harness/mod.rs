//! Latency analysis for the staged avatar pipeline.
//!
//! Stages run strictly one after another, each timed with a monotonic clock.
//! Components that cannot run here (speech-to-text, language model, speech
//! synthesis, rendering) are modelled by fixed or seeded log-normal mock
//! delays, or by replaying recorded durations.

mod bench;
mod report;
mod split;
mod stage;

pub use bench::{bench_afe, synth_audio, AfeBackend, BenchCurve, BenchPoint, ReferenceBackend};
pub use report::{read_replay_csv, replay_report, PipelineReport, StageTiming};
pub use split::split_dataset;
pub use stage::{
    mock_pipeline, run_pipeline, MockLatency, Payload, PipelineOptions, Stage, StageKind, StageName, Table3Row,
    TABLE3_ROWS,
};
