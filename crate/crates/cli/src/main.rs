use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use afe_core::harness::{
    bench_afe, mock_pipeline, read_replay_csv, MockLatency, PipelineOptions, ReferenceBackend, TABLE3_ROWS,
};
use afe_core::metrics::suite::SuiteOptions;
use afe_core::metrics::{evaluate_suite, Manifest, Metric};
use afe_core::{
    align, encode_reference, load_wav, log_mel_spectrogram, normalize_log_mel, replay_report, resample, run_pipeline,
    split_dataset, AlignConfig, EmbeddingMatrix, Error, MelConfig, MelSpectrogram, Payload, ReferenceEncoderParams,
    TensorFile, DEFAULT_EMBED_DIM,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "afe",
    version,
    about = "Audio feature extraction, alignment and evaluation toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a normalized log-mel spectrogram from a WAV file.
    Extract(ExtractArgs),
    /// Align audio or imported embeddings to video frames.
    Align(AlignArgs),
    /// Score predicted frames against ground truth.
    Eval(EvalArgs),
    /// Timing benchmarks and report replay.
    Bench {
        #[command(subcommand)]
        mode: BenchMode,
    },
    /// Split a frame sequence into train and eval ranges.
    Split(SplitArgs),
}

#[derive(Args, Clone)]
struct MelArgs {
    #[arg(long, default_value_t = 16000)]
    sample_rate: u32,
    #[arg(long, default_value_t = 25.0)]
    window_ms: f64,
    #[arg(long, default_value_t = 10.0)]
    hop_ms: f64,
    #[arg(long, default_value_t = 80)]
    n_mels: usize,
    #[arg(long, default_value_t = 0.0)]
    fmin: f64,
    #[arg(long, default_value_t = 8000.0)]
    fmax: f64,
}

impl MelArgs {
    fn config(&self) -> MelConfig {
        MelConfig::from_ms(
            self.sample_rate,
            self.window_ms,
            self.hop_ms,
            self.n_mels,
            self.fmin,
            self.fmax,
        )
    }
}

#[derive(Args)]
struct ExtractArgs {
    audio: PathBuf,
    #[command(flatten)]
    mel: MelArgs,
    /// Keep raw log10 power instead of the normalized scale.
    #[arg(long)]
    raw: bool,
    /// Output tensor file, or `-` for standard output.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct AlignArgs {
    /// WAV audio or an embedding tensor file.
    input: PathBuf,
    #[command(flatten)]
    mel: MelArgs,
    #[arg(long, default_value_t = 16)]
    window: usize,
    #[arg(long, default_value_t = 2)]
    stride: usize,
    #[arg(long, default_value_t = 7)]
    padding: usize,
    #[arg(long, default_value_t = 25.0)]
    fps: f64,
    /// Derive the stride from the encoder rate instead of rejecting a mismatch.
    #[arg(long)]
    stride_from_rate: bool,
    /// Seed of the reference encoder projection.
    #[arg(long, env = "AFE_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_EMBED_DIM)]
    dim: usize,
    /// Also write the encoder embeddings here (audio input only).
    #[arg(long)]
    emb_out: Option<PathBuf>,
    /// Output tensor file, or `-` for standard output.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; standard output when omitted or `-`.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    pred: PathBuf,
    truth: PathBuf,
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Comma-separated subset, e.g. `psnr,ssim`.
    #[arg(long, value_delimiter = ',')]
    metrics: Option<Vec<Metric>>,
    #[arg(long)]
    per_frame: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum MockSource {
    Table3,
}

#[derive(Clone, Copy, ValueEnum)]
enum Latency {
    Fixed,
    Lognormal,
}

#[derive(Subcommand)]
enum BenchMode {
    /// Time the reference extraction chain over several audio lengths.
    Afe {
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,30")]
        durations: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        #[arg(long, env = "AFE_SEED", default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the stage pipeline with mock latencies.
    Pipeline {
        #[arg(long, value_enum, default_value_t = MockSource::Table3)]
        mock: MockSource,
        /// Answer length in tokens selecting the recorded row.
        #[arg(long, default_value_t = 1)]
        tokens: usize,
        #[arg(long, value_enum, default_value_t = Latency::Fixed)]
        latency: Latency,
        #[arg(long, default_value_t = 0.25)]
        sigma: f64,
        #[arg(long, env = "AFE_SEED", default_value_t = 0)]
        seed: u64,
        /// Multiplier on mock delays.
        #[arg(long, default_value_t = 1.0)]
        time_scale: f64,
        /// Run the reference AFE chain instead of a mock.
        #[arg(long)]
        real_afe: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Recompute the percentage breakdown from recorded stage times.
    Replay {
        /// `stage,seconds` CSV.
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value_t = 0)]
        tokens: usize,
        #[arg(long, default_value_t = 0.0)]
        duration: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct SplitArgs {
    n: usize,
    #[arg(long, default_value_t = 0.91)]
    fraction: f64,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) | Error::Format(_) | Error::Unsupported(_) | Error::InvalidArgument(_) => 2,
        Error::Manifest(_) => 4,
        _ => 3,
    }
}

fn is_stdout(p: &Path) -> bool {
    p.as_os_str() == "-"
}

fn sink(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) if !is_stdout(p) => Box::new(BufWriter::new(File::create(p)?)),
        _ => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Shape messages go to stderr when stdout carries tensor bytes.
fn announce(out: &Path, msg: &str) {
    if is_stdout(out) {
        eprintln!("{msg}");
    } else {
        println!("{msg}");
    }
}

fn write_tensor(t: &TensorFile, out: &Path) -> afe_core::Result<()> {
    let mut w = sink(Some(out))?;
    t.write_to(&mut w)?;
    w.flush()?;
    Ok(())
}

fn write_json(v: &serde_json::Value, out: Option<&Path>) -> afe_core::Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn mel_from_wav(path: &Path, cfg: &MelConfig, normalize: bool) -> afe_core::Result<MelSpectrogram> {
    cfg.validate()?;
    let audio = resample(&load_wav(path)?, cfg.sample_rate)?;
    let mel = log_mel_spectrogram(&audio, cfg)?;
    Ok(if normalize { normalize_log_mel(&mel) } else { mel })
}

fn is_wav(path: &Path) -> io::Result<bool> {
    let mut magic = [0u8; 4];
    let n = File::open(path)?.read(&mut magic)?;
    Ok(n == 4 && &magic == b"RIFF")
}

fn extract(a: ExtractArgs) -> afe_core::Result<()> {
    let mel = mel_from_wav(&a.audio, &a.mel.config(), !a.raw)?;
    write_tensor(&mel.to_tensor(), &a.out)?;
    let (t, m) = mel.shape();
    announce(&a.out, &format!("mel shape {t}×{m} @{}Hz", mel.frame_rate_hz()));
    Ok(())
}

fn align_cmd(a: AlignArgs) -> afe_core::Result<()> {
    let emb = if is_wav(&a.input)? {
        let mel_cfg = a.mel.config();
        let mel = mel_from_wav(&a.input, &mel_cfg, true)?;
        let e = encode_reference(&mel, &ReferenceEncoderParams::new(a.seed, mel_cfg.n_mels, a.dim))?;
        if let Some(p) = &a.emb_out {
            write_tensor(&e.to_tensor(), p)?;
        }
        e
    } else {
        EmbeddingMatrix::from_tensor(TensorFile::load(&a.input)?)?
    };
    let mut cfg = AlignConfig {
        window: a.window,
        stride: a.stride,
        padding: a.padding,
        video_fps: a.fps,
    };
    if a.stride_from_rate {
        cfg = cfg.with_stride_for_rate(emb.enc_frame_rate_hz())?;
    }
    let aligned = align(&emb, &cfg)?;
    write_tensor(&aligned.to_tensor(), &a.out)?;
    let (n, w, d) = aligned.shape();
    announce(&a.out, &format!("aligned shape {n}×{w}×{d}"));
    Ok(())
}

fn eval(a: EvalArgs) -> afe_core::Result<()> {
    let manifest = match &a.manifest {
        Some(p) => Manifest::load(p)?,
        None => Manifest::default(),
    };
    let opts = SuiteOptions {
        metrics: a.metrics,
        per_frame: a.per_frame,
        ..Default::default()
    };
    let report = evaluate_suite(&a.pred, &a.truth, &manifest, &opts)?;
    match a.output.format {
        Format::Json => write_json(&report.to_json(), a.output.out.as_deref()),
        Format::Csv => {
            let mut w = sink(a.output.out.as_deref())?;
            report.write_csv(&mut w)
        }
    }
}

fn bench(mode: BenchMode) -> afe_core::Result<()> {
    match mode {
        BenchMode::Afe {
            durations,
            repeats,
            seed,
            output,
        } => {
            let curve = bench_afe(&ReferenceBackend::new(seed), &durations, repeats, seed)?;
            match output.format {
                Format::Json => write_json(&curve.to_json(), output.out.as_deref()),
                Format::Csv => curve.write_csv(sink(output.out.as_deref())?),
            }
        }
        BenchMode::Pipeline {
            mock: MockSource::Table3,
            tokens,
            latency,
            sigma,
            seed,
            time_scale,
            real_afe,
            output,
        } => {
            let row = TABLE3_ROWS.iter().find(|r| r.tokens == tokens).ok_or_else(|| {
                let known: Vec<String> = TABLE3_ROWS.iter().map(|r| r.tokens.to_string()).collect();
                Error::InvalidArgument(format!(
                    "no recorded row for {tokens} tokens (have {})",
                    known.join(", ")
                ))
            })?;
            let lat = match latency {
                Latency::Fixed => MockLatency::Fixed,
                Latency::Lognormal => MockLatency::LogNormal { sigma, seed },
            };
            let mut stages = mock_pipeline(row, lat, real_afe)?;
            let opts = PipelineOptions {
                answer_tokens: row.tokens,
                answer_duration_s: row.duration_s,
                time_scale,
                ..Default::default()
            };
            let report = run_pipeline(&mut stages, Payload::Empty, &opts)?;
            match output.format {
                Format::Json => write_json(&report.to_json(), output.out.as_deref()),
                Format::Csv => report.write_csv(sink(output.out.as_deref())?),
            }
        }
        BenchMode::Replay {
            csv,
            tokens,
            duration,
            output,
        } => {
            let durations = read_replay_csv(File::open(&csv)?)?;
            let report = replay_report(&durations, tokens, duration)?;
            match output.format {
                Format::Json => write_json(&report.to_json(), output.out.as_deref()),
                Format::Csv => report.write_csv(sink(output.out.as_deref())?),
            }
        }
    }
}

fn split(a: SplitArgs) -> afe_core::Result<()> {
    let (train, eval) = split_dataset(a.n, a.fraction)?;
    println!(
        r#"{{"train":[{},{}],"eval":[{},{}]}}"#,
        train.start, train.end, eval.start, eval.end
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Extract(a) => extract(a),
        Command::Align(a) => align_cmd(a),
        Command::Eval(a) => eval(a),
        Command::Bench { mode } => bench(mode),
        Command::Split(a) => split(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
