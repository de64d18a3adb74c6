//! Fixtures shared by the criterion benches.

use afe_core::harness::synth_audio;
use afe_core::metrics::ImageFrame;
use afe_core::{
    encode_reference, log_mel_spectrogram, normalize_log_mel, AudioBuffer, EmbeddingMatrix, MelConfig, MelSpectrogram,
    ReferenceEncoderParams,
};

pub fn noise(seconds: f64) -> AudioBuffer {
    synth_audio(seconds, 16000, 42).expect("valid duration")
}

pub fn normalized_mel(seconds: f64) -> MelSpectrogram {
    let m = log_mel_spectrogram(&noise(seconds), &MelConfig::default()).expect("16 kHz input");
    normalize_log_mel(&m)
}

pub fn embeddings(seconds: f64) -> EmbeddingMatrix {
    encode_reference(&normalized_mel(seconds), &ReferenceEncoderParams::whisper_tiny(0)).expect("80 bins")
}

/// Deterministic 8-bit grayscale test pattern.
pub fn pattern(h: usize, w: usize, phase: usize) -> ImageFrame {
    let px: Vec<u8> = (0..h * w)
        .map(|i| ((i * 31 + phase * 17 + (i / w) * 7) % 256) as u8)
        .collect();
    ImageFrame::from_u8(&px, h, w, 1).expect("valid geometry")
}
