mod common;

use afe_core::encoder::gelu;
use afe_core::{
    align, encode_reference, export_embeddings, frame_center, import_embeddings, log_mel_spectrogram,
    normalize_log_mel, window_count, AlignConfig, AlignedFeatureTensor, AudioBuffer, EmbeddingMatrix, MelConfig,
    MelSpectrogram, Provenance, ReferenceEncoderParams, TensorFile,
};
use proptest::prelude::*;
use rand::Rng;

fn hand_projection(pair: &[f32], p: &ReferenceEncoderParams) -> Vec<f32> {
    let mut out = Vec::with_capacity(p.dim);
    for c in 0..p.dim {
        let mut s = 0.0f64;
        for (i, &x) in pair.iter().enumerate() {
            s += x as f64 * p.proj[i * p.dim + c] as f64;
        }
        let g = 0.5 * s * (1.0 + libm::erf(s / 2f64.sqrt()));
        out.push(g as f32);
    }
    out
}

#[test]
fn silent_spectrogram_rows_match_hand_projection() {
    let silence = AudioBuffer::new(vec![0.0; 8000], 16000).unwrap();
    let m = normalize_log_mel(&log_mel_spectrogram(&silence, &MelConfig::default()).unwrap());
    assert!(m.values().iter().all(|&v| v == -1.5));
    let p = ReferenceEncoderParams::whisper_tiny(3);
    let e = encode_reference(&m, &p).unwrap();
    assert_eq!(e.shape(), (25, 384));
    let expected = hand_projection(&vec![-1.5f32; 160], &p);
    for t in 0..e.n_rows() {
        assert_eq!(e.row(t), e.row(0));
        for (a, b) in e.row(t).iter().zip(&expected) {
            assert!((a - b).abs() <= 1e-5 * b.abs().max(1.0));
        }
    }
}

#[test]
fn zero_spectrogram_gives_zero_embeddings() {
    let m = MelSpectrogram::from_raw(vec![0.0; 7 * 80], 7, MelConfig::default(), true).unwrap();
    let e = encode_reference(&m, &ReferenceEncoderParams::whisper_tiny(0)).unwrap();
    assert_eq!(e.shape(), (4, 384));
    assert!(e.values().iter().all(|&v| v == 0.0));
}

#[test]
fn odd_tail_pairs_with_zero_frame() {
    let mut r = common::rng(8);
    let vals: Vec<f32> = (0..3 * 80).map(|_| r.random_range(-1.0..1.0)).collect();
    let m = MelSpectrogram::from_raw(vals.clone(), 3, MelConfig::default(), true).unwrap();
    let p = ReferenceEncoderParams::whisper_tiny(1);
    let e = encode_reference(&m, &p).unwrap();
    let mut tail = vals[160..240].to_vec();
    tail.extend(vec![0.0f32; 80]);
    for (a, b) in e.row(1).iter().zip(hand_projection(&tail, &p)) {
        assert!((a - b).abs() <= 1e-5 * b.abs().max(1.0));
    }
}

#[test]
fn gelu_disabled_is_linear() {
    let m = MelSpectrogram::from_raw(vec![0.5; 160], 2, MelConfig::default(), true).unwrap();
    let mut p = ReferenceEncoderParams::whisper_tiny(4);
    p.gelu_enabled = false;
    let e = encode_reference(&m, &p).unwrap();
    assert!(e.values().iter().any(|&v| v < 0.0));
    assert!(gelu(-3.0) > -0.01);
}

#[test]
fn import_declared_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("e.tensor");
    let e = EmbeddingMatrix::new(vec![0.25; 1500 * 384], 1500, 384, 50.0, Provenance::Reference).unwrap();
    export_embeddings(&e, &path).unwrap();
    let back = import_embeddings(&path).unwrap();
    assert_eq!(back.shape(), (1500, 384));
    assert_eq!(back.enc_frame_rate_hz(), 50.0);
    assert_eq!(back.provenance(), Provenance::Imported);
    let header_line = std::fs::read(&path).unwrap();
    let nl = header_line.iter().position(|&b| b == b'\n').unwrap();
    let header: serde_json::Value = serde_json::from_slice(&header_line[..nl]).unwrap();
    assert_eq!(header["kind"], "emb");
    assert_eq!(header["rate_hz"], 50.0);
    assert_eq!(header["dim"], 384);
}

#[test]
fn import_of_non_matrix_is_shape_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.tensor");
    std::fs::write(
        &path,
        b"{\"shape\":[10],\"dtype\":\"f32\",\"kind\":\"emb\",\"rate_hz\":50.0}\n"
            .iter()
            .chain([0u8; 40].iter())
            .cloned()
            .collect::<Vec<u8>>(),
    )
    .unwrap();
    assert!(matches!(import_embeddings(&path), Err(afe_core::Error::Shape(_))));
}

#[test]
fn window_count_matches_enumeration_on_small_cases() {
    assert_eq!(
        window_count(10, &AlignConfig::default()).unwrap(),
        common::enumerate_windows(10, 16, 2, 7)
    );
    assert_eq!(common::enumerate_windows(1500, 16, 2, 7), 750);
}

#[test]
fn gather_matches_padded_oracle() {
    let mut r = common::rng(21);
    for _ in 0..10 {
        let rows: Vec<Vec<f32>> = (0..40)
            .map(|_| (0..8).map(|_| r.random_range(-1.0..1.0)).collect())
            .collect();
        let e = EmbeddingMatrix::new(rows.concat(), 40, 8, 50.0, Provenance::Reference).unwrap();
        let a = align(&e, &AlignConfig::default()).unwrap();
        let oracle = common::gather_windows(&rows, 16, 2, 7);
        assert_eq!(a.shape(), (oracle.len(), 16, 8));
        for (i, win) in oracle.iter().enumerate() {
            for (j, row) in win.iter().enumerate() {
                assert_eq!(a.slot(i, j), &row[..]);
            }
        }
    }
}

#[test]
fn whole_second_durations_give_25_frames_per_second() {
    let p = ReferenceEncoderParams::whisper_tiny(0);
    for d in 1..=4usize {
        let a = AudioBuffer::new(vec![0.05; d * 16000], 16000).unwrap();
        let m = normalize_log_mel(&log_mel_spectrogram(&a, &MelConfig::default()).unwrap());
        let e = encode_reference(&m, &p).unwrap();
        let al = align(&e, &AlignConfig::default()).unwrap();
        assert_eq!(al.n_frames(), 25 * d);
    }
}

#[test]
fn centers_stay_inside_the_sequence() {
    let cfg = AlignConfig::default();
    for i in 0..750 {
        let c = frame_center(i, &cfg, 1500).unwrap();
        assert!((0.0..=1499.0).contains(&c));
        assert_eq!(c, 2.0 * i as f64 + 0.5);
    }
}

fn random_embedding(rows: usize, dim: usize, seed: u64) -> EmbeddingMatrix {
    let mut r = common::rng(seed);
    let data = (0..rows * dim).map(|_| r.random_range(-2.0f32..2.0)).collect();
    EmbeddingMatrix::new(data, rows, dim, 50.0, Provenance::Reference).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn downsample_law(n_frames in 1usize..300) {
        let m = MelSpectrogram::from_raw(vec![0.1; n_frames * 80], n_frames, MelConfig::default(), true).unwrap();
        let e = encode_reference(&m, &ReferenceEncoderParams::new(0, 80, 16)).unwrap();
        prop_assert_eq!(e.n_rows(), n_frames.div_ceil(2));
    }

    #[test]
    fn embedding_round_trip_is_bit_exact(rows in 1usize..60, dim in 1usize..40, seed in any::<u64>()) {
        let e = random_embedding(rows, dim, seed);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.tensor");
        export_embeddings(&e, &path).unwrap();
        let back = import_embeddings(&path).unwrap();
        let header = TensorFile::load(&path).unwrap().header;
        prop_assert_eq!(header.shape, vec![rows, dim]);
        let bits = |m: &EmbeddingMatrix| m.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&back), bits(&e));
    }

    #[test]
    fn padding_neutrality(t_enc in 16usize..80, seed in any::<u64>()) {
        let e = EmbeddingMatrix::new(
            random_embedding(t_enc, 4, seed).values().iter().map(|v| v.abs() + 0.5).collect(),
            t_enc, 4, 50.0, Provenance::Reference,
        ).unwrap();
        let cfg = AlignConfig::default();
        let a = align(&e, &cfg).unwrap();
        for i in 0..a.n_frames() {
            let start = i * cfg.stride;
            let inside = start >= cfg.padding && start + cfg.window <= cfg.padding + t_enc;
            if inside {
                for j in 0..cfg.window {
                    prop_assert!(a.slot(i, j).iter().all(|&v| v != 0.0));
                }
            }
        }
    }

    #[test]
    fn permuting_rows_permutes_window_cells(t_enc in 2usize..60, a_idx in 0usize..60, b_idx in 0usize..60, seed in any::<u64>()) {
        let (a_idx, b_idx) = (a_idx % t_enc, b_idx % t_enc);
        let e = random_embedding(t_enc, 3, seed);
        let mut swapped: Vec<Vec<f32>> = (0..t_enc).map(|i| e.row(i).to_vec()).collect();
        swapped.swap(a_idx, b_idx);
        let e2 = EmbeddingMatrix::new(swapped.concat(), t_enc, 3, 50.0, Provenance::Reference).unwrap();
        let cfg = AlignConfig { window: 4, stride: 2, padding: 1, video_fps: 25.0 };
        let (x, y) = (align(&e, &cfg).unwrap(), align(&e2, &cfg).unwrap());
        for i in 0..x.n_frames() {
            for j in 0..cfg.window {
                let src = (i * cfg.stride + j) as isize - cfg.padding as isize;
                let mapped = if src == a_idx as isize { b_idx as isize } else if src == b_idx as isize { a_idx as isize } else { src };
                if mapped >= 0 && (mapped as usize) < t_enc {
                    prop_assert_eq!(y.slot(i, j), e.row(mapped as usize));
                }
                if src == mapped {
                    prop_assert_eq!(x.slot(i, j), y.slot(i, j));
                }
            }
        }
    }

    #[test]
    fn aligned_round_trip(t_enc in 1usize..40, dim in 1usize..10, seed in any::<u64>()) {
        let e = random_embedding(t_enc, dim, seed);
        let a = align(&e, &AlignConfig { window: 1, stride: 2, padding: 0, video_fps: 25.0 }).unwrap();
        let mut buf = Vec::new();
        a.to_tensor().write_to(&mut buf).unwrap();
        let back = AlignedFeatureTensor::from_tensor(TensorFile::read_from(&buf[..]).unwrap()).unwrap();
        prop_assert_eq!(back.values(), a.values());
        prop_assert_eq!(back.shape(), a.shape());
    }
}
