//! Small on-disk evaluation corpora.

use std::fs;
use std::path::Path;

use afe_core::metrics::ImageFrame;
use afe_core::{TensorFile, TensorHeader, TensorKind};
use rand::Rng;

pub const AUS: [u32; 9] = [10, 12, 14, 15, 17, 20, 23, 25, 26];

pub struct SideData {
    pub frames: Vec<ImageFrame>,
    pub landmarks: Vec<Vec<(f64, f64)>>,
    pub aus: Vec<Vec<f64>>,
    pub fid: Vec<Vec<f64>>,
}

pub fn random_side_data(seed: u64, n_frames: usize) -> SideData {
    let mut r = super::rng(seed);
    SideData {
        frames: (0..n_frames)
            .map(|_| ImageFrame::from_u8(&super::random_u8_image(&mut r, 16 * 16), 16, 16, 1).unwrap())
            .collect(),
        landmarks: (0..n_frames)
            .map(|_| {
                (0..5)
                    .map(|_| (r.random_range(0.0..16.0), r.random_range(0.0..16.0)))
                    .collect()
            })
            .collect(),
        aus: (0..n_frames).map(|_| super::random_vec(&mut r, 9, 0.0, 5.0)).collect(),
        fid: (0..24).map(|_| super::random_vec(&mut r, 4, -1.0, 1.0)).collect(),
    }
}

fn feat(rows: &[Vec<f64>]) -> TensorFile {
    let d = rows[0].len();
    let data = rows.iter().flatten().map(|&v| v as f32).collect();
    TensorFile::new(TensorHeader::new(TensorKind::Feat, vec![rows.len(), d]), data).unwrap()
}

pub fn write_side_data(dir: &Path, s: &SideData) {
    fs::create_dir_all(dir).unwrap();
    for (i, f) in s.frames.iter().enumerate() {
        f.write_pnm(fs::File::create(dir.join(format!("{i:03}.pgm"))).unwrap())
            .unwrap();
    }
    let mut lm = String::from("frame_index,point_index,x,y\n");
    for (i, pts) in s.landmarks.iter().enumerate() {
        for (j, (x, y)) in pts.iter().enumerate() {
            lm.push_str(&format!("{i},{j},{x},{y}\n"));
        }
    }
    fs::write(dir.join("landmarks.csv"), lm).unwrap();
    let mut au = String::from("frame_index,au_id,intensity\n");
    for (i, v) in s.aus.iter().enumerate() {
        for (id, x) in AUS.iter().zip(v) {
            au.push_str(&format!("{i},AU{id},{x}\n"));
        }
    }
    fs::write(dir.join("aus.csv"), au).unwrap();
    feat(&s.fid).save(dir.join("fid.feat")).unwrap();
}

pub fn write_sync(dir: &Path, video: &[Vec<f64>], audio: &[Vec<f64>]) {
    feat(video).save(dir.join("sync_video.feat")).unwrap();
    feat(audio).save(dir.join("sync_audio.feat")).unwrap();
}

pub const MANIFEST: &str = r#"{
  "landmarks": "landmarks.csv",
  "action_units": "aus.csv",
  "fid_features": "fid.feat",
  "sync": {"video": "sync_video.feat", "audio": "sync_audio.feat"}
}"#;
