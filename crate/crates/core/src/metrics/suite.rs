//! Corpus-level evaluation: pairs predicted and ground-truth frames, gathers
//! optional side data named by a manifest and reports per-metric means.
//!
//! Manifest (JSON, every field optional):
//!
//! ```json
//! {
//!   "frames": ["000.pgm", "001.pgm"],
//!   "landmarks": "landmarks.csv",
//!   "action_units": "aus.csv",
//!   "au_subset": [10, 12, 14, 15, 17, 20, 23, 25, 26],
//!   "lpips_features": "lpips.tensor",
//!   "fid_features": "fid.tensor",
//!   "sync": { "video": "sync_video.tensor", "audio": "sync_audio.tensor" }
//! }
//! ```
//!
//! Frame, landmark, AU and feature files are looked up in both directories.
//! Sync embeddings describe the predicted video only and are read from the
//! prediction directory. Without `frames`, every `.pgm`/`.ppm`/`.tensor`
//! file in each directory is used in name order.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use super::aue::parse_au_id;
use super::*;
use crate::error::{Error, Result};
use crate::tensor::TensorFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Psnr,
    Ssim,
    Lpips,
    Lmd,
    Fid,
    Aue,
    Sync,
}

impl Metric {
    pub const ALL: [Metric; 7] = [
        Metric::Psnr,
        Metric::Ssim,
        Metric::Lpips,
        Metric::Lmd,
        Metric::Fid,
        Metric::Aue,
        Metric::Sync,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Metric::Psnr => "psnr",
            Metric::Ssim => "ssim",
            Metric::Lpips => "lpips",
            Metric::Lmd => "lmd",
            Metric::Fid => "fid",
            Metric::Aue => "aue",
            Metric::Sync => "sync",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Metric::ALL
            .into_iter()
            .find(|m| m.key() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown metric '{s}'")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncFiles {
    pub video: String,
    pub audio: String,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub frames: Option<Vec<String>>,
    #[serde(default)]
    pub landmarks: Option<String>,
    #[serde(default)]
    pub action_units: Option<String>,
    #[serde(default)]
    pub au_subset: Option<Vec<u32>>,
    #[serde(default)]
    pub lpips_features: Option<String>,
    #[serde(default)]
    pub fid_features: Option<String>,
    #[serde(default)]
    pub sync: Option<SyncFiles>,
}

impl Manifest {
    /// Side-data file names, which frame discovery skips.
    fn side_files(&self) -> Vec<&str> {
        let mut v: Vec<&str> = [
            &self.landmarks,
            &self.action_units,
            &self.lpips_features,
            &self.fid_features,
        ]
        .into_iter()
        .flatten()
        .map(String::as_str)
        .collect();
        if let Some(s) = &self.sync {
            v.push(&s.video);
            v.push(&s.audio);
        }
        v
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Manifest(format!("invalid manifest: {e}")))
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteOptions {
    /// `None` evaluates every metric the available data supports.
    pub metrics: Option<Vec<Metric>>,
    pub per_frame: bool,
    pub ssim: SsimConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricResult {
    pub metric: Metric,
    pub mean: f64,
    /// Per-frame values; `None` for set-level metrics or when not requested.
    pub per_frame: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QualityReport {
    pub frames: usize,
    pub results: Vec<MetricResult>,
}

fn json_number(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        Value::Null
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn csv_number(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        v.to_string()
    }
}

impl QualityReport {
    pub fn get(&self, m: Metric) -> Option<f64> {
        self.results.iter().find(|r| r.metric == m).map(|r| r.mean)
    }

    /// `{"frames": n, "metrics": {...}, "per_frame": {...}}`; non-finite
    /// values are written as the strings `"inf"` / `"-inf"`.
    pub fn to_json(&self) -> Value {
        let mut means = Map::new();
        let mut series = Map::new();
        for r in &self.results {
            means.insert(r.metric.key().into(), json_number(r.mean));
            if let Some(p) = &r.per_frame {
                series.insert(
                    r.metric.key().into(),
                    Value::Array(p.iter().map(|&v| json_number(v)).collect()),
                );
            }
        }
        let mut out = Map::new();
        out.insert("frames".into(), json!(self.frames));
        out.insert("metrics".into(), Value::Object(means));
        if !series.is_empty() {
            out.insert("per_frame".into(), Value::Object(series));
        }
        Value::Object(out)
    }

    /// One row per frame, then a `mean` row. Cells without a per-frame value
    /// are left empty.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["frame".to_string()];
        header.extend(self.results.iter().map(|r| r.metric.key().to_string()));
        wr.write_record(&header)?;
        let rows = self
            .results
            .iter()
            .filter_map(|r| r.per_frame.as_ref().map(Vec::len))
            .max()
            .unwrap_or(0);
        for i in 0..rows {
            let mut rec = vec![i.to_string()];
            for r in &self.results {
                rec.push(
                    r.per_frame
                        .as_ref()
                        .and_then(|p| p.get(i))
                        .map_or(String::new(), |&v| csv_number(v)),
                );
            }
            wr.write_record(&rec)?;
        }
        let mut rec = vec!["mean".to_string()];
        rec.extend(self.results.iter().map(|r| csv_number(r.mean)));
        wr.write_record(&rec)?;
        wr.flush()?;
        Ok(())
    }
}

/// Loads a manifest-referenced file, reporting a missing file as a manifest error.
fn side_path(dir: &Path, name: &str) -> Result<PathBuf> {
    let p = dir.join(name);
    if !p.is_file() {
        return Err(Error::Manifest(format!("missing file {}", p.display())));
    }
    Ok(p)
}

fn list_frames(dir: &Path, skip: &[&str]) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let ext = Path::new(&name)
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if matches!(ext.as_deref(), Some("pgm" | "ppm" | "tensor"))
            && !skip.contains(&name.as_str())
            && entry.file_type()?.is_file()
        {
            names.push(name);
        }
    }
    names.sort();
    Ok(names)
}

/// Parses `frame_index,point_index,x,y` into one landmark set per frame.
pub fn read_landmarks_csv(path: &Path) -> Result<BTreeMap<usize, LandmarkSet>> {
    #[derive(Deserialize)]
    struct Row {
        frame_index: usize,
        point_index: usize,
        x: f64,
        y: f64,
    }
    let mut grouped: BTreeMap<usize, Vec<(usize, f64, f64)>> = BTreeMap::new();
    for row in csv::Reader::from_path(path)?.deserialize::<Row>() {
        let r = row?;
        grouped
            .entry(r.frame_index)
            .or_default()
            .push((r.point_index, r.x, r.y));
    }
    grouped
        .into_iter()
        .map(|(f, mut pts)| {
            pts.sort_by_key(|p| p.0);
            if pts.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::Format(format!("duplicate landmark index in frame {f}")));
            }
            Ok((f, LandmarkSet::new(pts.into_iter().map(|(_, x, y)| (x, y)).collect())?))
        })
        .collect()
}

/// Parses `frame_index,au_id,intensity` into one AU vector per frame.
pub fn read_au_csv(path: &Path) -> Result<BTreeMap<usize, AuVector>> {
    #[derive(Deserialize)]
    struct Row {
        frame_index: usize,
        au_id: String,
        intensity: f64,
    }
    let mut grouped: BTreeMap<usize, BTreeMap<u32, f64>> = BTreeMap::new();
    for row in csv::Reader::from_path(path)?.deserialize::<Row>() {
        let r = row?;
        let id = parse_au_id(&r.au_id).ok_or_else(|| Error::Format(format!("bad AU id '{}'", r.au_id)))?;
        grouped.entry(r.frame_index).or_default().insert(id, r.intensity);
    }
    grouped.into_iter().map(|(f, m)| Ok((f, AuVector::new(m)?))).collect()
}

fn matrix_rows(t: &TensorFile) -> Result<Vec<Vec<f64>>> {
    let (_, c) = t.matrix_dims()?;
    Ok(t.data
        .chunks_exact(c.max(1))
        .map(|r| r.iter().map(|&v| v as f64).collect())
        .collect())
}

fn per_frame_lookup<'a, T>(map: &'a BTreeMap<usize, T>, n: usize, what: &str, side: &str) -> Result<Vec<&'a T>> {
    (0..n)
        .map(|i| {
            map.get(&i)
                .ok_or_else(|| Error::Manifest(format!("{side} {what} has no entry for frame {i}")))
        })
        .collect()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn evaluate_suite(
    pred_dir: &Path,
    truth_dir: &Path,
    manifest: &Manifest,
    opts: &SuiteOptions,
) -> Result<QualityReport> {
    let (pred_names, truth_names) = match &manifest.frames {
        Some(f) => (f.clone(), f.clone()),
        None => {
            let skip = manifest.side_files();
            (list_frames(pred_dir, &skip)?, list_frames(truth_dir, &skip)?)
        }
    };
    if pred_names.len() != truth_names.len() {
        return Err(Error::Manifest(format!(
            "frame counts differ: {} predicted vs {} ground truth",
            pred_names.len(),
            truth_names.len()
        )));
    }
    let n = pred_names.len();
    if n == 0 {
        return Err(Error::Manifest("no frames to evaluate".into()));
    }

    let available = |m: Metric| match m {
        Metric::Psnr | Metric::Ssim | Metric::Lpips => true,
        Metric::Lmd => manifest.landmarks.is_some(),
        Metric::Aue => manifest.action_units.is_some(),
        Metric::Fid => manifest.fid_features.is_some(),
        Metric::Sync => manifest.sync.is_some(),
    };
    let selected: Vec<Metric> = match &opts.metrics {
        Some(list) => {
            if let Some(m) = list.iter().find(|m| !available(**m)) {
                return Err(Error::Manifest(format!(
                    "metric '{m}' needs side data the manifest does not name"
                )));
            }
            let mut l = list.clone();
            l.sort();
            l.dedup();
            l
        }
        None => Metric::ALL.into_iter().filter(|m| available(*m)).collect(),
    };
    let wants = |m: Metric| selected.contains(&m);

    let mut per_frame: BTreeMap<Metric, Vec<f64>> = BTreeMap::new();
    let mut set_level: BTreeMap<Metric, f64> = BTreeMap::new();

    if wants(Metric::Psnr) || wants(Metric::Ssim) || wants(Metric::Lpips) {
        let pixel_metrics: Vec<[Option<f64>; 3]> = (0..n)
            .into_par_iter()
            .map(|i| -> Result<[Option<f64>; 3]> {
                let a = ImageFrame::load(side_path(pred_dir, &pred_names[i])?)?;
                let b = ImageFrame::load(side_path(truth_dir, &truth_names[i])?)?;
                let p = wants(Metric::Psnr).then(|| psnr(&a, &b)).transpose()?;
                let s = wants(Metric::Ssim).then(|| ssim(&a, &b, &opts.ssim)).transpose()?;
                let l = (wants(Metric::Lpips) && manifest.lpips_features.is_none())
                    .then(|| lpips(&a, &b, &GridStatsEmbedder::default()))
                    .transpose()?;
                Ok([p, s, l])
            })
            .collect::<Result<_>>()?;
        for (k, m) in [Metric::Psnr, Metric::Ssim, Metric::Lpips].into_iter().enumerate() {
            if pixel_metrics[0][k].is_some() {
                per_frame.insert(m, pixel_metrics.iter().map(|v| v[k].unwrap()).collect());
            }
        }
    }

    if wants(Metric::Lpips) {
        if let Some(name) = &manifest.lpips_features {
            let p = TensorFile::load(side_path(pred_dir, name)?)?;
            let t = TensorFile::load(side_path(truth_dir, name)?)?;
            let (pf, tf) = (patch_features(&p)?, patch_features(&t)?);
            if pf.len() != n || tf.len() != n {
                return Err(Error::Manifest(format!(
                    "LPIPS features cover {} / {} frames, corpus has {n}",
                    pf.len(),
                    tf.len()
                )));
            }
            let vals = pf
                .iter()
                .zip(&tf)
                .map(|(a, b)| lpips_from_features(a, b))
                .collect::<Result<Vec<_>>>()?;
            per_frame.insert(Metric::Lpips, vals);
        }
    }

    if wants(Metric::Lmd) {
        let name = manifest.landmarks.as_deref().unwrap_or_default();
        let p = read_landmarks_csv(&side_path(pred_dir, name)?)?;
        let t = read_landmarks_csv(&side_path(truth_dir, name)?)?;
        let (p, t) = (
            per_frame_lookup(&p, n, "landmarks", "predicted")?,
            per_frame_lookup(&t, n, "landmarks", "ground-truth")?,
        );
        let vals = p.iter().zip(&t).map(|(a, b)| lmd(a, b)).collect::<Result<Vec<_>>>()?;
        per_frame.insert(Metric::Lmd, vals);
    }

    if wants(Metric::Aue) {
        let name = manifest.action_units.as_deref().unwrap_or_default();
        let subset = match &manifest.au_subset {
            Some(ids) => AuSubset::new(ids.clone())?,
            None => AuSubset::default(),
        };
        let p = read_au_csv(&side_path(pred_dir, name)?)?;
        let t = read_au_csv(&side_path(truth_dir, name)?)?;
        let (p, t) = (
            per_frame_lookup(&p, n, "action units", "predicted")?,
            per_frame_lookup(&t, n, "action units", "ground-truth")?,
        );
        let vals = p
            .iter()
            .zip(&t)
            .map(|(a, b)| aue_lower(a, b, &subset))
            .collect::<Result<Vec<_>>>()?;
        per_frame.insert(Metric::Aue, vals);
    }

    if wants(Metric::Fid) {
        let name = manifest.fid_features.as_deref().unwrap_or_default();
        let gen = FeatureSet::from_samples(&matrix_rows(&TensorFile::load(side_path(pred_dir, name)?)?)?)?;
        let real = FeatureSet::from_samples(&matrix_rows(&TensorFile::load(side_path(truth_dir, name)?)?)?)?;
        set_level.insert(Metric::Fid, fid(&real, &gen)?);
    }

    if wants(Metric::Sync) {
        let files = manifest.sync.clone().unwrap_or_default();
        let v = matrix_rows(&TensorFile::load(side_path(pred_dir, &files.video)?)?)?;
        let a = matrix_rows(&TensorFile::load(side_path(pred_dir, &files.audio)?)?)?;
        let series = EmbeddingPairSeries::from_rows(&v, &a)?;
        per_frame.insert(Metric::Sync, series.confidences());
    }

    let results = selected
        .iter()
        .map(|&m| match per_frame.remove(&m) {
            Some(vals) => MetricResult {
                metric: m,
                mean: mean(&vals),
                per_frame: opts.per_frame.then_some(vals),
            },
            None => MetricResult {
                metric: m,
                mean: set_level[&m],
                per_frame: None,
            },
        })
        .collect();
    Ok(QualityReport { frames: n, results })
}

/// Splits a `(frames, patches, d)` tensor into per-frame patch features.
fn patch_features(t: &TensorFile) -> Result<Vec<Vec<Vec<f64>>>> {
    let [_, p, d] = t.header.shape[..] else {
        return Err(Error::Shape(format!(
            "LPIPS features must be (frames, patches, dim), got {:?}",
            t.header.shape
        )));
    };
    Ok(t.data
        .chunks_exact((p * d).max(1))
        .map(|frame| {
            frame
                .chunks_exact(d.max(1))
                .map(|v| v.iter().map(|&x| x as f64).collect())
                .collect()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_names() {
        assert_eq!("PSNR".parse::<Metric>().unwrap(), Metric::Psnr);
        assert_eq!(" sync".parse::<Metric>().unwrap(), Metric::Sync);
        assert!("vmaf".parse::<Metric>().is_err());
    }

    #[test]
    fn infinite_values_serialize_as_strings() {
        let r = QualityReport {
            frames: 1,
            results: vec![MetricResult {
                metric: Metric::Psnr,
                mean: f64::INFINITY,
                per_frame: Some(vec![f64::INFINITY]),
            }],
        };
        let v = r.to_json();
        assert_eq!(v["metrics"]["psnr"], "inf");
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "frame,psnr\n0,inf\nmean,inf\n");
    }

    #[test]
    fn unknown_manifest_fields_are_rejected() {
        assert!(serde_json::from_str::<Manifest>(r#"{"frame": []}"#).is_err());
        let m: Manifest = serde_json::from_str(r#"{"landmarks": "lm.csv"}"#).unwrap();
        assert_eq!(m.landmarks.as_deref(), Some("lm.csv"));
    }
}
