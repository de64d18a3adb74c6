use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    #[serde(rename = "name")]
    pub stage_name: String,
    #[serde(rename = "seconds")]
    pub wall_seconds: f64,
    #[serde(rename = "percent")]
    pub percent_of_total: f64,
}

/// Ordered per-stage durations with their share of the total.
///
/// Percentages are kept unrounded; serialization rounds them to two decimals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineReport {
    pub timings: Vec<StageTiming>,
    pub total_seconds: f64,
    pub answer_tokens: usize,
    pub answer_duration_s: f64,
}

#[derive(Serialize, Deserialize)]
struct ReportJson {
    stages: Vec<StageTiming>,
    total_seconds: f64,
    answer_tokens: usize,
    answer_duration_s: f64,
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

impl PipelineReport {
    /// Builds a report from `(name, seconds)` pairs in execution order.
    /// An all-zero total yields zero percentages.
    pub fn from_durations(durations: &[(String, f64)], answer_tokens: usize, answer_duration_s: f64) -> Self {
        let total: f64 = durations.iter().map(|(_, d)| d).sum();
        let timings = durations
            .iter()
            .map(|(name, d)| StageTiming {
                stage_name: name.clone(),
                wall_seconds: *d,
                percent_of_total: if total > 0.0 { 100.0 * d / total } else { 0.0 },
            })
            .collect();
        Self {
            timings,
            total_seconds: total,
            answer_tokens,
            answer_duration_s,
        }
    }

    pub fn timing(&self, name: &str) -> Option<&StageTiming> {
        self.timings.iter().find(|t| t.stage_name == name)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let doc = ReportJson {
            stages: self
                .timings
                .iter()
                .map(|t| StageTiming {
                    percent_of_total: round2(t.percent_of_total),
                    ..t.clone()
                })
                .collect(),
            total_seconds: self.total_seconds,
            answer_tokens: self.answer_tokens,
            answer_duration_s: self.answer_duration_s,
        };
        serde_json::to_value(doc).expect("report serializes")
    }

    /// Parses the JSON produced by [`PipelineReport::to_json`].
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let doc: ReportJson = serde_json::from_value(v.clone())?;
        Ok(Self {
            timings: doc.stages,
            total_seconds: doc.total_seconds,
            answer_tokens: doc.answer_tokens,
            answer_duration_s: doc.answer_duration_s,
        })
    }

    /// `stage,seconds,percent`, one stage per row.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["stage", "seconds", "percent"])?;
        for t in &self.timings {
            wr.write_record([
                t.stage_name.clone(),
                t.wall_seconds.to_string(),
                format!("{:.2}", t.percent_of_total),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Recomputes the percentage breakdown from recorded durations.
pub fn replay_report(
    durations: &[(String, f64)],
    answer_tokens: usize,
    answer_duration_s: f64,
) -> Result<PipelineReport> {
    if durations.is_empty() {
        return Err(Error::Contract("no stage durations to replay".into()));
    }
    if let Some((name, d)) = durations.iter().find(|(_, d)| !d.is_finite() || *d < 0.0) {
        return Err(Error::Contract(format!("stage '{name}' has invalid duration {d}")));
    }
    if durations.iter().all(|(_, d)| *d == 0.0) {
        return Err(Error::Contract("all stage durations are zero".into()));
    }
    Ok(PipelineReport::from_durations(
        durations,
        answer_tokens,
        answer_duration_s,
    ))
}

/// Reads `stage,seconds` rows (with header).
pub fn read_replay_csv<R: Read>(r: R) -> Result<Vec<(String, f64)>> {
    #[derive(Deserialize)]
    struct Row {
        stage: String,
        seconds: f64,
    }
    csv::Reader::from_reader(r)
        .deserialize::<Row>()
        .map(|row| row.map(|r| (r.stage, r.seconds)).map_err(Error::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn named(v: &[f64]) -> Vec<(String, f64)> {
        v.iter().enumerate().map(|(i, &d)| (format!("s{i}"), d)).collect()
    }

    #[test]
    fn equal_split() {
        let r = replay_report(&named(&[2.0; 4]), 0, 0.0).unwrap();
        assert!(r.timings.iter().all(|t| t.percent_of_total == 25.0));
        assert_eq!(r.total_seconds, 8.0);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(replay_report(&named(&[0.0, 0.0]), 0, 0.0).is_err());
        assert!(replay_report(&named(&[-1.0, 2.0]), 0, 0.0).is_err());
        assert!(replay_report(&[], 0, 0.0).is_err());
        let single = replay_report(&named(&[0.3]), 0, 0.0).unwrap();
        assert_eq!(single.timings[0].percent_of_total, 100.0);
    }

    #[test]
    fn json_and_csv_layout() {
        let r = replay_report(&[("A".into(), 1.0), ("B".into(), 2.0)], 3, 1.5).unwrap();
        let v = r.to_json();
        assert_eq!(v["stages"][0]["name"], "A");
        assert_eq!(v["stages"][0]["percent"], 33.33);
        assert_eq!(v["total_seconds"], 3.0);
        assert_eq!(v["answer_tokens"], 3);
        assert_eq!(PipelineReport::from_json(&v).unwrap().timings[1].wall_seconds, 2.0);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "stage,seconds,percent\nA,1,33.33\nB,2,66.67\n"
        );
    }

    #[test]
    fn replay_csv_input() {
        let rows = read_replay_csv("stage,seconds\nSTT,0.06\nLanguage,0.8\n".as_bytes()).unwrap();
        assert_eq!(rows, vec![("STT".into(), 0.06), ("Language".into(), 0.8)]);
        assert!(read_replay_csv("stage,seconds\nSTT,abc\n".as_bytes()).is_err());
    }
}
