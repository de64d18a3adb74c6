use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Action-unit intensities keyed by FACS number (12 for AU12).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AuVector {
    pub intensities: BTreeMap<u32, f64>,
}

impl AuVector {
    pub fn new(intensities: BTreeMap<u32, f64>) -> Result<Self> {
        if let Some((id, v)) = intensities.iter().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(Error::Contract(format!("AU{id} intensity {v} must be finite and >= 0")));
        }
        Ok(Self { intensities })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        Self::new(pairs.into_iter().collect())
    }
}

/// Ordered AU ids scored by [`aue_lower`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuSubset(Vec<u32>);

impl AuSubset {
    pub fn new(ids: Vec<u32>) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::Contract("AU subset is empty".into()));
        }
        Ok(Self(ids))
    }

    pub fn ids(&self) -> &[u32] {
        &self.0
    }
}

impl Default for AuSubset {
    /// Lower-face units: upper lip raiser, lip corner puller, dimpler, lip
    /// corner depressor, chin raiser, lip stretcher, lip tightener, lips part,
    /// jaw drop.
    fn default() -> Self {
        Self(vec![10, 12, 14, 15, 17, 20, 23, 25, 26])
    }
}

/// Parses `"AU12"`, `"au12"` or `"12"`.
pub fn parse_au_id(s: &str) -> Option<u32> {
    let s = s.trim();
    let digits = s.strip_prefix("AU").or_else(|| s.strip_prefix("au")).unwrap_or(s);
    digits.parse().ok()
}

/// Mean squared intensity difference over the subset.
pub fn aue_lower(a: &AuVector, b: &AuVector, subset: &AuSubset) -> Result<f64> {
    let mut total = 0.0;
    for id in subset.ids() {
        let (x, y) = match (a.intensities.get(id), b.intensities.get(id)) {
            (Some(x), Some(y)) => (x, y),
            _ => return Err(Error::Contract(format!("AU{id} missing from an intensity vector"))),
        };
        total += (x - y) * (x - y);
    }
    Ok(total / subset.ids().len() as f64)
}
