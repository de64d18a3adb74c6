use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LandmarkSet {
    pub points: Vec<(f64, f64)>,
}

impl LandmarkSet {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Contract("landmark set is empty".into()));
        }
        if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::Contract("landmark coordinates must be finite".into()));
        }
        Ok(Self { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Mean Euclidean distance between corresponding landmarks, in pixels.
pub fn lmd(a: &LandmarkSet, b: &LandmarkSet) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!(
            "landmark counts differ: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::Contract("landmark set is empty".into()));
    }
    let sum: f64 = a
        .points
        .iter()
        .zip(&b.points)
        .map(|((x0, y0), (x1, y1))| (x0 - x1).hypot(y0 - y1))
        .sum();
    Ok(sum / a.len() as f64)
}
