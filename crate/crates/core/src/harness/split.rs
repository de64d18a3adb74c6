use std::ops::Range;

use crate::error::{Error, Result};

/// Splits `n_frames` into a leading training range and a trailing
/// evaluation range at `floor(train_fraction * n_frames)`.
///
/// Products within `1e-9` of an integer are snapped to it first, so
/// `0.29 * 100` splits at 29 rather than 28.
pub fn split_dataset(n_frames: usize, train_fraction: f64) -> Result<(Range<usize>, Range<usize>)> {
    if n_frames < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 frames to split, got {n_frames}"
        )));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction {train_fraction} outside (0, 1)"
        )));
    }
    let exact = train_fraction * n_frames as f64;
    let nearest = exact.round();
    let cut = if (exact - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        exact.floor()
    } as usize;
    Ok((0..cut, cut..n_frames))
}
