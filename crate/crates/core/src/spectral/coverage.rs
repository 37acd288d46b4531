use crate::error::{Error, Result};
use crate::operators::JacobiMatrix;

use super::eig::eig_tridiag;

/// `points` equally spaced energies from `lo` to `hi` inclusive.
pub fn energy_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => {
            let step = (hi - lo) / (points - 1) as f64;
            (0..points).map(|i| lo + step * i as f64).collect()
        }
    }
}

/// Fraction of `grid` lying within `delta` of an eigenvalue of `j`.
pub fn spectrum_coverage(j: &JacobiMatrix, grid: &[f64], delta: f64) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::NonPositiveRadius(delta));
    }
    let eig = eig_tridiag(j).eigenvalues();
    let covered = grid
        .iter()
        .filter(|&&e| {
            let i = eig.partition_point(|&x| x < e);
            let below = i.checked_sub(1).map(|k| e - eig[k]);
            let above = eig.get(i).map(|x| x - e);
            below.into_iter().chain(above).any(|d| d <= delta)
        })
        .count();
    Ok(covered as f64 / grid.len() as f64)
}
