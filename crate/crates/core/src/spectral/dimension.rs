//! Local scaling of spectral measures.
//!
//! For a measure with `μ(E - ε, E + ε) ~ ε^α`, the m-function obeys
//! `Im m(E + iε) ~ ε^{α - 1}`. Fitting `ln Im m` against `ln ε` over a
//! geometric ladder therefore gives `α - 1`: 0 at an absolutely continuous
//! point and -1 at an atom. The proxy is `clamp(1 + slope, 0, 1)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::JacobiSource;

use super::eig::SpectralMeasure;
use super::mfunction::m_function_adaptive;

#[derive(Clone, Debug, PartialEq)]
pub struct DimensionEstimate {
    pub energy: f64,
    /// Fitted slope of `ln Im m(E + iε)` against `ln ε`.
    pub exponent: f64,
    pub dimension_proxy: f64,
    pub epsilon_ladder: Vec<f64>,
    /// RMS residual of the linear fit.
    pub fit_residual: f64,
    /// Truncation depth used at each ladder point.
    pub depths: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DimensionOptions {
    /// Relative movement of `Im m` at which depth doubling stops.
    pub tolerance: f64,
    /// Movement at the largest ε beyond which the estimate is rejected.
    pub reject_above: f64,
    /// Hard cap on the continued-fraction depth.
    pub max_depth: usize,
}

impl Default for DimensionOptions {
    fn default() -> Self {
        DimensionOptions {
            tolerance: 1e-3,
            reject_above: 1e-2,
            max_depth: 10_000_000,
        }
    }
}

/// `points` values from `largest` down to `smallest`, geometrically spaced.
pub fn geometric_ladder(largest: f64, smallest: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![largest; points];
    }
    let ratio = (smallest / largest).powf(1.0 / (points - 1) as f64);
    (0..points)
        .map(|i| largest * ratio.powi(i as i32))
        .collect()
}

/// `2^-4, 2^-5, …, 2^-20`.
pub fn default_ladder() -> Vec<f64> {
    (4..=20).map(|p| 2f64.powi(-p)).collect()
}

fn validate_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.len() < 4 {
        return Err(Error::LadderTooShort(ladder.len()));
    }
    let inside = ladder.iter().all(|&e| e > 0.0 && e < 1.0);
    let decreasing = ladder.windows(2).all(|w| w[1] < w[0]);
    if inside && decreasing {
        Ok(())
    } else {
        Err(Error::InvalidLadder)
    }
}

/// Least-squares slope and RMS residual of `y` against `x`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    (slope, (rss / n).sqrt())
}

pub fn local_dimension<S: JacobiSource + ?Sized>(
    j: &S,
    energy: f64,
    ladder: &[f64],
    depth: usize,
) -> Result<DimensionEstimate> {
    local_dimension_with(j, energy, ladder, depth, &DimensionOptions::default())
}

/// Scaling estimate at `energy`. Depth starts at `depth` and is doubled per
/// ladder point until `Im m` settles; an unsettled value at the largest ε is
/// an error, at smaller ε the capped value is used.
pub fn local_dimension_with<S: JacobiSource + ?Sized>(
    j: &S,
    energy: f64,
    ladder: &[f64],
    depth: usize,
    options: &DimensionOptions,
) -> Result<DimensionEstimate> {
    validate_ladder(ladder)?;
    let mut start = depth.max(1);
    let mut log_eps = Vec::with_capacity(ladder.len());
    let mut log_im = Vec::with_capacity(ladder.len());
    let mut depths = Vec::with_capacity(ladder.len());
    for (i, &eps) in ladder.iter().enumerate() {
        let z = Complex64::new(energy, eps);
        let m = m_function_adaptive(j, z, start, options.tolerance, options.max_depth)?;
        if i == 0 && !m.converged && m.change > options.reject_above {
            return Err(Error::NotConverged {
                epsilon: eps,
                depth: m.depth,
                change: m.change,
            });
        }
        start = m.depth;
        depths.push(m.depth);
        log_eps.push(eps.ln());
        log_im.push(m.value.im.ln());
    }
    let (slope, fit_residual) = linear_fit(&log_eps, &log_im);
    Ok(DimensionEstimate {
        energy,
        exponent: slope,
        dimension_proxy: (1.0 + slope).clamp(0.0, 1.0),
        epsilon_ladder: ladder.to_vec(),
        fit_residual,
        depths,
    })
}

/// Box-counting cross-check on a finite measure: slope of
/// `ln μ([E - r, E + r])` against `ln r`. Radii with zero mass are skipped;
/// `None` if fewer than two remain.
pub fn local_mass_dimension(measure: &SpectralMeasure, energy: f64, radii: &[f64]) -> Option<f64> {
    let (x, y): (Vec<f64>, Vec<f64>) = radii
        .iter()
        .filter_map(|&r| {
            let mass = measure.mass(energy - r, energy + r);
            (mass > 0.0).then(|| (r.ln(), mass.ln()))
        })
        .unzip();
    (x.len() >= 2).then(|| linear_fit(&x, &y).0)
}

/// `dim.csv`: header `E,proxy,fit_residual`.
pub fn dimension_csv(estimates: &[DimensionEstimate]) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("E,proxy,fit_residual\n");
    for d in estimates {
        let _ = writeln!(out, "{},{},{}", d.energy, d.dimension_proxy, d.fit_residual);
    }
    out
}
