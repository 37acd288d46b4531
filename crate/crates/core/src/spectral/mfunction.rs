use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::JacobiSource;

/// `⟨e_1, (J_d - z)^{-1} e_1⟩` for the `depth`-row truncation `J_d`,
/// evaluated as the continued fraction
/// `1 / (b(1) - z - a(1)² / (b(2) - z - a(2)² / (…)))` from the bottom up.
pub fn m_function<S: JacobiSource + ?Sized>(
    j: &S,
    z: Complex64,
    depth: usize,
) -> Result<Complex64> {
    if z.im.is_nan() || z.im <= 0.0 {
        return Err(Error::NotUpperHalfPlane(z.im));
    }
    if depth == 0 {
        return Err(Error::DepthExceedsLength { depth, length: 0 });
    }
    if let Some(rows) = j.rows() {
        if depth > rows {
            return Err(Error::DepthExceedsLength {
                depth,
                length: rows,
            });
        }
    }
    Ok(continued_fraction(j, z, depth))
}

fn continued_fraction<S: JacobiSource + ?Sized>(j: &S, z: Complex64, depth: usize) -> Complex64 {
    // Im t <= -Im z at every step, so the divisions never blow up.
    let mut t = j.b(depth) - z;
    for k in (1..depth).rev() {
        let a = j.a(k);
        t = j.b(k) - z - a * a / t;
    }
    t.inv()
}

/// Result of [`m_function_adaptive`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveM {
    pub value: Complex64,
    pub depth: usize,
    /// Relative change of `Im m` over the last doubling.
    pub change: f64,
    pub converged: bool,
}

/// Doubles the truncation depth, starting from `start`, until `Im m` moves by
/// less than `tol` (relative) or `cap` rows are reached. Reaching the last row
/// of a finite source gives its exact m-function and counts as converged.
pub fn m_function_adaptive<S: JacobiSource + ?Sized>(
    j: &S,
    z: Complex64,
    start: usize,
    tol: f64,
    cap: usize,
) -> Result<AdaptiveM> {
    let limit = j.rows().map_or(cap, |r| r.min(cap)).max(1);
    let exact = |depth: usize| j.rows() == Some(depth);
    let mut depth = start.clamp(1, limit);
    let mut value = m_function(j, z, depth)?;
    let mut change = f64::INFINITY;
    while depth < limit {
        let next_depth = depth.saturating_mul(2).min(limit);
        let next = m_function(j, z, next_depth)?;
        change = ((next.im - value.im) / next.im).abs();
        depth = next_depth;
        value = next;
        if change < tol {
            return Ok(AdaptiveM {
                value,
                depth,
                change,
                converged: true,
            });
        }
    }
    Ok(AdaptiveM {
        value,
        depth,
        change: if exact(depth) { 0.0 } else { change },
        converged: exact(depth),
    })
}
