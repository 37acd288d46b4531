use crate::error::{Error, Result};
use crate::operators::LinearOperator;

/// `⟨seed, Aᵖ seed⟩` for `p = 0..=max_power`, by repeated application.
///
/// Even powers are formed as `‖A^{p/2} seed‖²` and odd ones as
/// `⟨A^{(p-1)/2} seed, A^{(p+1)/2} seed⟩`, so only `max_power / 2 + 1`
/// products are needed.
pub fn moments<A: LinearOperator + ?Sized>(
    op: &A,
    seed: &[f64],
    max_power: usize,
) -> Result<Vec<f64>> {
    if seed.len() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: seed.len(),
        });
    }
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let mut out = Vec::with_capacity(max_power + 1);
    let mut current = seed.to_vec();
    let mut next = vec![0.0; seed.len()];
    out.push(dot(&current, &current));
    while out.len() <= max_power {
        op.apply_into(&current, &mut next);
        out.push(dot(&current, &next));
        if out.len() <= max_power {
            out.push(dot(&next, &next));
        }
        std::mem::swap(&mut current, &mut next);
    }
    out.truncate(max_power + 1);
    Ok(out)
}
