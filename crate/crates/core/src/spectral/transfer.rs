//! Transfer matrices of the three-term recurrence
//! `a(j) u(j+1) + b(j) u(j) + a(j-1) u(j-1) = E u(j)`, with `a(0) = 1`.

use crate::operators::JacobiSource;

/// Steps between renormalizations of the accumulated product.
pub const RENORMALIZATION_CADENCE: usize = 64;

type Mat2 = [[f64; 2]; 2];

fn mul(x: &Mat2, y: &Mat2) -> Mat2 {
    [
        [
            x[0][0] * y[0][0] + x[0][1] * y[1][0],
            x[0][0] * y[0][1] + x[0][1] * y[1][1],
        ],
        [
            x[1][0] * y[0][0] + x[1][1] * y[1][0],
            x[1][0] * y[0][1] + x[1][1] * y[1][1],
        ],
    ]
}

/// Largest singular value of a 2×2 matrix, free of cancellation.
fn norm2(m: &Mat2) -> f64 {
    let [[a, b], [c, d]] = *m;
    0.5 * ((a + d).hypot(b - c) + (a - d).hypot(b + c))
}

/// Accumulated product `T_step(E) ⋯ T_1(E) = exp(log_scale) · matrix`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferState {
    pub matrix: Mat2,
    pub log_scale: f64,
    pub step: usize,
    /// `Σ_j ln(a(j-1) / a(j))`, the log of the exact determinant.
    pub log_det_expected: f64,
}

impl Default for TransferState {
    fn default() -> Self {
        TransferState {
            matrix: [[1.0, 0.0], [0.0, 1.0]],
            log_scale: 0.0,
            step: 0,
            log_det_expected: 0.0,
        }
    }
}

impl TransferState {
    /// `ln ‖T_step ⋯ T_1‖`.
    pub fn log_norm(&self) -> f64 {
        self.log_scale + norm2(&self.matrix).ln()
    }

    pub fn norm(&self) -> f64 {
        self.log_norm().exp()
    }

    /// Actual product, which may overflow for long scans.
    pub fn product(&self) -> Mat2 {
        let s = self.log_scale.exp();
        self.matrix.map(|row| row.map(|x| x * s))
    }

    /// `|det(product) / Π a(j-1)/a(j) - 1|`.
    pub fn determinant_residual(&self) -> f64 {
        let [[a, b], [c, d]] = self.matrix;
        let det = a * d - b * c;
        let log_ratio = det.abs().ln() + 2.0 * self.log_scale - self.log_det_expected;
        if det < 0.0 {
            f64::INFINITY
        } else {
            log_ratio.exp_m1().abs()
        }
    }

    fn advance<S: JacobiSource + ?Sized>(&mut self, j: &S, energy: f64) {
        let k = self.step + 1;
        let a_prev = if k == 1 { 1.0 } else { j.a(k - 1) };
        let a = j.a(k);
        let t = [[(energy - j.b(k)) / a, -a_prev / a], [1.0, 0.0]];
        self.matrix = mul(&t, &self.matrix);
        self.log_det_expected += (a_prev / a).ln();
        self.step = k;
    }

    fn renormalize(&mut self) {
        let n = norm2(&self.matrix);
        if n > 0.0 && n.is_finite() {
            self.matrix = self.matrix.map(|row| row.map(|x| x / n));
            self.log_scale += n.ln();
        }
    }
}

fn steps<S: JacobiSource + ?Sized>(j: &S, n: usize) -> usize {
    j.rows().map_or(n, |r| n.min(r))
}

/// `T_n(E) ⋯ T_1(E)` with `T_k = [[(E - b(k))/a(k), -a(k-1)/a(k)], [1, 0]]`.
/// Scans stop at the last row of a finite truncation; `a` past the stored
/// off-diagonals reads as 1.
pub fn transfer_product<S: JacobiSource + ?Sized>(j: &S, energy: f64, n: usize) -> TransferState {
    transfer_product_with_cadence(j, energy, n, RENORMALIZATION_CADENCE)
}

pub fn transfer_product_with_cadence<S: JacobiSource + ?Sized>(
    j: &S,
    energy: f64,
    n: usize,
    cadence: usize,
) -> TransferState {
    let cadence = cadence.max(1);
    let mut state = TransferState::default();
    for _ in 0..steps(j, n) {
        state.advance(j, energy);
        if state.step % cadence == 0 {
            state.renormalize();
        }
    }
    state
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimonStolzPoint {
    pub n: usize,
    /// `S_n = Σ_{k <= n} ‖T_k ⋯ T_1‖^{-2}`.
    pub sum: f64,
    pub log_norm: f64,
}

/// Partial sums `S_1, …, S_n`.
pub fn simon_stolz_sum<S: JacobiSource + ?Sized>(
    j: &S,
    energy: f64,
    n: usize,
) -> Vec<SimonStolzPoint> {
    let n = steps(j, n);
    let mut out = Vec::with_capacity(n);
    let mut state = TransferState::default();
    let mut sum = 0.0;
    for _ in 0..n {
        state.advance(j, energy);
        if state.step % RENORMALIZATION_CADENCE == 0 {
            state.renormalize();
        }
        let log_norm = state.log_norm();
        sum += (-2.0 * log_norm).exp();
        out.push(SimonStolzPoint {
            n: state.step,
            sum,
            log_norm,
        });
    }
    out
}

/// `ssum.csv`: header `n,S_n,log_norm`.
pub fn simon_stolz_csv(points: &[SimonStolzPoint]) -> String {
    use std::fmt::Write as _;
    let mut out = String::with_capacity(40 * points.len() + 16);
    out.push_str("n,S_n,log_norm\n");
    for p in points {
        let _ = writeln!(out, "{},{},{}", p.n, p.sum, p.log_norm);
    }
    out
}
