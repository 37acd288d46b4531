use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::operators::JacobiMatrix;

/// Atoms `(eigenvalue, weight)` of the spectral measure of a finite Jacobi
/// matrix and `e_1`, eigenvalues ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralMeasure {
    pub atoms: Vec<(f64, f64)>,
}

impl SpectralMeasure {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.0).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// `Σ w_i λ_i^p`.
    pub fn moment(&self, p: u32) -> f64 {
        self.atoms.iter().map(|&(e, w)| w * e.powi(p as i32)).sum()
    }

    /// `μ([lo, hi])`.
    pub fn mass(&self, lo: f64, hi: f64) -> f64 {
        let start = self.atoms.partition_point(|a| a.0 < lo);
        let end = self.atoms.partition_point(|a| a.0 <= hi);
        self.atoms[start..end.max(start)].iter().map(|a| a.1).sum()
    }

    /// `spectrum.csv`: header `eigenvalue,weight`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eigenvalue,weight\n");
        for (e, w) in &self.atoms {
            let _ = writeln!(out, "{e},{w}");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some("eigenvalue,weight") {
            return Err(Error::Parse {
                line: 1,
                message: "expected header `eigenvalue,weight`".into(),
            });
        }
        let mut atoms = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let err = || Error::Parse {
                line: i + 2,
                message: format!("expected `eigenvalue,weight`, got `{line}`"),
            };
            let (e, w) = line.split_once(',').ok_or_else(err)?;
            let e: f64 = e.parse().map_err(|_| err())?;
            let w: f64 = w.parse().map_err(|_| err())?;
            if !(e.is_finite() && w.is_finite() && w >= 0.0) {
                return Err(err());
            }
            atoms.push((e, w));
        }
        Ok(SpectralMeasure { atoms })
    }
}

/// Eigenvalues and first eigenvector components of a Jacobi truncation, by
/// implicit-shift QL. Only the first row of the eigenvector matrix is carried
/// through the rotations, so memory is `O(N)` and time `O(N²)`.
pub fn eig_tridiag(j: &JacobiMatrix) -> SpectralMeasure {
    let n = j.len();
    let mut d = j.diagonal().to_vec();
    let mut e = j.off_diagonal().to_vec();
    e.push(0.0);
    let mut z = vec![0.0; n];
    z[0] = 1.0;

    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            assert!(iterations <= 64, "QL iteration failed to converge");

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0f64, 1.0f64, 0.0f64);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let f = z[i + 1];
                z[i + 1] = s * z[i] + c * f;
                z[i] = c * z[i] - s * f;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut atoms: Vec<(f64, f64)> = d.into_iter().zip(z).map(|(x, v)| (x, v * v)).collect();
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    SpectralMeasure { atoms }
}

/// Number of eigenvalues strictly below `x`, from the signs of the `LDLᵀ`
/// pivots of `J - x`.
pub fn sturm_count(j: &JacobiMatrix, x: f64) -> usize {
    let d = j.diagonal();
    let a = j.off_diagonal();
    let scale = a.iter().fold(1.0f64, |m, &v| m.max(v * v));
    let pivmin = f64::MIN_POSITIVE * scale;
    let mut count = 0;
    let mut q = d[0] - x;
    for i in 0..d.len() {
        if i > 0 {
            q = d[i] - x - a[i - 1] * a[i - 1] / q;
        }
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// All eigenvalues by Sturm bisection, to absolute width `tol`.
pub fn tridiag_eigenvalues_bisection(j: &JacobiMatrix, tol: f64) -> Vec<f64> {
    let d = j.diagonal();
    let a = j.off_diagonal();
    // Gershgorin interval
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..d.len() {
        let left = if i > 0 { a[i - 1] } else { 0.0 };
        let right = a.get(i).copied().unwrap_or(0.0);
        lo = lo.min(d[i] - left - right);
        hi = hi.max(d[i] + left + right);
    }
    let (lo, hi) = (lo - tol, hi + tol);
    let mut out = Vec::with_capacity(d.len());
    bisect(&|x| sturm_count(j, x), lo, hi, 0, d.len(), tol, &mut out);
    out
}

/// Recursively splits `[lo, hi)` holding eigenvalues `count_lo..count_hi`.
pub(crate) fn bisect(
    count: &dyn Fn(f64) -> usize,
    lo: f64,
    hi: f64,
    count_lo: usize,
    count_hi: usize,
    tol: f64,
    out: &mut Vec<f64>,
) {
    if count_hi <= count_lo {
        return;
    }
    let mid = 0.5 * (lo + hi);
    if hi - lo <= tol || mid <= lo || mid >= hi {
        out.extend(std::iter::repeat_n(mid, count_hi - count_lo));
        return;
    }
    let count_mid = count(mid).clamp(count_lo, count_hi);
    bisect(count, lo, mid, count_lo, count_mid, tol, out);
    bisect(count, mid, hi, count_mid, count_hi, tol, out);
}
