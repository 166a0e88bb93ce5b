//! Implicit QL iteration for symmetric tridiagonal matrices.
//!
//! Only the rows of the eigenvector matrix that the caller asks for are
//! accumulated, so Golub–Welsch can get the first components in `O(n²)`.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 64;

/// Eigen-decomposition of a symmetric tridiagonal matrix.
#[derive(Debug, Clone)]
pub struct TridiagEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// `rows[r][j]` is component `r` of the eigenvector for `values[j]`.
    pub rows: Vec<Vec<f64>>,
}

/// Decomposes the matrix with diagonal `diag` and off-diagonal `off`
/// (`off[i]` couples entries `i` and `i + 1`). Eigenvector components are
/// tracked for the first `tracked_rows` rows.
pub fn symmetric_tridiagonal_eigen(
    diag: &[f64],
    off: &[f64],
    tracked_rows: usize,
) -> Result<TridiagEigen> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty tridiagonal matrix".into()));
    }
    if off.len() + 1 != n {
        return Err(Error::Shape(format!(
            "off-diagonal has length {}, expected {}",
            off.len(),
            n - 1
        )));
    }
    let tracked = tracked_rows.min(n);
    let mut d = diag.to_vec();
    let mut e: Vec<f64> = off.iter().copied().chain(std::iter::once(0.0)).collect();
    let mut z: Vec<Vec<f64>> = (0..tracked)
        .map(|r| (0..n).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
        .collect();

    for l in 0..n {
        let mut sweeps = 0;
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
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::NoConvergence);
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
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
                for row in z.iter_mut() {
                    let f = row[i + 1];
                    row[i + 1] = s * row[i] + c * f;
                    row[i] = c * row[i] - s * f;
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&j| d[j]).collect();
    let rows = z
        .into_iter()
        .map(|row| order.iter().map(|&j| row[j]).collect())
        .collect();
    Ok(TridiagEigen { values, rows })
}
