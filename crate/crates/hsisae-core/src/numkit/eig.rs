//! Symmetric eigendecomposition by cyclic Jacobi rotations.
//!
//! Each sweep visits every off-diagonal pair (p, q) and applies a plane
//! rotation that zeroes that entry; the accumulated rotations form the
//! eigenvector matrix. Convergence is quadratic, so the 100-sweep cap is
//! never reached in practice. Adequate for the matrix sizes here (PCA over
//! at most a few hundred bands).

use super::Matrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const OFF_DIAG_TOL: f64 = 1e-12;
const SYMMETRY_TOL: f64 = 1e-9;

/// Eigenvalues (descending) and the matching eigenvectors as columns.
///
/// The input must be symmetric within 1e-9 absolute.
pub fn sym_eig(s: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let n = s.rows();
    if s.cols() != n {
        return Err(Error::Contract(format!(
            "sym_eig needs a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (s.get(i, j) - s.get(j, i)).abs() > SYMMETRY_TOL {
                return Err(Error::Contract(format!(
                    "sym_eig needs a symmetric matrix; entries ({i},{j}) and ({j},{i}) \
                     differ by {}",
                    (s.get(i, j) - s.get(j, i)).abs()
                )));
            }
        }
    }

    let mut a = s.clone();
    // Symmetrize exactly so rotations preserve symmetry bit-for-bit.
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a.get(i, j) + a.get(j, i));
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    let mut v = Matrix::identity(n);

    let scale = frobenius(&a).max(1.0);
    let tol = OFF_DIAG_TOL * scale;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diag_norm(&a) <= tol {
            converged = true;
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let (c, s_) = rotation(a.get(p, p), a.get(q, q), apq);
                apply_rotation(&mut a, p, q, c, s_);
                accumulate(&mut v, p, q, c, s_);
            }
        }
    }
    if !converged && off_diag_norm(&a) > tol {
        return Err(Error::Contract(format!(
            "jacobi eigensolver did not converge within {MAX_SWEEPS} sweeps"
        )));
    }

    // Sort descending; stable so ties keep a deterministic order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).partial_cmp(&a.get(i, i)).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a.get(i, i)).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, dst, v.get(r, src));
        }
    }
    Ok((eigenvalues, vectors))
}

fn frobenius(a: &Matrix) -> f64 {
    a.data().iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn off_diag_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let v = a.get(i, j);
                sum += v * v;
            }
        }
    }
    sum.sqrt()
}

/// Cosine/sine of the rotation that annihilates a[p][q].
fn rotation(app: f64, aqq: f64, apq: f64) -> (f64, f64) {
    let theta = 0.5 * (aqq - app) / apq;
    let t = if theta.abs() > 1e150 {
        // Avoid overflow in theta^2; the limit is t = 1/(2 theta).
        0.5 / theta
    } else {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    (c, t * c)
}

fn apply_rotation(a: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.rows();
    let app = a.get(p, p);
    let aqq = a.get(q, q);
    let apq = a.get(p, q);
    a.set(p, p, c * c * app - 2.0 * s * c * apq + s * s * aqq);
    a.set(q, q, s * s * app + 2.0 * s * c * apq + c * c * aqq);
    a.set(p, q, 0.0);
    a.set(q, p, 0.0);
    for j in 0..n {
        if j == p || j == q {
            continue;
        }
        let ajp = a.get(j, p);
        let ajq = a.get(j, q);
        a.set(j, p, c * ajp - s * ajq);
        a.set(p, j, c * ajp - s * ajq);
        a.set(j, q, s * ajp + c * ajq);
        a.set(q, j, s * ajp + c * ajq);
    }
}

fn accumulate(v: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = v.rows();
    for j in 0..n {
        let vjp = v.get(j, p);
        let vjq = v.get(j, q);
        v.set(j, p, c * vjp - s * vjq);
        v.set(j, q, s * vjp + c * vjq);
    }
}
