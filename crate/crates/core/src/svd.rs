//! One-sided Jacobi singular value decomposition.
//!
//! Adequate for the desk-scale factors that carry nuclear-norm
//! regularization; not tuned for large matrices.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

const MAX_SWEEPS: usize = 100;
const OFF_DIAG_TOL: f64 = 1e-12;

/// `m = u * diag(sigma) * vt` with `sigma` sorted descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub vt: DenseMatrix,
}

impl Svd {
    /// Reconstruct `u * diag(s) * vt` for an arbitrary replacement spectrum.
    pub fn reconstruct_with(&self, s: &[f64]) -> DenseMatrix {
        let (m, k) = self.u.shape();
        let n = self.vt.cols();
        debug_assert_eq!(s.len(), k);
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                let mut acc = 0.0;
                for (l, sl) in s.iter().enumerate() {
                    acc += self.u.at(i, l) * sl * self.vt.at(l, j);
                }
                out[i * n + j] = acc;
            }
        }
        DenseMatrix::from_raw(m, n, out)
    }
}

/// Decompose via one-sided Jacobi rotations on the side with fewer columns.
pub fn jacobi_svd(m: &DenseMatrix) -> Result<Svd> {
    if m.rows() >= m.cols() {
        jacobi_tall(m)
    } else {
        // Work on the transpose and swap the factor roles.
        let t = jacobi_tall(&m.transpose())?;
        Ok(Svd { u: t.vt.transpose(), sigma: t.sigma, vt: t.u.transpose() })
    }
}

/// Singular values only, sorted descending.
pub fn singular_values(m: &DenseMatrix) -> Result<Vec<f64>> {
    Ok(jacobi_svd(m)?.sigma)
}

fn jacobi_tall(m: &DenseMatrix) -> Result<Svd> {
    let (rows, cols) = m.shape();
    debug_assert!(rows >= cols);
    // Column-major working copies of A and V; rotations act on columns.
    let mut a: Vec<Vec<f64>> = (0..cols).map(|j| (0..rows).map(|i| m.at(i, j)).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..cols).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();

    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha = dot(&a[p], &a[p]);
                let beta = dot(&a[q], &a[q]);
                let gamma = dot(&a[p], &a[q]);
                if gamma.abs() <= OFF_DIAG_TOL * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SvdNonConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..cols).collect();
    let norms: Vec<f64> = a.iter().map(|col| dot(col, col).sqrt()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap().then(i.cmp(&j)));

    let mut u = vec![0.0; rows * cols];
    let mut vt = vec![0.0; cols * cols];
    let mut sigma = Vec::with_capacity(cols);
    for (slot, &j) in order.iter().enumerate() {
        let s = norms[j];
        sigma.push(s);
        if s > 0.0 {
            for i in 0..rows {
                u[i * cols + slot] = a[j][i] / s;
            }
        }
        for i in 0..cols {
            vt[slot * cols + i] = v[j][i];
        }
    }
    Ok(Svd {
        u: DenseMatrix::from_raw(rows, cols, u),
        sigma,
        vt: DenseMatrix::from_raw(cols, cols, vt),
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    debug_assert!(p < q);
    let (head, tail) = cols.split_at_mut(q);
    for (cp, cq) in head[p].iter_mut().zip(tail[0].iter_mut()) {
        let (ap, aq) = (*cp, *cq);
        *cp = c * ap - s * aq;
        *cq = s * ap + c * aq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn random_matrix(rows: usize, cols: usize, rng: &mut SplitMix64) -> DenseMatrix {
        let data = (0..rows * cols).map(|_| rng.uniform(-2.0, 2.0)).collect();
        DenseMatrix::from_vec(rows, cols, data).unwrap()
    }

    #[test]
    fn diagonal_spectrum() {
        let m = DenseMatrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let sv = singular_values(&m).unwrap();
        assert!((sv[0] - 3.0).abs() < 1e-12);
        assert!((sv[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_matches_input() {
        let mut rng = SplitMix64::new(11);
        for &(r, c) in &[(5, 3), (3, 5), (4, 4), (6, 1)] {
            let m = random_matrix(r, c, &mut rng);
            let svd = jacobi_svd(&m).unwrap();
            let back = svd.reconstruct_with(&svd.sigma);
            let err = m.sub(&back).unwrap().fro_norm();
            assert!(err < 1e-10 * (1.0 + m.fro_norm()), "err {err}");
        }
    }

    #[test]
    fn singular_vectors_are_orthonormal() {
        let mut rng = SplitMix64::new(3);
        let m = random_matrix(6, 4, &mut rng);
        let svd = jacobi_svd(&m).unwrap();
        let gram = svd.u.gemm_tn(&svd.u).unwrap();
        let err = gram.sub(&DenseMatrix::identity(4)).unwrap().fro_norm();
        assert!(err < 1e-10, "U^T U deviates by {err}");
        let gram_v = svd.vt.gemm_nt(&svd.vt).unwrap();
        let err_v = gram_v.sub(&DenseMatrix::identity(4)).unwrap().fro_norm();
        assert!(err_v < 1e-10, "V^T V deviates by {err_v}");
    }

    #[test]
    fn zero_matrix() {
        let svd = jacobi_svd(&DenseMatrix::zeros(3, 2)).unwrap();
        assert!(svd.sigma.iter().all(|&s| s == 0.0));
    }
}
