use num_complex::Complex64;

use super::{ComplexMatrix, HERMITIAN_TOL, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Spectral decomposition `h = V diag(λ) V†` with `λ` ascending and the
/// eigenvectors stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEig {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_values(|x| x)
    }

    /// `V diag(f(λ)) V†`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let fl: Vec<f64> = self.values.iter().map(|&x| f(x)).collect();
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| v[(i, k)] * v[(j, k)].conj() * fl[k]).sum()
        })
    }
}

/// Cyclic complex Jacobi eigensolver for Hermitian matrices.
///
/// Each rotation first removes the phase of the pivot `h[p][q]` with a
/// diagonal unitary, then applies the classical real Jacobi rotation.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<HermitianEig> {
    let n = h.dim();
    let norm = h.frobenius_norm();
    let residual = h.hermitian_residual();
    if residual > HERMITIAN_TOL * (1.0 + norm) {
        return Err(Error::NotHermitian { residual });
    }

    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let threshold = f64::EPSILON * norm.max(f64::MIN_POSITIVE);

    let mut converged = n == 1;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let off = off_diagonal_norm(&a);
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > threshold {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, |i, j| v[(i, order[j])]);
    Ok(HermitianEig { values, vectors })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let phase = apq / r; // e^{iφ}

    let zeta = (aqq - app) / (2.0 * r);
    let t = if zeta.is_finite() {
        zeta.signum() / (zeta.abs() + 1f64.hypot(zeta))
    } else {
        0.0
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // G = diag(1, e^{-iφ}) · [[c, s], [-s, c]]
    let g_pp = Complex64::new(c, 0.0);
    let g_pq = Complex64::new(s, 0.0);
    let g_qp = -phase.conj() * s;
    let g_qq = phase.conj() * c;

    let n = a.dim();
    // A ← A G
    for i in 0..n {
        let (x, y) = (a[(i, p)], a[(i, q)]);
        a[(i, p)] = x * g_pp + y * g_qp;
        a[(i, q)] = x * g_pq + y * g_qq;
    }
    // A ← G† A
    for j in 0..n {
        let (x, y) = (a[(p, j)], a[(q, j)]);
        a[(p, j)] = g_pp.conj() * x + g_qp.conj() * y;
        a[(q, j)] = g_pq.conj() * x + g_qq.conj() * y;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;
    // V ← V G
    for i in 0..n {
        let (x, y) = (v[(i, p)], v[(i, q)]);
        v[(i, p)] = x * g_pp + y * g_qp;
        v[(i, q)] = x * g_pq + y * g_qq;
    }
}

/// Inverse of a Hermitian PSD matrix through its spectrum. Fails with
/// [`Error::Singular`] when the smallest eigenvalue is below `reg_tol`.
pub fn psd_inverse(h: &ComplexMatrix, reg_tol: f64) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(h)?;
    let min = eig.values[0];
    if !(min >= reg_tol) {
        return Err(Error::Singular {
            min_eigenvalue: min,
            reg_tol,
        });
    }
    Ok(eig.map_values(|x| 1.0 / x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;

    #[test]
    fn pauli_z_spectrum() {
        let e = hermitian_eig(&pauli::z()).unwrap();
        assert_eq!(e.values, vec![-1.0, 1.0]);
    }

    #[test]
    fn pauli_y_spectrum_and_vectors() {
        let y = pauli::y();
        let e = hermitian_eig(&y).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        assert!(e.reconstruct().distance(&y) < 1e-14);
    }

    #[test]
    fn identity_spectrum() {
        let e = hermitian_eig(&ComplexMatrix::identity(4)).unwrap();
        assert!(e.values.iter().all(|&x| x == 1.0));
        let vv = e.vectors.adjoint().matmul(&e.vectors);
        assert!(vv.distance(&ComplexMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn psd_inverse_cases() {
        let i2 = ComplexMatrix::identity(2);
        assert!(psd_inverse(&i2, 1e-8).unwrap().distance(&i2) < 1e-15);

        let d = ComplexMatrix::from_diagonal(&[0.5, 0.25]);
        let inv = psd_inverse(&d, 1e-8).unwrap();
        assert!(inv.distance(&ComplexMatrix::from_diagonal(&[2.0, 4.0])) < 1e-14);

        let sing = ComplexMatrix::from_diagonal(&[1.0, 0.0]);
        assert!(matches!(psd_inverse(&sing, 1e-8), Err(Error::Singular { .. })));
    }
}
