//! Cyclic Jacobi eigensolver for small dense Hermitian matrices.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::fock::C64;

/// Largest tolerated `|m_ij - conj(m_ji)|` on input.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Iteration stops once the off-diagonal Frobenius norm drops below this
/// (scaled by the matrix norm when that exceeds one).
pub const OFF_DIAGONAL_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NonHermitian { deviation: f64 },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NotConverged { sweeps: usize, off_norm: f64 },
}

/// Eigen-decomposition `M = V diag(values) V^†`, values ascending, the
/// eigenvector for `values[k]` in column `k` of `vectors`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl HermitianEigen {
    /// `max_k ‖M v_k − λ_k v_k‖`.
    pub fn max_residual(&self, m: &DMatrix<C64>) -> f64 {
        let mv = m * &self.vectors;
        (0..self.values.len())
            .map(|k| {
                let lam = self.values[k];
                mv.column(k)
                    .iter()
                    .zip(self.vectors.column(k).iter())
                    .map(|(a, v)| (a - v * lam).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Largest `|m_ij − conj(m_ji)|`.
pub fn hermiticity_deviation(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn off_diagonal_norm(a: &DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

pub fn hermitian_eigen(m: &DMatrix<C64>) -> Result<HermitianEigen, EigenError> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(EigenError::NotSquare {
            rows: n,
            cols: m.ncols(),
        });
    }
    let deviation = hermiticity_deviation(m);
    if deviation > HERMITIAN_TOL {
        return Err(EigenError::NonHermitian { deviation });
    }

    let mut a = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut v = DMatrix::<C64>::identity(n, n);
    let tol = OFF_DIAGONAL_TOL * a.norm().max(1.0);

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off < tol {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(EigenError::NotConverged {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = idx.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, idx[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Result<Vec<f64>, EigenError> {
    hermitian_eigen(m).map(|e| e.values)
}

/// Zeroes `a[p,q]` with `a ← J^† a J`, `v ← v J`, where `J` combines a phase
/// on `q` making `a[p,q]` real with a real plane rotation.
fn rotate(a: &mut DMatrix<C64>, v: &mut DMatrix<C64>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let g = apq.norm();
    if g == 0.0 {
        return;
    }
    let phase = apq / g;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * g);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let jpp = C64::new(c, 0.0);
    let jpq = C64::new(s, 0.0);
    let jqp = -phase.conj() * s;
    let jqq = phase.conj() * c;

    let n = a.nrows();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}
