//! Density matrices over ordered tensor factors: partial trace, partial
//! transpose and negativity.
//!
//! Factor `0` is the most significant digit of a row/column index, matching
//! the layout of [`StateVector`](crate::fock::StateVector).

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::fock::{StateVector, C64, MODES};
use crate::linalg::{self, EigenError};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest eigenvalue a valid density matrix may have.
pub const PSD_TOL: f64 = 1e-10;
/// Pure inputs must have unit norm within this.
pub const NORM_TOL: f64 = 1e-9;
/// Partial-transpose eigenvalues above `-NEGATIVE_EIGEN_THRESHOLD` count as zero.
pub const NEGATIVE_EIGEN_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("factor dimensions multiply to {product} but matrix is {rows}x{cols}")]
    FactorMismatch { product: usize, rows: usize, cols: usize },
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("trace deviates from one by {0:e}")]
    TraceNotOne(f64),
    #[error("matrix has negative eigenvalue {0:e}")]
    NotPositive(f64),
    #[error("pure state has squared norm {0}")]
    NotNormalized(f64),
    #[error("at least one factor must be kept")]
    EmptyKeep,
    #[error("factor index {index} out of range for {count} factors")]
    InvalidFactor { index: usize, count: usize },
    #[error("factor index {0} listed twice")]
    DuplicateFactor(usize),
    #[error("invalid bipartition: {0}")]
    InvalidCut(String),
    #[error("mixture weights must be non-negative and sum to one")]
    InvalidWeights,
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// A square matrix acting on `⊗_k C^{factors[k]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    factors: Vec<usize>,
    matrix: DMatrix<C64>,
}

impl Operator {
    pub fn new(factors: Vec<usize>, matrix: DMatrix<C64>) -> Result<Operator, DensityError> {
        let product: usize = factors.iter().product();
        if matrix.nrows() != product || matrix.ncols() != product || factors.is_empty() {
            return Err(DensityError::FactorMismatch {
                product,
                rows: matrix.nrows(),
                cols: matrix.ncols(),
            });
        }
        Ok(Operator { factors, matrix })
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut d = vec![0; self.factors.len()];
        for k in (0..self.factors.len()).rev() {
            d[k] = index % self.factors[k];
            index /= self.factors[k];
        }
        d
    }

    fn compose(factors: &[usize], digits: impl Iterator<Item = usize>) -> usize {
        factors.iter().zip(digits).fold(0, |acc, (&f, d)| acc * f + d)
    }

    fn check_subset(&self, set: &[usize]) -> Result<Vec<usize>, DensityError> {
        let count = self.factors.len();
        let mut sorted = set.to_vec();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(DensityError::DuplicateFactor(w[0]));
            }
        }
        if let Some(&index) = sorted.iter().find(|&&i| i >= count) {
            return Err(DensityError::InvalidFactor { index, count });
        }
        Ok(sorted)
    }

    /// Traces out every factor not in `keep`. Kept factors stay in
    /// ascending index order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Operator, DensityError> {
        if keep.is_empty() {
            return Err(DensityError::EmptyKeep);
        }
        let keep = self.check_subset(keep)?;
        let traced: Vec<usize> = (0..self.factors.len()).filter(|k| !keep.contains(k)).collect();
        let kept_factors: Vec<usize> = keep.iter().map(|&k| self.factors[k]).collect();
        let traced_factors: Vec<usize> = traced.iter().map(|&k| self.factors[k]).collect();

        let split: Vec<(usize, usize)> = (0..self.dim())
            .map(|i| {
                let d = self.digits(i);
                (
                    Self::compose(&kept_factors, keep.iter().map(|&k| d[k])),
                    Self::compose(&traced_factors, traced.iter().map(|&k| d[k])),
                )
            })
            .collect();

        let kept_dim: usize = kept_factors.iter().product();
        let mut out = DMatrix::zeros(kept_dim, kept_dim);
        for (i, &(ki, ti)) in split.iter().enumerate() {
            for (j, &(kj, tj)) in split.iter().enumerate() {
                if ti == tj {
                    out[(ki, kj)] += self.matrix[(i, j)];
                }
            }
        }
        Ok(Operator {
            factors: kept_factors,
            matrix: out,
        })
    }

    /// Transposes the indices of the factors in `over`.
    pub fn partial_transpose(&self, over: &[usize]) -> Result<Operator, DensityError> {
        let over = self.check_subset(over)?;
        let n = self.dim();
        let digits: Vec<Vec<usize>> = (0..n).map(|i| self.digits(i)).collect();
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let (mut di, mut dj) = (digits[i].clone(), digits[j].clone());
                for &k in &over {
                    std::mem::swap(&mut di[k], &mut dj[k]);
                }
                let ii = Self::compose(&self.factors, di.into_iter());
                let jj = Self::compose(&self.factors, dj.into_iter());
                out[(ii, jj)] = self.matrix[(i, j)];
            }
        }
        Ok(Operator {
            factors: self.factors.clone(),
            matrix: out,
        })
    }
}

/// Hermitian, unit-trace, positive semidefinite [`Operator`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(Operator);

impl DensityMatrix {
    /// Validates every density-matrix invariant.
    pub fn new(factors: Vec<usize>, matrix: DMatrix<C64>) -> Result<DensityMatrix, DensityError> {
        let rho = DensityMatrix(Operator::new(factors, matrix)?);
        rho.validate()?;
        Ok(rho)
    }

    /// `|ψ><ψ|`, factors `[alice, 2, 2, 2, 2]` (no inertial factor for bare
    /// Fock kets).
    pub fn from_pure(state: &StateVector) -> Result<DensityMatrix, DensityError> {
        let n2 = state.norm_sqr();
        if (n2 - 1.0).abs() > NORM_TOL {
            return Err(DensityError::NotNormalized(n2));
        }
        let mut factors = Vec::with_capacity(MODES + 1);
        if state.alice().dim() > 1 {
            factors.push(state.alice().dim());
        }
        factors.extend([2; MODES]);
        let v = DVector::from_column_slice(state.amplitudes());
        let matrix = &v * v.adjoint();
        Ok(DensityMatrix(Operator { factors, matrix }))
    }

    /// Convex combination of states with identical factor structure.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<DensityMatrix, DensityError> {
        let total: f64 = parts.iter().map(|p| p.0).sum();
        if parts.is_empty() || parts.iter().any(|p| p.0 < 0.0) || (total - 1.0).abs() > TRACE_TOL {
            return Err(DensityError::InvalidWeights);
        }
        let factors = parts[0].1.factors().to_vec();
        let mut m = DMatrix::zeros(parts[0].1.dim(), parts[0].1.dim());
        for &(w, rho) in parts {
            if rho.factors() != factors.as_slice() {
                return Err(DensityError::FactorMismatch {
                    product: factors.iter().product(),
                    rows: rho.dim(),
                    cols: rho.dim(),
                });
            }
            m += rho.matrix() * C64::new(w, 0.0);
        }
        Ok(DensityMatrix(Operator { factors, matrix: m }))
    }

    /// `U ρ U^†` for a unitary change of basis `u`.
    pub fn transform(&self, u: &DMatrix<C64>) -> DensityMatrix {
        let matrix = u * self.0.matrix() * u.adjoint();
        DensityMatrix(Operator {
            factors: self.0.factors.clone(),
            matrix,
        })
    }

    pub fn validate(&self) -> Result<(), DensityError> {
        let m = self.matrix();
        let herm = linalg::hermiticity_deviation(m);
        if herm > HERMITIAN_TOL {
            return Err(DensityError::NotHermitian(herm));
        }
        let tr = (self.0.trace() - C64::new(1.0, 0.0)).norm();
        if tr > TRACE_TOL {
            return Err(DensityError::TraceNotOne(tr));
        }
        let min = linalg::hermitian_eigenvalues(m)?[0];
        if min < -PSD_TOL {
            return Err(DensityError::NotPositive(min));
        }
        Ok(())
    }

    pub fn operator(&self) -> &Operator {
        &self.0
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        self.0.matrix()
    }

    pub fn factors(&self) -> &[usize] {
        self.0.factors()
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// `tr ρ²`.
    pub fn purity(&self) -> f64 {
        let m = self.matrix();
        m.iter().map(|z| z.norm_sqr()).sum()
    }
}

pub fn from_pure(state: &StateVector) -> Result<DensityMatrix, DensityError> {
    DensityMatrix::from_pure(state)
}

/// Reduced state on the factors in `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix, DensityError> {
    let reduced = rho.0.partial_trace(keep)?;
    debug_assert!(linalg::hermiticity_deviation(reduced.matrix()) <= 1e-9);
    Ok(DensityMatrix(reduced))
}

pub fn partial_transpose(op: &Operator, over: &[usize]) -> Result<Operator, DensityError> {
    op.partial_transpose(over)
}

/// Assignment of tensor factors to the two parties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartitionSpec {
    pub alice: Vec<usize>,
    pub bob: Vec<usize>,
}

impl BipartitionSpec {
    pub fn new(alice: Vec<usize>, bob: Vec<usize>) -> BipartitionSpec {
        BipartitionSpec { alice, bob }
    }

    /// Factor 0 against everything else.
    pub fn first_vs_rest(factor_count: usize) -> BipartitionSpec {
        BipartitionSpec {
            alice: vec![0],
            bob: (1..factor_count).collect(),
        }
    }

    fn check(&self, factors: &[usize]) -> Result<(), DensityError> {
        if self.alice.is_empty() || self.bob.is_empty() {
            return Err(DensityError::InvalidCut("both parties need a factor".into()));
        }
        let mut all: Vec<usize> = self.alice.iter().chain(&self.bob).copied().collect();
        all.sort_unstable();
        if all != (0..factors.len()).collect::<Vec<_>>() {
            return Err(DensityError::InvalidCut(format!(
                "parties {:?} | {:?} must partition factors 0..{}",
                self.alice,
                self.bob,
                factors.len()
            )));
        }
        Ok(())
    }

    /// `(d − 1)/2` for the smaller local dimension `d`: the largest
    /// negativity any state on this cut can have.
    pub fn negativity_bound(&self, factors: &[usize]) -> f64 {
        let da: usize = self.alice.iter().map(|&k| factors[k]).product();
        let db: usize = self.bob.iter().map(|&k| factors[k]).product();
        (da.min(db) as f64 - 1.0) / 2.0
    }
}

/// Sum of `|λ|` over the negative eigenvalues of the partial transpose on
/// Alice's factors.
pub fn negativity(rho: &DensityMatrix, cut: &BipartitionSpec) -> Result<f64, DensityError> {
    cut.check(rho.factors())?;
    let pt = rho.0.partial_transpose(&cut.alice)?;
    let values = linalg::hermitian_eigenvalues(pt.matrix())?;
    let n: f64 = values
        .iter()
        .filter(|&&l| l < -NEGATIVE_EIGEN_THRESHOLD)
        .map(|l| -l)
        .sum();
    Ok(n + 0.0)
}
