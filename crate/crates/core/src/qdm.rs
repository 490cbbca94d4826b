//! Density matrices and the numerics behind the quantum divergence:
//! validation, Hermitian eigendecomposition, matrix logarithm, and
//! coordinate distances.
//!
//! All logarithms are natural; divergences are reported in nats.

use nalgebra::{Complex, DMatrix, DVector};
use thiserror::Error;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;

/// Numerical cutoffs for state validation and rank decisions.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    /// Max allowed |M - M†| entry deviation.
    pub herm: f64,
    /// Max allowed |Tr M - 1|.
    pub trace: f64,
    /// Eigenvalues below -psd reject the state.
    pub psd: f64,
    /// Eigenvalues at or below this count as zero (rank decisions).
    pub rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            herm: 1e-9,
            trace: 1e-9,
            psd: 1e-9,
            rank: 1e-12,
        }
    }
}

#[derive(Debug, Error)]
pub enum QdmError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("not Hermitian: max |M - M†| entry = {violation:.3e}")]
    NotHermitian { violation: f64 },
    #[error("trace is not one: |Tr - 1| = {violation:.3e}")]
    TraceNotOne { violation: f64 },
    #[error("not positive semidefinite: min eigenvalue = {min_eigenvalue:.3e}")]
    NotPsd { min_eigenvalue: f64 },
    #[error("state is singular: eigenvalue {eigenvalue:.3e} <= rank tolerance")]
    SingularState { eigenvalue: f64 },
    #[error("divergence undefined: second argument singular where first has weight {weight:.3e}")]
    SingularSecondArgument { weight: f64 },
    #[error("dimension mismatch: {a} vs {b}")]
    DimensionMismatch { a: usize, b: usize },
    #[error("eigensolver failed to converge for dim {dim}")]
    ConvergenceFailure { dim: usize },
}

/// A validated d-level quantum state: Hermitian, unit trace, PSD.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    dim: usize,
    mat: CMat,
}

impl DensityMatrix {
    /// Validate a raw complex matrix as a density matrix.
    ///
    /// Checks the three conditions in order (Hermitian, unit trace,
    /// PSD) and reports the first violated one with its magnitude.
    pub fn validate(m: &CMat, tol: &Tolerances) -> Result<Self, QdmError> {
        if m.nrows() != m.ncols() {
            return Err(QdmError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let d = m.nrows();
        let mut herm_violation = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                let diff = (m[(i, j)] - m[(j, i)].conj()).norm();
                herm_violation = herm_violation.max(diff);
            }
        }
        if herm_violation > tol.herm {
            return Err(QdmError::NotHermitian {
                violation: herm_violation,
            });
        }
        let tr: C64 = (0..d).map(|i| m[(i, i)]).sum();
        let trace_violation = (tr - C64::new(1.0, 0.0)).norm();
        if trace_violation > tol.trace {
            return Err(QdmError::TraceNotOne {
                violation: trace_violation,
            });
        }
        let hermitized = hermitize(m);
        let eig = eig_hermitian(&hermitized)?;
        let min_ev = eig.eigenvalues[d - 1];
        if min_ev < -tol.psd {
            return Err(QdmError::NotPsd {
                min_eigenvalue: min_ev,
            });
        }
        Ok(DensityMatrix {
            dim: d,
            mat: hermitized,
        })
    }

    /// Wrap a matrix the caller guarantees to be a valid state.
    /// Used on hot paths where validity holds by construction.
    pub fn new_unchecked(mat: CMat) -> Self {
        let dim = mat.nrows();
        DensityMatrix { dim, mat }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    /// Tr rho^2, equals 1 exactly for pure states.
    pub fn purity(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                s += (self.mat[(i, j)] * self.mat[(j, i)]).re;
            }
        }
        s
    }
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues sorted
/// descending, eigenvectors as unitary columns in matching order.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: CMat,
}

fn hermitize(m: &CMat) -> CMat {
    let mh = m.adjoint();
    (m + mh).map(|z| z * 0.5)
}

fn eig_hermitian(m: &CMat) -> Result<EigenDecomposition, QdmError> {
    let d = m.nrows();
    let eig = nalgebra::SymmetricEigen::try_new(m.clone(), f64::EPSILON, 10_000)
        .ok_or(QdmError::ConvergenceFailure { dim: d })?;
    // Descending sort, stable on index for determinism.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let eigenvalues = DVector::from_iterator(d, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut eigenvectors = CMat::zeros(d, d);
    for (k, &i) in order.iter().enumerate() {
        eigenvectors.set_column(k, &eig.eigenvectors.column(i));
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Hermitian eigendecomposition with descending eigenvalues.
pub fn hermitian_eig(rho: &DensityMatrix) -> Result<EigenDecomposition, QdmError> {
    eig_hermitian(rho.matrix())
}

/// Eigendecomposition of an arbitrary Hermitian matrix (not
/// necessarily a state); symmetrizes the input first.
pub fn hermitian_eig_raw(m: &CMat) -> Result<EigenDecomposition, QdmError> {
    eig_hermitian(&hermitize(m))
}

/// Matrix logarithm of a full-rank state: X diag(ln lambda_i) X*.
pub fn matrix_log(rho: &DensityMatrix, tol: &Tolerances) -> Result<CMat, QdmError> {
    let eig = hermitian_eig(rho)?;
    let d = rho.dim();
    if eig.eigenvalues[d - 1] <= tol.rank {
        return Err(QdmError::SingularState {
            eigenvalue: eig.eigenvalues[d - 1],
        });
    }
    Ok(spectral_map(&eig, |l| l.ln()))
}

/// ln on the support of rho, zero on its kernel. The contraction
/// Tr sigma * support_log(rho) realizes the 0 log 0 convention when
/// sigma lives inside rho's support; pair with a kernel-weight check
/// when that containment is not structural.
pub fn support_log(rho: &DensityMatrix, tol: &Tolerances) -> Result<CMat, QdmError> {
    let eig = hermitian_eig(rho)?;
    Ok(spectral_map(&eig, |l| if l > tol.rank { l.ln() } else { 0.0 }))
}

/// Matrix exponential of a Hermitian matrix.
pub fn matrix_exp(h: &CMat) -> Result<CMat, QdmError> {
    let eig = eig_hermitian(&hermitize(h))?;
    Ok(spectral_map(&eig, |l| l.exp()))
}

fn spectral_map(eig: &EigenDecomposition, f: impl Fn(f64) -> f64) -> CMat {
    let d = eig.eigenvalues.len();
    let diag = CMat::from_diagonal(&DVector::from_iterator(
        d,
        eig.eigenvalues.iter().map(|&l| C64::new(f(l), 0.0)),
    ));
    &eig.eigenvectors * diag * eig.eigenvectors.adjoint()
}

/// Tr sigma log sigma with the 0 log 0 = 0 convention: eigenvalues at
/// or below the rank tolerance are dropped.
pub fn entropy_term(sigma: &DensityMatrix, tol: &Tolerances) -> Result<f64, QdmError> {
    let eig = hermitian_eig(sigma)?;
    Ok(eig
        .eigenvalues
        .iter()
        .filter(|&&l| l > tol.rank)
        .map(|&l| l * l.ln())
        .sum())
}

/// Re Tr(sigma * L) for a precomputed Hermitian L (typically a
/// support_log of the second divergence argument).
pub fn cross_term(sigma: &DensityMatrix, log_rho: &CMat) -> f64 {
    let d = sigma.dim();
    let m = sigma.matrix();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            s += (m[(i, j)] * log_rho[(j, i)]).re;
        }
    }
    s
}

/// Quantum divergence D(sigma || rho) = Tr sigma (log sigma - log rho),
/// in nats.
///
/// sigma may be rank-deficient (0 log 0 = 0); rho must be full rank on
/// every direction where sigma carries weight, otherwise the divergence
/// is infinite and `SingularSecondArgument` is returned.
pub fn divergence(
    sigma: &DensityMatrix,
    rho: &DensityMatrix,
    tol: &Tolerances,
) -> Result<f64, QdmError> {
    if sigma.dim() != rho.dim() {
        return Err(QdmError::DimensionMismatch {
            a: sigma.dim(),
            b: rho.dim(),
        });
    }
    let d = rho.dim();
    let eig = hermitian_eig(rho)?;
    // Weight of sigma in rho's kernel decides finiteness.
    let mut log_on_support = CMat::zeros(d, d);
    for k in 0..d {
        let l = eig.eigenvalues[k];
        let v = eig.eigenvectors.column(k);
        if l > tol.rank {
            let lv = C64::new(l.ln(), 0.0);
            for i in 0..d {
                for j in 0..d {
                    log_on_support[(i, j)] += v[i] * v[j].conj() * lv;
                }
            }
        } else {
            let mut w = C64::new(0.0, 0.0);
            for i in 0..d {
                for j in 0..d {
                    w += v[i].conj() * sigma.matrix()[(i, j)] * v[j];
                }
            }
            if w.re > 1e-10 {
                return Err(QdmError::SingularSecondArgument { weight: w.re });
            }
        }
    }
    let v = entropy_term(sigma, tol)? - cross_term(sigma, &log_on_support);
    // Clip the floating-point shadow below zero.
    Ok(if v < 0.0 && v > -1e-9 { 0.0 } else { v })
}

/// Squared Euclidean distance between coordinate vectors.
pub fn coordinate_distance_sq(a: &[f64], b: &[f64]) -> Result<f64, QdmError> {
    if a.len() != b.len() {
        return Err(QdmError::DimensionMismatch {
            a: a.len(),
            b: b.len(),
        });
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}
