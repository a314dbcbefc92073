//! Density matrices, pure states, and the Uhlmann fidelity.
//!
//! Everything here works on small (dim ≤ a few hundred) dense complex
//! matrices; eigendecompositions go through nalgebra's Hermitian solver.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Max |m[i,j] - conj(m[j,i])| tolerated by the DensityMatrix invariant.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Max |trace - 1| tolerated.
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest eigenvalue allowed before a matrix stops counting as PSD.
pub const PSD_TOL: f64 = -1e-10;
/// Looser Hermiticity gate used by `matrix_sqrt_psd` on raw matrices.
pub const SQRT_HERMITICITY_TOL: f64 = 1e-8;

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    elements: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates all three invariants and wraps the matrix.
    pub fn new(elements: DMatrix<Complex64>) -> Result<Self> {
        if elements.nrows() != elements.ncols() {
            return Err(Error::NotSquare {
                rows: elements.nrows(),
                cols: elements.ncols(),
            });
        }
        let asym = max_asymmetry(&elements);
        if asym > HERMITICITY_TOL {
            return Err(Error::NotHermitian {
                asymmetry: asym,
                tol: HERMITICITY_TOL,
            });
        }
        let trace = elements.trace().re;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace { trace });
        }
        let min_ev = hermitian_eigenvalues(&elements)
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_ev < PSD_TOL {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min_ev,
            });
        }
        Ok(Self {
            dim: elements.nrows(),
            elements,
        })
    }

    /// Wraps a matrix that is valid by construction (convex mixtures of
    /// valid states, analytic noisy-pair formulas, ...). Callers must
    /// guarantee the invariants; debug builds re-check them.
    pub(crate) fn new_unchecked(elements: DMatrix<Complex64>) -> Self {
        debug_assert!(elements.is_square());
        debug_assert!(max_asymmetry(&elements) <= 1e-9);
        debug_assert!((elements.trace().re - 1.0).abs() <= 1e-9);
        Self {
            dim: elements.nrows(),
            elements,
        }
    }

    /// |psi><psi| for a pure state.
    pub fn from_pure(psi: &PureState) -> Self {
        let v = psi.amplitudes();
        let mut m = DMatrix::zeros(psi.dim(), psi.dim());
        for i in 0..psi.dim() {
            for j in 0..psi.dim() {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        Self::new_unchecked(m)
    }

    /// The maximally mixed state I/d.
    pub fn maximally_mixed(dim: usize) -> Self {
        let w = Complex64::new(1.0 / dim as f64, 0.0);
        Self::new_unchecked(DMatrix::from_diagonal_element(dim, dim, w))
    }

    /// Computational-basis state |k><k|.
    pub fn basis_state(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::DimensionMismatch { left: k, right: dim });
        }
        let mut m = DMatrix::zeros(dim, dim);
        m[(k, k)] = Complex64::new(1.0, 0.0);
        Ok(Self::new_unchecked(m))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.elements
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.elements[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.elements.trace().re
    }

    /// <psi|rho|psi>, the overlap with a pure state.
    pub fn expectation(&self, psi: &PureState) -> Result<f64> {
        if psi.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: psi.dim(),
                right: self.dim,
            });
        }
        let v = psi.amplitudes();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += v[i].conj() * self.elements[(i, j)] * v[j];
            }
        }
        Ok(acc.re)
    }
}

/// A normalized pure state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dim: usize,
    amplitudes: DVector<Complex64>,
}

impl PureState {
    /// Validates the unit-norm invariant (within 1e-12).
    pub fn new(amplitudes: DVector<Complex64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            dim: amplitudes.len(),
            amplitudes,
        })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(amplitudes: DVector<Complex64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self {
            dim: amplitudes.len(),
            amplitudes: amplitudes / Complex64::new(norm, 0.0),
        })
    }

    /// Computational-basis state |k>.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::DimensionMismatch { left: k, right: dim });
        }
        let mut v = DVector::zeros(dim);
        v[k] = Complex64::new(1.0, 0.0);
        Self::new(v)
    }

    /// Uniform superposition (1/sqrt(d)) sum_k |k>.
    pub fn uniform(dim: usize) -> Self {
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Self {
            dim,
            amplitudes: DVector::from_element(dim, a),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    /// <self|other>.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }
}

fn max_asymmetry(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = m[(i, j)] - m[(j, i)].conj();
            worst = worst.max(d.norm());
        }
    }
    worst
}

/// Eigenvalues of a Hermitian matrix (real, unsorted).
fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    m.clone().symmetric_eigen().eigenvalues.as_slice().to_vec()
}

/// Relative rank cutoff inside `matrix_sqrt_psd`: eigenvalues below
/// `RANK_TOL * lambda_max` are treated as exact zeros. Eigensolver noise
/// on a rank-deficient input sits at ~1e-16 and would otherwise surface
/// as sqrt(1e-16) = 1e-8 phantom components.
const RANK_TOL: f64 = 1e-13;

/// Hermitian square root via eigendecomposition. Eigenvalues in
/// [PSD_TOL, 0) and below the relative rank cutoff are clipped to zero;
/// anything below PSD_TOL is rejected.
pub fn matrix_sqrt_psd(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let asym = max_asymmetry(m);
    if asym > SQRT_HERMITICITY_TOL {
        return Err(Error::NotHermitian {
            asymmetry: asym,
            tol: SQRT_HERMITICITY_TOL,
        });
    }
    let eig = m.clone().symmetric_eigen();
    let min_ev = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_ev < PSD_TOL {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: min_ev,
        });
    }
    let max_ev = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let cutoff = max_ev * RANK_TOL;
    let n = m.nrows();
    let mut out = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        let ev = eig.eigenvalues[k];
        let lambda = if ev <= cutoff { 0.0 } else { ev.sqrt() };
        if lambda == 0.0 {
            continue;
        }
        let v = eig.eigenvectors.column(k);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += Complex64::new(lambda, 0.0) * v[i] * v[j].conj();
            }
        }
    }
    // symmetrize away accumulation roundoff
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = (out[(i, j)] + out[(j, i)].conj()) * 0.5;
            out[(i, j)] = avg;
            out[(j, i)] = avg.conj();
        }
        out[(i, i)] = Complex64::new(out[(i, i)].re, 0.0);
    }
    Ok(out)
}

/// Uhlmann fidelity F(a,b) = [Tr sqrt(sqrt(a) b sqrt(a))]^2, clamped to
/// [0,1]. Evaluated as the squared nuclear norm of sqrt(b) sqrt(a):
/// sqrt(a) b sqrt(a) = X^dag X with X = sqrt(b) sqrt(a), so the trace of
/// its square root is the sum of X's singular values. The SVD computes
/// small singular values directly, without the precision loss of
/// rooting near-zero eigenvalues of the triple product.
pub fn uhlmann_fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let sa = matrix_sqrt_psd(a.matrix())?;
    let sb = matrix_sqrt_psd(b.matrix())?;
    let x = &sb * &sa;
    let tr: f64 = x.singular_values().iter().sum();
    Ok((tr * tr).clamp(0.0, 1.0))
}

/// Depolarizing channel: (1-p_n) rho + (p_n/M) I.
pub fn depolarize(rho: &DensityMatrix, p_n: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p_n) {
        return Err(Error::OutOfRange {
            name: "p_n",
            value: p_n,
            min: 0.0,
            max: 1.0,
        });
    }
    let dim = rho.dim();
    let keep = Complex64::new(1.0 - p_n, 0.0);
    let mut m = rho.matrix() * keep;
    let mix = p_n / dim as f64;
    for i in 0..dim {
        m[(i, i)] += Complex64::new(mix, 0.0);
    }
    Ok(DensityMatrix::new_unchecked(m))
}
