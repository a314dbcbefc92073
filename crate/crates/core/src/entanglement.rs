//! Entanglement-of-formation lower bound for noisy maximally entangled
//! qudit pairs, via the pairwise-coherence witness
//!
//!   E_F >= -log2(1 - B^2/2),
//!   B = (2/sqrt(|C|)) sum_{(j,k) in C, j<k}
//!         (|<jj|rho|kk>| - sqrt(<jk|rho|jk> <kj|rho|kj>)).
//!
//! A nonpositive B certifies nothing and maps to a 0-ebit bound.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::DensityMatrix;

/// The noisy qudit-qudit state (1-p_n)|Psi_M><Psi_M| + (p_n/M^2) I,
/// with |Psi_M> = (1/sqrt(M)) sum_i |i,i>. Built analytically:
/// <jj|rho|kk> = (1-p_n)/M + delta_jk p_n/M^2 and <jk|rho|jk> = p_n/M^2.
pub fn build_noisy_pair(m: u32, p_n: f64) -> Result<DensityMatrix> {
    if m < 2 {
        return Err(Error::OutOfRange {
            name: "m",
            value: m as f64,
            min: 2.0,
            max: f64::INFINITY,
        });
    }
    if !(0.0..=1.0).contains(&p_n) {
        return Err(Error::OutOfRange {
            name: "p_n",
            value: p_n,
            min: 0.0,
            max: 1.0,
        });
    }
    let m = m as usize;
    let dim = m * m;
    let coherence = (1.0 - p_n) / m as f64;
    let mixed = p_n / dim as f64;
    let mut rho = DMatrix::<Complex64>::zeros(dim, dim);
    for j in 0..m {
        for k in 0..m {
            rho[(j * m + j, k * m + k)] = Complex64::new(coherence, 0.0);
        }
    }
    for i in 0..dim {
        rho[(i, i)] += Complex64::new(mixed, 0.0);
    }
    // convex mixture of two valid states, valid by construction
    Ok(DensityMatrix::new_unchecked(rho))
}

/// E_F lower bound from explicit matrix elements of a dim-m^2 state.
/// `pair_set` holds distinct mode pairs (j,k), j != k, indices < m.
pub fn eof_lower_bound(rho: &DensityMatrix, m: u32, pair_set: &[(u32, u32)]) -> Result<f64> {
    let m = m as usize;
    if rho.dim() != m * m {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: m * m,
        });
    }
    if pair_set.is_empty() {
        return Err(Error::EmptyInput("pair_set must be nonempty"));
    }
    let mut seen = std::collections::HashSet::new();
    for &(j, k) in pair_set {
        let (j, k) = (j as usize, k as usize);
        if j >= m || k >= m {
            return Err(Error::DimensionMismatch {
                left: j.max(k),
                right: m,
            });
        }
        if j == k || !seen.insert((j.min(k), j.max(k))) {
            return Err(Error::EmptyInput("pair_set entries must be distinct mode pairs"));
        }
    }

    let mut sum = 0.0;
    for &(a, b) in pair_set {
        let (j, k) = (a.min(b) as usize, a.max(b) as usize);
        let coherence = rho.get(j * m + j, k * m + k).norm();
        let cross_jk = rho.get(j * m + k, j * m + k).re.max(0.0);
        let cross_kj = rho.get(k * m + j, k * m + j).re.max(0.0);
        sum += coherence - (cross_jk * cross_kj).sqrt();
    }
    let b = 2.0 / (pair_set.len() as f64).sqrt() * sum;
    bound_from_b(b)
}

/// Same bound specialized to `build_noisy_pair` states, where every pair
/// contributes the identical term (1-p_n)/m - p_n/m^2:
/// B = 2 sqrt(pair_count) ((1-p_n)/m - p_n/m^2).
pub fn eof_closed_form_depolarizing(m: u32, p_n: f64, pair_count: u32) -> Result<f64> {
    if m < 2 {
        return Err(Error::OutOfRange {
            name: "m",
            value: m as f64,
            min: 2.0,
            max: f64::INFINITY,
        });
    }
    if !(0.0..=1.0).contains(&p_n) {
        return Err(Error::OutOfRange {
            name: "p_n",
            value: p_n,
            min: 0.0,
            max: 1.0,
        });
    }
    let max_pairs = m * (m - 1) / 2;
    if pair_count < 1 || pair_count > max_pairs {
        return Err(Error::OutOfRange {
            name: "pair_count",
            value: pair_count as f64,
            min: 1.0,
            max: max_pairs as f64,
        });
    }
    let mf = m as f64;
    let term = (1.0 - p_n) / mf - p_n / (mf * mf);
    let b = 2.0 * (pair_count as f64).sqrt() * term;
    bound_from_b(b)
}

/// All m(m-1)/2 mode pairs, the set that maximizes the certified bound
/// for the depolarizing family (B grows as sqrt(|C|) times a constant
/// per-pair term).
pub fn all_pairs(m: u32) -> Vec<(u32, u32)> {
    let mut pairs = Vec::with_capacity((m * (m - 1) / 2) as usize);
    for j in 0..m {
        for k in (j + 1)..m {
            pairs.push((j, k));
        }
    }
    pairs
}

fn bound_from_b(b: f64) -> Result<f64> {
    if b <= 0.0 {
        return Ok(0.0);
    }
    let b2 = b * b;
    if b2 >= 2.0 {
        return Err(Error::InvalidBoundState { b_squared: b2 });
    }
    Ok(-(1.0 - b2 / 2.0).log2())
}
