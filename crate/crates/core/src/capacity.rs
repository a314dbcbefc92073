//! Information capacity of a multimode memory viewed as a discrete
//! memoryless channel: closed form for the depolarizing family and a
//! Blahut-Arimoto maximizer for arbitrary conditional distributions.
//!
//! All capacities are in bits (base-2 logs); 0*log2(0) is taken as 0.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

const LN2: f64 = std::f64::consts::LN_2;

/// Conditional distribution p(y|x) of an M-input channel.
/// Rows are indexed by the input x, columns by the output y.
#[derive(Debug, Clone)]
pub struct ChannelMatrix {
    m_in: usize,
    m_out: usize,
    p_cond: DMatrix<f64>,
}

impl ChannelMatrix {
    /// Validates that every entry is a probability and every row sums to 1.
    pub fn new(p_cond: DMatrix<f64>) -> Result<Self> {
        let (m_in, m_out) = (p_cond.nrows(), p_cond.ncols());
        if m_in == 0 || m_out == 0 {
            return Err(Error::EmptyInput("channel matrix has no entries"));
        }
        for x in 0..m_in {
            let mut sum = 0.0;
            for y in 0..m_out {
                let v = p_cond[(x, y)];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::OutOfRange {
                        name: "p(y|x)",
                        value: v,
                        min: 0.0,
                        max: 1.0,
                    });
                }
                sum += v;
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::NotStochastic { row: x, sum });
            }
        }
        Ok(Self { m_in, m_out, p_cond })
    }

    pub fn m_in(&self) -> usize {
        self.m_in
    }

    pub fn m_out(&self) -> usize {
        self.m_out
    }

    pub fn p_cond(&self) -> &DMatrix<f64> {
        &self.p_cond
    }
}

/// Outcome of the Blahut-Arimoto iteration.
#[derive(Debug, Clone, Serialize)]
pub struct CapacityResult {
    /// Mutual information of `optimal_input`, a lower bound on capacity (bits).
    pub capacity_bits: f64,
    /// Input distribution reached at termination.
    pub optimal_input: Vec<f64>,
    /// Iterations performed.
    pub iterations: usize,
    /// True when the duality gap dropped below tolerance.
    pub converged: bool,
}

/// The symmetric depolarizing channel on `m` modes: diagonal
/// 1-(m-1)p_n/m, off-diagonal p_n/m.
pub fn depolarizing_channel(m: u32, p_n: f64) -> Result<ChannelMatrix> {
    if m < 2 {
        return Err(Error::OutOfRange {
            name: "m",
            value: m as f64,
            min: 2.0,
            max: f64::INFINITY,
        });
    }
    check_pn(p_n)?;
    let mf = m as f64;
    let off = p_n / mf;
    let diag = 1.0 - (mf - 1.0) * off;
    let n = m as usize;
    let p = DMatrix::from_fn(n, n, |x, y| if x == y { diag } else { off });
    ChannelMatrix::new(p)
}

/// Inverts F_s = 1 - (M-1) p_n / M to the depolarizing parameter.
/// Fidelities below the model floor 1/m are rejected rather than clamped.
pub fn fidelity_to_pn(f: f64, m: u32) -> Result<f64> {
    if m < 2 {
        return Err(Error::OutOfRange {
            name: "m",
            value: m as f64,
            min: 2.0,
            max: f64::INFINITY,
        });
    }
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::OutOfRange {
            name: "fidelity",
            value: f,
            min: 0.0,
            max: 1.0,
        });
    }
    let mf = m as f64;
    let floor = 1.0 / mf;
    if f < floor {
        return Err(Error::FidelityBelowModelFloor {
            fidelity: f,
            modes: m,
            floor,
        });
    }
    Ok((mf * (1.0 - f) / (mf - 1.0)).clamp(0.0, 1.0))
}

/// Closed-form capacity of the depolarizing channel (bits):
/// log2 m + d log2 d + (m-1)(p_n/m) log2(p_n/m), d = 1-(m-1)p_n/m.
pub fn capacity_depolarizing(m: u32, p_n: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::OutOfRange {
            name: "m",
            value: m as f64,
            min: 2.0,
            max: f64::INFINITY,
        });
    }
    check_pn(p_n)?;
    let mf = m as f64;
    let off = p_n / mf;
    let diag = 1.0 - (mf - 1.0) * off;
    let c = mf.log2() + xlog2(diag) + (mf - 1.0) * xlog2(off);
    Ok(c.clamp(0.0, mf.log2()))
}

/// Blahut-Arimoto capacity maximization. Stops when the standard
/// upper/lower duality gap drops below `tol` bits, or at `max_iter`.
pub fn capacity_blahut_arimoto(
    ch: &ChannelMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<CapacityResult> {
    if tol <= 0.0 {
        return Err(Error::NotPositive {
            name: "tol",
            value: tol,
        });
    }
    let (result, _) = blahut_arimoto_impl(ch, tol, max_iter);
    Ok(result)
}

/// Same iteration, additionally returning the per-iteration lower bounds.
/// The sequence is nondecreasing; exposed for tests and diagnostics.
pub fn blahut_arimoto_trace(
    ch: &ChannelMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<(CapacityResult, Vec<f64>)> {
    if tol <= 0.0 {
        return Err(Error::NotPositive {
            name: "tol",
            value: tol,
        });
    }
    Ok(blahut_arimoto_impl(ch, tol, max_iter))
}

fn blahut_arimoto_impl(
    ch: &ChannelMatrix,
    tol: f64,
    max_iter: usize,
) -> (CapacityResult, Vec<f64>) {
    let (m_in, m_out) = (ch.m_in, ch.m_out);
    let w = &ch.p_cond;
    let mut p = vec![1.0 / m_in as f64; m_in];
    let mut q = vec![0.0f64; m_out];
    let mut d = vec![0.0f64; m_in]; // D(W(.|x) || q) in nats
    let mut history = Vec::new();
    let mut lower_bits = 0.0;
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=max_iter {
        iterations = iter;
        for y in 0..m_out {
            q[y] = (0..m_in).map(|x| p[x] * w[(x, y)]).sum();
        }
        for x in 0..m_in {
            let mut acc = 0.0;
            for y in 0..m_out {
                let wxy = w[(x, y)];
                if wxy > 0.0 {
                    acc += wxy * (wxy / q[y]).ln();
                }
            }
            d[x] = acc;
        }
        let lower: f64 = (0..m_in).map(|x| p[x] * d[x]).sum();
        let upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        lower_bits = (lower / LN2).max(0.0);
        history.push(lower_bits);
        if (upper - lower) / LN2 < tol {
            converged = true;
            break;
        }
        // p(x) <- p(x) exp(D_x) / Z
        let mut z = 0.0;
        for x in 0..m_in {
            p[x] *= d[x].exp();
            z += p[x];
        }
        for px in p.iter_mut() {
            *px /= z;
        }
    }

    (
        CapacityResult {
            capacity_bits: lower_bits,
            optimal_input: p,
            iterations,
            converged,
        },
        history,
    )
}

fn check_pn(p_n: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p_n) {
        return Err(Error::OutOfRange {
            name: "p_n",
            value: p_n,
            min: 0.0,
            max: 1.0,
        });
    }
    Ok(())
}

/// x log2(x) with the 0 log 0 = 0 convention.
fn xlog2(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn depolarizing_channel_noiseless_is_identity() {
        let ch = depolarizing_channel(2, 0.0).unwrap();
        assert_eq!(ch.p_cond()[(0, 0)], 1.0);
        assert_eq!(ch.p_cond()[(0, 1)], 0.0);
        assert_eq!(ch.p_cond()[(1, 1)], 1.0);
    }

    #[test]
    fn depolarizing_channel_fully_mixed() {
        let ch = depolarizing_channel(2, 1.0).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert_close(ch.p_cond()[(x, y)], 0.5, 1e-15);
            }
        }
    }

    #[test]
    fn depolarizing_channel_eleven_modes() {
        let ch = depolarizing_channel(11, 0.0077).unwrap();
        assert_close(ch.p_cond()[(0, 0)], 0.993, 1e-12);
        assert_close(ch.p_cond()[(0, 1)], 0.0007, 1e-12);
    }

    #[test]
    fn depolarizing_channel_rejects_bad_args() {
        assert!(depolarizing_channel(1, 0.0).is_err());
        assert!(depolarizing_channel(4, -0.1).is_err());
        assert!(depolarizing_channel(4, 1.5).is_err());
    }

    #[test]
    fn fidelity_to_pn_examples() {
        assert_close(fidelity_to_pn(1.0, 2).unwrap(), 0.0, 1e-15);
        assert_close(fidelity_to_pn(1.0, 17).unwrap(), 0.0, 1e-15);
        assert_close(fidelity_to_pn(0.993, 11).unwrap(), 0.0077, 1e-12);
        assert_close(fidelity_to_pn(0.5, 2).unwrap(), 1.0, 1e-15);
    }

    #[test]
    fn fidelity_to_pn_rejects_below_floor() {
        assert!(matches!(
            fidelity_to_pn(0.4, 2),
            Err(Error::FidelityBelowModelFloor { .. })
        ));
        assert!(fidelity_to_pn(1.0 / 11.0 - 1e-6, 11).is_err());
    }

    #[test]
    fn capacity_closed_form_limits() {
        for m in [2u32, 4, 11, 20] {
            assert_close(
                capacity_depolarizing(m, 0.0).unwrap(),
                (m as f64).log2(),
                1e-12,
            );
        }
        assert_close(capacity_depolarizing(2, 1.0).unwrap(), 0.0, 1e-12);
    }

    #[test]
    fn capacity_closed_form_eleven_modes() {
        // direct evaluation of the closed form at the 99.3%-fidelity point
        assert_close(
            capacity_depolarizing(11, 0.0077).unwrap(),
            3.376005679941077,
            1e-12,
        );
    }

    #[test]
    fn capacity_monotone_in_noise() {
        for m in [2u32, 4, 11, 20] {
            let mut prev = f64::INFINITY;
            for i in 0..=100 {
                let c = capacity_depolarizing(m, i as f64 / 100.0).unwrap();
                assert!(c <= prev + 1e-12, "m={m} i={i}: {c} > {prev}");
                prev = c;
            }
        }
    }

    #[test]
    fn ba_identity_channel() {
        let ch = ChannelMatrix::new(DMatrix::identity(4, 4)).unwrap();
        let r = capacity_blahut_arimoto(&ch, 1e-9, 10_000).unwrap();
        assert!(r.converged);
        assert_close(r.capacity_bits, 2.0, 1e-9);
        for px in &r.optimal_input {
            assert_close(*px, 0.25, 1e-9);
        }
    }

    #[test]
    fn ba_matches_depolarizing_closed_form() {
        let ch = depolarizing_channel(11, 0.0077).unwrap();
        let r = capacity_blahut_arimoto(&ch, 1e-9, 10_000).unwrap();
        assert!(r.converged);
        assert_close(r.capacity_bits, capacity_depolarizing(11, 0.0077).unwrap(), 1e-6);
    }

    #[test]
    fn ba_binary_symmetric_channel() {
        let eps = 0.11;
        let p = DMatrix::from_row_slice(2, 2, &[1.0 - eps, eps, eps, 1.0 - eps]);
        let ch = ChannelMatrix::new(p).unwrap();
        let r = capacity_blahut_arimoto(&ch, 1e-12, 10_000).unwrap();
        // textbook closed form 1 - H2(eps), evaluated here as the oracle
        let h2 = -eps * eps.log2() - (1.0 - eps) * (1.0 - eps).log2();
        assert_close(r.capacity_bits, 1.0 - h2, 1e-9);
    }

    #[test]
    fn ba_asymmetric_channel_matches_grid_search() {
        // independent oracle: brute-force I(p) over a fine input grid
        let w = DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.4, 0.6]);
        let mutual = |p0: f64| {
            let p = [p0, 1.0 - p0];
            let mut q = [0.0f64; 2];
            for y in 0..2 {
                q[y] = p[0] * w[(0, y)] + p[1] * w[(1, y)];
            }
            let mut i = 0.0;
            for x in 0..2 {
                for y in 0..2 {
                    let wxy: f64 = w[(x, y)];
                    if wxy > 0.0 && p[x] > 0.0 {
                        i += p[x] * wxy * (wxy / q[y]).log2();
                    }
                }
            }
            i
        };
        let mut best = 0.0f64;
        for k in 0..=1_000_000 {
            best = best.max(mutual(k as f64 * 1e-6));
        }
        let ch = ChannelMatrix::new(w.clone()).unwrap();
        let r = capacity_blahut_arimoto(&ch, 1e-12, 10_000).unwrap();
        assert!(r.converged);
        assert_close(r.capacity_bits, best, 1e-9);
    }

    #[test]
    fn ba_lower_bound_is_nondecreasing() {
        let w = DMatrix::from_row_slice(
            3,
            3,
            &[0.7, 0.2, 0.1, 0.15, 0.7, 0.15, 0.05, 0.25, 0.7],
        );
        let ch = ChannelMatrix::new(w).unwrap();
        let (r, history) = blahut_arimoto_trace(&ch, 1e-12, 10_000).unwrap();
        assert!(r.converged);
        for pair in history.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-12, "{} < {}", pair[1], pair[0]);
        }
    }

    #[test]
    fn ba_reports_non_convergence() {
        let w = DMatrix::from_row_slice(2, 2, &[0.9, 0.1, 0.4, 0.6]);
        let ch = ChannelMatrix::new(w).unwrap();
        let r = capacity_blahut_arimoto(&ch, 1e-15, 2).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 2);
    }

    #[test]
    fn ba_capacity_never_exceeds_log_m() {
        let w = DMatrix::from_row_slice(
            3,
            3,
            &[0.5, 0.3, 0.2, 0.1, 0.8, 0.1, 0.3, 0.3, 0.4],
        );
        let ch = ChannelMatrix::new(w).unwrap();
        let r = capacity_blahut_arimoto(&ch, 1e-9, 10_000).unwrap();
        assert!(r.capacity_bits <= 3.0f64.log2() + 1e-9);
        let sum: f64 = r.optimal_input.iter().sum();
        assert_close(sum, 1.0, 1e-9);
        assert!(r.optimal_input.iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn channel_matrix_validation() {
        let bad = DMatrix::from_row_slice(2, 2, &[0.9, 0.2, 0.5, 0.5]);
        assert!(matches!(
            ChannelMatrix::new(bad),
            Err(Error::NotStochastic { .. })
        ));
        let neg = DMatrix::from_row_slice(2, 2, &[1.1, -0.1, 0.5, 0.5]);
        assert!(ChannelMatrix::new(neg).is_err());
    }
}
