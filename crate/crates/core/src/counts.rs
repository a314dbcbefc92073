//! Estimators reducing raw photon-count records: the anti-correlation
//! g2(0), heralding rates, storage efficiency, the crosstalk matrix,
//! the zero/one/two-excitation decomposition, and the qudit fidelity
//! lower bound built from mode-resolved heralding rates.
//!
//! Every scalar estimator carries a one-standard-deviation uncertainty
//! propagated from independent Poissonian counts (first-order delta
//! method).

use log::warn;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::state::DensityMatrix;

/// Point estimate plus its one-sigma Poisson uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub sigma: f64,
}

impl Estimate {
    /// An estimate with no statistical uncertainty attached.
    pub fn exact(value: f64) -> Self {
        Self { value, sigma: 0.0 }
    }
}

/// Raw tallies of one counting run: Stokes counts on SPCM 1, anti-Stokes
/// counts on SPCMs 2 and 3, their coincidences, the correlation window,
/// and the estimated accidental coincidences inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct CountRecord {
    pub label: String,
    pub n1: u64,
    pub n2: u64,
    pub n3: u64,
    pub n23: u64,
    pub window_ns: f64,
    pub accidental: u64,
}

impl CountRecord {
    pub fn new(
        label: impl Into<String>,
        n1: u64,
        n2: u64,
        n3: u64,
        n23: u64,
        window_ns: f64,
        accidental: u64,
    ) -> Result<Self> {
        let label = label.into();
        if n23 > n2.min(n3) {
            return Err(Error::InvalidRecord {
                label,
                reason: format!("n23 = {n23} exceeds min(n2, n3) = {}", n2.min(n3)),
            });
        }
        if !(window_ns > 0.0) {
            return Err(Error::InvalidRecord {
                label,
                reason: format!("window_ns = {window_ns} must be positive"),
            });
        }
        Ok(Self {
            label,
            n1,
            n2,
            n3,
            n23,
            window_ns,
            accidental,
        })
    }
}

/// Mode-resolved rates for one storage stage of a qudit characterization:
/// per-mode heralding rates and populations before/after storage, the
/// full-qudit projection rate q_f, and the anti-correlation g2 measured
/// at that stage.
#[derive(Debug, Clone, Serialize)]
pub struct ModeSet {
    pub modes: Vec<String>,
    pub heralding_before: Vec<f64>,
    pub heralding_after: Vec<f64>,
    pub population_before: Vec<f64>,
    pub population_after: Vec<f64>,
    pub q_f: f64,
    pub g2: f64,
}

impl ModeSet {
    pub fn validate(&self) -> Result<()> {
        let m = self.modes.len();
        for (name, v) in [
            ("heralding_before", &self.heralding_before),
            ("heralding_after", &self.heralding_after),
            ("population_before", &self.population_before),
            ("population_after", &self.population_after),
        ] {
            if v.len() != m {
                return Err(Error::DimensionMismatch {
                    left: v.len(),
                    right: m,
                });
            }
            if v.iter().any(|x| *x < 0.0) {
                return Err(Error::NotPositive {
                    name: match name {
                        "heralding_before" => "heralding_before",
                        "heralding_after" => "heralding_after",
                        "population_before" => "population_before",
                        _ => "population_after",
                    },
                    value: -1.0,
                });
            }
        }
        if self.q_f < 0.0 || self.g2 < 0.0 {
            return Err(Error::NotPositive {
                name: "q_f/g2",
                value: self.q_f.min(self.g2),
            });
        }
        Ok(())
    }

    /// Sum over modes of q_i / h_i for the chosen stage (the S of the
    /// excitation balance p1 + 2 p2 = S).
    pub fn sum_q_over_h(&self, stage: Stage) -> Result<f64> {
        self.validate()?;
        let (h, q) = match stage {
            Stage::Before => (&self.heralding_before, &self.population_before),
            Stage::After => (&self.heralding_after, &self.population_after),
        };
        let mut s = 0.0;
        for (i, (&hi, &qi)) in h.iter().zip(q).enumerate() {
            if hi <= 0.0 {
                return Err(Error::UndefinedEstimator {
                    reason: format!("heralding rate of mode {i} is zero"),
                });
            }
            s += qi / hi;
        }
        Ok(s)
    }

    /// Eq.-5-style fidelity bound for the chosen stage, using this set's
    /// q_f and excitation decomposition derived elsewhere.
    pub fn fidelity_bound(&self, stage: Stage, decomp: &ExcitationDecomposition) -> Result<f64> {
        let h = match stage {
            Stage::Before => &self.heralding_before,
            Stage::After => &self.heralding_after,
        };
        qudit_fidelity_bound(h, self.q_f, decomp)
    }
}

/// Which side of the memory a stage-resolved quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Before,
    After,
}

/// Zero/one/two-photon probabilities of the heralded state.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExcitationDecomposition {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
}

impl ExcitationDecomposition {
    pub fn validate(&self) -> Result<()> {
        let sum = self.p0 + self.p1 + self.p2;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InconsistentData {
                reason: format!("p0+p1+p2 = {sum} != 1"),
            });
        }
        for (name, v) in [("p0", self.p0), ("p1", self.p1), ("p2", self.p2)] {
            if v < -1e-12 {
                return Err(Error::NotPositive { name, value: v });
            }
        }
        Ok(())
    }
}

/// Second-order cross-correlation at zero delay: g2 = n1 n23 / (n2 n3).
pub fn g2_zero(rec: &CountRecord) -> Result<Estimate> {
    if rec.n2 == 0 || rec.n3 == 0 {
        return Err(Error::UndefinedEstimator {
            reason: format!("record {}: n2*n3 = 0", rec.label),
        });
    }
    let (n1, n2, n3, n23) = (
        rec.n1 as f64,
        rec.n2 as f64,
        rec.n3 as f64,
        rec.n23 as f64,
    );
    let value = n1 * n23 / (n2 * n3);
    // delta method on independent Poisson counts, absolute form so that
    // zero counts contribute zero variance
    let var = (n23 / (n2 * n3)).powi(2) * n1
        + (n1 / (n2 * n3)).powi(2) * n23
        + (n1 * n23 / (n2 * n2 * n3)).powi(2) * n2
        + (n1 * n23 / (n2 * n3 * n3)).powi(2) * n3;
    Ok(Estimate {
        value,
        sigma: var.sqrt(),
    })
}

/// Heralding rate h = (n2 + n3 [- accidental]) / n1, floored at zero.
/// Over-subtraction (negative numerator) is floored with a warning.
pub fn heralding_rate(rec: &CountRecord, subtract_accidentals: bool) -> Result<Estimate> {
    if rec.n1 == 0 {
        return Err(Error::UndefinedEstimator {
            reason: format!("record {}: n1 = 0", rec.label),
        });
    }
    let n1 = rec.n1 as f64;
    let raw = (rec.n2 + rec.n3) as f64;
    let mut numerator = raw;
    let mut var_numerator = raw;
    if subtract_accidentals {
        numerator -= rec.accidental as f64;
        var_numerator += rec.accidental as f64;
        if numerator < 0.0 {
            warn!(
                "record {:?}: accidental subtraction drove counts negative ({numerator}); \
                 flooring the heralding rate at 0",
                rec.label
            );
            numerator = 0.0;
        }
    }
    let value = numerator / n1;
    let var = var_numerator / (n1 * n1) + value * value / n1;
    Ok(Estimate {
        value,
        sigma: var.sqrt(),
    })
}

/// Storage efficiency eta_s = h_after / h_before. Values above 1 are kept
/// (they signal statistical fluctuation) but warned about.
pub fn storage_efficiency(h_after: &Estimate, h_before: &Estimate) -> Result<Estimate> {
    if !(h_before.value > 0.0) {
        return Err(Error::UndefinedEstimator {
            reason: format!("h_before = {} is not positive", h_before.value),
        });
    }
    if h_after.value < 0.0 {
        return Err(Error::NotPositive {
            name: "h_after",
            value: h_after.value,
        });
    }
    let value = h_after.value / h_before.value;
    if value > 1.0 {
        warn!("storage efficiency {value:.4} exceeds 1; statistical fluctuation likely");
    }
    let var = (h_after.sigma / h_before.value).powi(2)
        + (h_after.value * h_before.sigma / (h_before.value * h_before.value)).powi(2);
    Ok(Estimate {
        value,
        sigma: var.sqrt(),
    })
}

/// Crosstalk matrix CE[i,j] = 2 N[i,j] / (N[i,i] + N[j,j]) from an MxM
/// matrix of photon counts indexed (input mode, output mode).
pub fn crosstalk_matrix(counts: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if counts.nrows() != counts.ncols() {
        return Err(Error::NotSquare {
            rows: counts.nrows(),
            cols: counts.ncols(),
        });
    }
    let m = counts.nrows();
    if m == 0 {
        return Err(Error::EmptyInput("count matrix has no entries"));
    }
    if counts.iter().any(|&c| c < 0.0) {
        return Err(Error::NotPositive {
            name: "counts",
            value: -1.0,
        });
    }
    let mut ce = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let denom = counts[(i, i)] + counts[(j, j)];
            if denom <= 0.0 {
                return Err(Error::UndefinedEstimator {
                    reason: format!("N[{i},{i}] + N[{j},{j}] = 0"),
                });
            }
            ce[(i, j)] = 2.0 * counts[(i, j)] / denom;
        }
    }
    Ok(ce)
}

/// Mean and maximum of the off-diagonal crosstalk entries; the maximum
/// is returned with its (input, output) index.
pub fn crosstalk_summary(ce: &DMatrix<f64>) -> (f64, f64, (usize, usize)) {
    let m = ce.nrows();
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut max = f64::NEG_INFINITY;
    let mut arg = (0, 0);
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            sum += ce[(i, j)];
            count += 1;
            if ce[(i, j)] > max {
                max = ce[(i, j)];
                arg = (i, j);
            }
        }
    }
    (sum / count as f64, max, arg)
}

/// Solves the excitation balance
///
///   p1 + 2 p2 = S,   g2 = 2 p2 / p1^2,   p0 + p1 + p2 = 1
///
/// for (p0, p1, p2). For g2 > 0 the positive root is
/// p1 = (-1 + sqrt(1 + 4 g2 S)) / (2 g2); for g2 = 0, p1 = S.
pub fn solve_excitations(sum_q_over_h: f64, g2: f64) -> Result<ExcitationDecomposition> {
    if sum_q_over_h < 0.0 {
        return Err(Error::NotPositive {
            name: "sum_q_over_h",
            value: sum_q_over_h,
        });
    }
    if g2 < 0.0 {
        return Err(Error::NotPositive {
            name: "g2",
            value: g2,
        });
    }
    let s = sum_q_over_h;
    let (p1, p2) = if g2 > 0.0 {
        let p1 = ((1.0 + 4.0 * g2 * s).sqrt() - 1.0) / (2.0 * g2);
        (p1, g2 * p1 * p1 / 2.0)
    } else {
        (s, 0.0)
    };
    let p0 = 1.0 - p1 - p2;
    if p0 < -1e-9 {
        return Err(Error::InconsistentData {
            reason: format!(
                "S = {s} and g2 = {g2} imply p0 = {p0} < 0; \
                 the two measurements are jointly infeasible"
            ),
        });
    }
    Ok(ExcitationDecomposition { p0, p1, p2 })
}

/// Lower bound on the M-dimensional qudit fidelity:
///
///   F >= p1 q_f / (T (p1 + 2 p2)) (sum_i sqrt(t'_i / M))^2,
///   T = (sum_i h_i)/M,  t'_i = h_i/(M T),
///
/// evaluated as p1 q_f (sum_i sqrt(h_i))^2 / ((p1 + 2 p2) M^2 T^2) and
/// clamped to [0,1].
pub fn qudit_fidelity_bound(
    heralding: &[f64],
    q_f: f64,
    decomp: &ExcitationDecomposition,
) -> Result<f64> {
    decomp.validate()?;
    if heralding.is_empty() {
        return Err(Error::EmptyInput("heralding rates must be nonempty"));
    }
    if heralding.iter().any(|&h| h <= 0.0) {
        return Err(Error::UndefinedEstimator {
            reason: "every mode needs a positive heralding rate".into(),
        });
    }
    if q_f < 0.0 {
        return Err(Error::NotPositive {
            name: "q_f",
            value: q_f,
        });
    }
    if decomp.p1 <= 0.0 {
        return Err(Error::UndefinedEstimator {
            reason: format!("p1 = {} must be positive", decomp.p1),
        });
    }
    let m = heralding.len() as f64;
    let mean_heralding = heralding.iter().sum::<f64>() / m;
    let sum_sqrt: f64 = heralding.iter().map(|h| h.sqrt()).sum();
    let numerator = decomp.p1 * q_f * (sum_sqrt * sum_sqrt);
    let denominator = (decomp.p1 + 2.0 * decomp.p2) * (m * m) * (mean_heralding * mean_heralding);
    Ok((numerator / denominator).clamp(0.0, 1.0))
}

/// Heralded-state mixture rho_e = p0 rho0 + p1 rho1 + p2 rho2. Weights
/// within the decomposition tolerance of zero are clamped; the mixture is
/// renormalized by the weight sum so the trace stays exactly consistent.
pub fn mixture_state(
    decomp: &ExcitationDecomposition,
    rho0: &DensityMatrix,
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
) -> Result<DensityMatrix> {
    decomp.validate()?;
    let dim = rho0.dim();
    for rho in [rho1, rho2] {
        if rho.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: rho.dim(),
                right: dim,
            });
        }
    }
    let w = [
        decomp.p0.max(0.0),
        decomp.p1.max(0.0),
        decomp.p2.max(0.0),
    ];
    let total: f64 = w.iter().sum();
    let mut m = rho0.matrix() * num_complex::Complex64::new(w[0] / total, 0.0);
    m += rho1.matrix() * num_complex::Complex64::new(w[1] / total, 0.0);
    m += rho2.matrix() * num_complex::Complex64::new(w[2] / total, 0.0);
    Ok(DensityMatrix::new_unchecked(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::PureState;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, Poisson};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn rec(n1: u64, n2: u64, n3: u64, n23: u64, accidental: u64) -> CountRecord {
        CountRecord::new("test", n1, n2, n3, n23, 800.0, accidental).unwrap()
    }

    #[test]
    fn g2_of_ideal_single_photon_is_zero() {
        let e = g2_zero(&rec(1000, 10, 10, 0, 0)).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.sigma, 0.0);
    }

    #[test]
    fn g2_arithmetic() {
        let e = g2_zero(&rec(100_000, 1750, 1750, 20, 0)).unwrap();
        assert_close(e.value, 0.6530612244897959, 1e-15);
        assert!(e.sigma > 0.0);
    }

    #[test]
    fn g2_undefined_without_anti_stokes_counts() {
        assert!(matches!(
            g2_zero(&rec(1000, 0, 10, 0, 0)),
            Err(Error::UndefinedEstimator { .. })
        ));
    }

    #[test]
    fn g2_of_coherent_light_is_one() {
        // Poissonian photons split 50/50 onto two click detectors stay
        // independent, so the estimator must land on 1
        let mut rng = StdRng::seed_from_u64(99);
        let trials = 1_000_000u64;
        let mu = 0.05f64;
        let poisson = Poisson::new(mu).unwrap();
        let (mut n2, mut n3, mut n23) = (0u64, 0u64, 0u64);
        for _ in 0..trials {
            let n = poisson.sample(&mut rng) as u64;
            let mut c2 = 0u64;
            for _ in 0..n {
                if rng.random::<bool>() {
                    c2 += 1;
                }
            }
            let c3 = n - c2;
            n2 += (c2 > 0) as u64;
            n3 += (c3 > 0) as u64;
            n23 += (c2 > 0 && c3 > 0) as u64;
        }
        let e = g2_zero(&rec(trials, n2, n3, n23, 0)).unwrap();
        assert!(
            (e.value - 1.0).abs() < 3.0 * e.sigma,
            "g2 = {} +- {}",
            e.value,
            e.sigma
        );
    }

    #[test]
    fn g2_of_thermal_light_is_two() {
        // thermal (geometric) photon statistics: g2(0) = 2
        let mut rng = StdRng::seed_from_u64(7);
        let trials = 1_000_000u64;
        let mu = 0.05f64;
        let p_stop = 1.0 / (1.0 + mu); // P(n = k) = p (1-p)^k
        let (mut n2, mut n3, mut n23) = (0u64, 0u64, 0u64);
        for _ in 0..trials {
            let mut n = 0u64;
            while rng.random::<f64>() > p_stop {
                n += 1;
            }
            let mut c2 = 0u64;
            for _ in 0..n {
                if rng.random::<bool>() {
                    c2 += 1;
                }
            }
            let c3 = n - c2;
            n2 += (c2 > 0) as u64;
            n3 += (c3 > 0) as u64;
            n23 += (c2 > 0 && c3 > 0) as u64;
        }
        let e = g2_zero(&rec(trials, n2, n3, n23, 0)).unwrap();
        // binary detectors bias the estimate by O(mu); keep mu small and
        // compare within 3 sigma of the thermal value
        assert!(
            (e.value - 2.0).abs() < 3.0 * e.sigma + 0.06,
            "g2 = {} +- {}",
            e.value,
            e.sigma
        );
    }

    #[test]
    fn heralding_rate_arithmetic() {
        let e = heralding_rate(&rec(100_000, 1745, 1745, 0, 0), false).unwrap();
        assert_close(e.value, 0.0349, 1e-15);
    }

    #[test]
    fn heralding_rate_full_subtraction() {
        let e = heralding_rate(&rec(1000, 20, 15, 0, 35), true).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn heralding_rate_flag_is_noop_without_accidentals() {
        let r = rec(1000, 20, 15, 0, 0);
        let on = heralding_rate(&r, true).unwrap();
        let off = heralding_rate(&r, false).unwrap();
        assert_eq!(on.value, off.value);
    }

    #[test]
    fn heralding_rate_subtraction_never_increases() {
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..100 {
            let r = rec(
                rng.random_range(1..10_000),
                rng.random_range(0..500),
                rng.random_range(0..500),
                0,
                rng.random_range(0..100),
            );
            let with = heralding_rate(&r, true).unwrap();
            let without = heralding_rate(&r, false).unwrap();
            assert!(with.value <= without.value);
        }
    }

    #[test]
    fn heralding_rate_needs_stokes_counts() {
        assert!(matches!(
            heralding_rate(&rec(0, 10, 10, 0, 0), false),
            Err(Error::UndefinedEstimator { .. })
        ));
    }

    #[test]
    fn storage_efficiency_examples() {
        let e = storage_efficiency(&Estimate::exact(0.02870), &Estimate::exact(0.03491)).unwrap();
        assert_close(e.value, 0.8221140074477228, 1e-15);
        let one = storage_efficiency(&Estimate::exact(0.03), &Estimate::exact(0.03)).unwrap();
        assert_eq!(one.value, 1.0);
        let zero = storage_efficiency(&Estimate::exact(0.0), &Estimate::exact(0.03)).unwrap();
        assert_eq!(zero.value, 0.0);
        assert!(storage_efficiency(&Estimate::exact(0.03), &Estimate::exact(0.0)).is_err());
    }

    #[test]
    fn crosstalk_diagonal_only_counts() {
        let counts = DMatrix::from_diagonal_element(3, 3, 1000.0);
        let ce = crosstalk_matrix(&counts).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(ce[(i, j)], if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn crosstalk_complete_confusion() {
        let counts = DMatrix::from_element(2, 2, 500.0);
        let ce = crosstalk_matrix(&counts).unwrap();
        assert_eq!(ce[(0, 1)], 1.0);
    }

    #[test]
    fn crosstalk_symmetric_counts_give_symmetric_errors() {
        let mut rng = StdRng::seed_from_u64(21);
        let mut counts = DMatrix::zeros(5, 5);
        for i in 0..5 {
            for j in i..5 {
                let v = rng.random_range(1.0..1000.0);
                counts[(i, j)] = v;
                counts[(j, i)] = v;
            }
        }
        let ce = crosstalk_matrix(&counts).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(ce[(i, j)], ce[(j, i)]);
            }
        }
    }

    #[test]
    fn crosstalk_zero_diagonal_is_rejected() {
        let counts = DMatrix::zeros(2, 2);
        assert!(matches!(
            crosstalk_matrix(&counts),
            Err(Error::UndefinedEstimator { .. })
        ));
    }

    #[test]
    fn solve_excitations_no_doubles() {
        let d = solve_excitations(0.03, 0.0).unwrap();
        assert_close(d.p0, 0.97, 1e-15);
        assert_close(d.p1, 0.03, 1e-15);
        assert_eq!(d.p2, 0.0);
    }

    #[test]
    fn solve_excitations_quadratic_root() {
        let d = solve_excitations(0.03, 0.35).unwrap();
        assert_close(d.p1, 0.02969144630569647, 1e-12);
        assert_close(d.p2, 1.542768471517099e-4, 1e-12);
        assert_close(d.p0, 0.9701542768471518, 1e-12);
    }

    #[test]
    fn solve_excitations_round_trips_forward_model() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..1000 {
            let p1 = rng.random_range(1e-4..0.5);
            let p2 = rng.random_range(0.0..p1 * p1); // keep p0 > 0 comfortably
            let s = p1 + 2.0 * p2;
            let g2 = 2.0 * p2 / (p1 * p1);
            let d = solve_excitations(s, g2).unwrap();
            assert_close(d.p1, p1, 1e-10);
            assert_close(d.p2, p2, 1e-10);
        }
    }

    #[test]
    fn solve_excitations_rejects_infeasible_pair() {
        assert!(matches!(
            solve_excitations(5.0, 0.0),
            Err(Error::InconsistentData { .. })
        ));
    }

    #[test]
    fn qudit_bound_perfect_uniform_case() {
        // dyadic rates keep the arithmetic exact: the bound must be 1.0
        let h = vec![0.0625; 11];
        let d = solve_excitations(0.6875, 0.0).unwrap();
        let bound = qudit_fidelity_bound(&h, 0.0625, &d).unwrap();
        assert_eq!(bound, 1.0);
    }

    #[test]
    fn qudit_bound_linear_in_qf() {
        let h = vec![0.03; 11];
        let d = solve_excitations(0.03, 0.0).unwrap();
        let bound = qudit_fidelity_bound(&h, 0.872 * 0.03, &d).unwrap();
        assert_close(bound, 0.872, 1e-12);
    }

    #[test]
    fn qudit_bound_penalizes_nonuniform_heralding() {
        let d = solve_excitations(0.03, 0.0).unwrap();
        let q_f = 0.025;
        let uniform = qudit_fidelity_bound(&[0.03; 4], q_f, &d).unwrap();
        let skewed = qudit_fidelity_bound(&[0.05, 0.02, 0.03, 0.02], q_f, &d).unwrap();
        assert!(skewed < uniform);
    }

    #[test]
    fn qudit_bound_increases_with_qf() {
        let h = vec![0.031, 0.029, 0.03, 0.033];
        let d = solve_excitations(0.03, 0.2).unwrap();
        let mut prev = -1.0;
        for k in 1..=10 {
            let b = qudit_fidelity_bound(&h, 0.003 * k as f64, &d).unwrap();
            assert!(b > prev);
            assert!(b <= 1.0);
            prev = b;
        }
    }

    #[test]
    fn qudit_bound_rejects_zero_heralding() {
        let d = solve_excitations(0.03, 0.0).unwrap();
        assert!(matches!(
            qudit_fidelity_bound(&[0.03, 0.0], 0.02, &d),
            Err(Error::UndefinedEstimator { .. })
        ));
    }

    #[test]
    fn mixture_recovers_single_component() {
        let rho0 = DensityMatrix::basis_state(3, 0).unwrap();
        let rho1 = DensityMatrix::basis_state(3, 1).unwrap();
        let rho2 = DensityMatrix::basis_state(3, 2).unwrap();
        let d = ExcitationDecomposition {
            p0: 0.0,
            p1: 1.0,
            p2: 0.0,
        };
        let mix = mixture_state(&d, &rho0, &rho1, &rho2).unwrap();
        assert_eq!(mix.get(1, 1).re, 1.0);
    }

    #[test]
    fn equal_mixture_of_orthogonal_states() {
        let rho0 = DensityMatrix::basis_state(3, 0).unwrap();
        let rho1 = DensityMatrix::basis_state(3, 1).unwrap();
        let rho2 = DensityMatrix::basis_state(3, 2).unwrap();
        let third = 1.0 / 3.0;
        let d = ExcitationDecomposition {
            p0: third,
            p1: third,
            p2: 1.0 - 2.0 * third,
        };
        let mix = mixture_state(&d, &rho0, &rho1, &rho2).unwrap();
        let psi = PureState::basis(3, 0).unwrap();
        assert_close(mix.expectation(&psi).unwrap(), third, 1e-12);
    }

    #[test]
    fn random_mixture_is_valid_state() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..20 {
            let rho0 = crate::state::test_support::random_density(3, &mut rng);
            let rho1 = crate::state::test_support::random_density(3, &mut rng);
            let rho2 = crate::state::test_support::random_density(3, &mut rng);
            let p1 = rng.random_range(0.0..1.0);
            let p2 = rng.random_range(0.0..1.0 - p1);
            let d = ExcitationDecomposition {
                p0: 1.0 - p1 - p2,
                p1,
                p2,
            };
            let mix = mixture_state(&d, &rho0, &rho1, &rho2).unwrap();
            assert!(DensityMatrix::new(mix.matrix().clone()).is_ok());
        }
    }

    #[test]
    fn record_invariants_are_enforced() {
        assert!(CountRecord::new("x", 10, 5, 5, 6, 800.0, 0).is_err());
        assert!(CountRecord::new("x", 10, 5, 5, 5, 0.0, 0).is_err());
        assert!(CountRecord::new("x", 10, 5, 7, 5, 800.0, 0).is_ok());
    }
}
