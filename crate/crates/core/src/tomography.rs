//! Maximum-likelihood reconstruction of qubit density matrices from
//! projective count data, and Monte-Carlo (Poisson-resampling)
//! uncertainty estimation for the resulting fidelities.
//!
//! The state is parameterized through a lower-triangular factor
//! T = [[t0, 0], [t2 + i t3, t1]] as rho = T^dag T / tr(T^dag T), which is
//! PSD and unit-trace by construction. Counts are modeled as independent
//! Poisson variables with mean flux * exposure * <pi|rho|pi>; the total
//! flux is a fifth nuisance parameter. The likelihood is maximized by a
//! Nelder-Mead simplex with deterministic random restarts.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{uhlmann_fidelity, DensityMatrix, PureState};

/// The six single-qubit analysis states used for state preparation and
/// reconstruction: the two basis modes and their four balanced
/// superpositions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisLabel {
    /// |l1>
    L1,
    /// |l2>
    L2,
    /// (|l1> + |l2>)/sqrt(2)
    D,
    /// (|l1> - |l2>)/sqrt(2)
    M,
    /// (|l1> + i|l2>)/sqrt(2)
    L,
    /// (|l1> - i|l2>)/sqrt(2)
    R,
}

impl BasisLabel {
    pub const ALL: [BasisLabel; 6] = [
        BasisLabel::L1,
        BasisLabel::L2,
        BasisLabel::D,
        BasisLabel::M,
        BasisLabel::L,
        BasisLabel::R,
    ];

    /// The projector state |pi> for this label.
    pub fn projector(self) -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (a, b) = match self {
            BasisLabel::L1 => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
            BasisLabel::L2 => (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)),
            BasisLabel::D => (Complex64::new(s, 0.0), Complex64::new(s, 0.0)),
            BasisLabel::M => (Complex64::new(s, 0.0), Complex64::new(-s, 0.0)),
            BasisLabel::L => (Complex64::new(s, 0.0), Complex64::new(0.0, s)),
            BasisLabel::R => (Complex64::new(s, 0.0), Complex64::new(0.0, -s)),
        };
        PureState::new(DVector::from_vec(vec![a, b])).expect("unit vectors")
    }
}

impl std::str::FromStr for BasisLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L1" | "l1" => Ok(BasisLabel::L1),
            "L2" | "l2" => Ok(BasisLabel::L2),
            "D" | "d" => Ok(BasisLabel::D),
            "M" | "m" => Ok(BasisLabel::M),
            "L" | "l" => Ok(BasisLabel::L),
            "R" | "r" => Ok(BasisLabel::R),
            _ => Err(Error::InvalidRecord {
                label: s.into(),
                reason: "basis label must be one of L1, L2, D, M, L, R".into(),
            }),
        }
    }
}

/// One projective measurement: which state was projected on, how many
/// counts were registered, and the relative acquisition normalization.
#[derive(Debug, Clone)]
pub struct ProjectiveMeasurement {
    pub basis_label: BasisLabel,
    pub projector: PureState,
    pub counts: u64,
    pub exposure: f64,
}

impl ProjectiveMeasurement {
    pub fn from_label(basis_label: BasisLabel, counts: u64, exposure: f64) -> Result<Self> {
        if !(exposure > 0.0) {
            return Err(Error::NotPositive {
                name: "exposure",
                value: exposure,
            });
        }
        Ok(Self {
            basis_label,
            projector: basis_label.projector(),
            counts,
            exposure,
        })
    }
}

/// Reconstruction output. Fidelity fields are filled by callers that
/// compare against a target state.
#[derive(Debug, Clone)]
pub struct TomographyResult {
    pub rho: DensityMatrix,
    pub log_likelihood: f64,
    pub fidelity_vs_target: Option<f64>,
    pub fidelity_sigma: Option<f64>,
    pub converged: bool,
}

const N_PARAMS: usize = 5; // t0, t1, t2, t3, ln(flux)
const N_RESTARTS: usize = 5;
const RESTART_SEED: u64 = 0x746f_6d6f; // fixed: reconstruction is deterministic

/// Maximum-likelihood estimate of the qubit state behind `measurements`.
///
/// Needs an informationally sufficient design: at least four projectors
/// whose (1, Bloch-vector) rows span R^4 (the {L1, L2, D, L} set
/// qualifies once the total flux is fitted as a nuisance parameter).
pub fn mle_reconstruct(
    measurements: &[ProjectiveMeasurement],
    tol: f64,
    max_iter: usize,
) -> Result<TomographyResult> {
    validate_design(measurements)?;
    if !(tol > 0.0) {
        return Err(Error::NotPositive {
            name: "tol",
            value: tol,
        });
    }

    let flux0 = initial_flux(measurements);
    let mut starts = vec![[
        std::f64::consts::FRAC_1_SQRT_2,
        std::f64::consts::FRAC_1_SQRT_2,
        0.0,
        0.0,
        flux0.ln(),
    ]];
    let mut rng = ChaCha8Rng::seed_from_u64(RESTART_SEED);
    for _ in 1..N_RESTARTS {
        starts.push([
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            flux0.ln() + rng.random_range(-0.3..0.3),
        ]);
    }
    Ok(mle_from_starts(measurements, tol, max_iter, &starts))
}

fn mle_from_starts(
    measurements: &[ProjectiveMeasurement],
    tol: f64,
    max_iter: usize,
    starts: &[[f64; N_PARAMS]],
) -> TomographyResult {
    let mut best: Option<(f64, [f64; N_PARAMS], bool)> = None;
    for start in starts {
        let (params, nll, converged) =
            nelder_mead(|p| neg_log_likelihood(p, measurements), *start, tol, max_iter);
        if best.as_ref().is_none_or(|(b, _, _)| nll < *b) {
            best = Some((nll, params, converged));
        }
    }
    let (nll, params, converged) = best.expect("at least one start");
    TomographyResult {
        rho: params_to_rho(&params),
        log_likelihood: -nll,
        fidelity_vs_target: None,
        fidelity_sigma: None,
        converged,
    }
}

/// Uhlmann fidelity between two reconstructions.
pub fn storage_fidelity(before: &TomographyResult, after: &TomographyResult) -> Result<f64> {
    uhlmann_fidelity(&before.rho, &after.rho)
}

/// One-sigma spread of the fidelity against `target` under Poisson
/// resampling of the observed counts. Each resample re-runs the MLE
/// (warm-started from the original estimate plus one perturbed restart)
/// on counts drawn from Poisson(observed). Deterministic for a fixed
/// seed regardless of worker scheduling; resamples that fail to converge
/// are skipped, and more than 10% failures is an error.
pub fn poisson_bootstrap(
    measurements: &[ProjectiveMeasurement],
    target: &DensityMatrix,
    n_resamples: usize,
    seed: u64,
) -> Result<f64> {
    if n_resamples < 100 {
        return Err(Error::OutOfRange {
            name: "n_resamples",
            value: n_resamples as f64,
            min: 100.0,
            max: f64::INFINITY,
        });
    }
    let original = mle_reconstruct(measurements, 1e-8, 5000)?;
    let warm = rho_to_params(&original.rho, initial_flux(measurements));

    let fidelities: Vec<Option<f64>> = (0..n_resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            let resampled: Vec<ProjectiveMeasurement> = measurements
                .iter()
                .map(|m| {
                    let counts = if m.counts == 0 {
                        0
                    } else {
                        Poisson::new(m.counts as f64)
                            .expect("positive mean")
                            .sample(&mut rng) as u64
                    };
                    ProjectiveMeasurement {
                        counts,
                        ..m.clone()
                    }
                })
                .collect();
            let mut perturbed = warm;
            for p in perturbed.iter_mut().take(4) {
                *p += rng.random_range(-0.05..0.05);
            }
            let fit = mle_from_starts(&resampled, 1e-8, 5000, &[warm, perturbed]);
            if !fit.converged {
                return None;
            }
            uhlmann_fidelity(&fit.rho, target).ok()
        })
        .collect();

    let ok: Vec<f64> = fidelities.iter().flatten().copied().collect();
    let failed = n_resamples - ok.len();
    if failed * 10 > n_resamples {
        return Err(Error::BootstrapFailures {
            failed,
            total: n_resamples,
        });
    }
    let mean = ok.iter().sum::<f64>() / ok.len() as f64;
    let var = ok.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (ok.len() - 1) as f64;
    Ok(var.sqrt())
}

/// rho(t) = T^dag T / tr with T = [[t0, 0], [t2 + i t3, t1]].
fn params_to_rho(p: &[f64; N_PARAMS]) -> DensityMatrix {
    let (t0, t1, t2, t3) = (p[0], p[1], p[2], p[3]);
    let c = Complex64::new(t2, t3);
    let r00 = t0 * t0 + c.norm_sqr();
    let r11 = t1 * t1;
    let r01 = c.conj() * t1;
    let tr = r00 + r11;
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(r00 / tr, 0.0),
            r01 / tr,
            r01.conj() / tr,
            Complex64::new(r11 / tr, 0.0),
        ],
    );
    DensityMatrix::new_unchecked(m)
}

/// Inverse of `params_to_rho` (Cholesky of rho), used for warm starts.
fn rho_to_params(rho: &DensityMatrix, flux: f64) -> [f64; N_PARAMS] {
    let r00 = rho.get(0, 0).re.max(0.0);
    let r11 = rho.get(1, 1).re.max(1e-12);
    let r10 = rho.get(1, 0);
    let t1 = r11.sqrt();
    let c = r10 / t1; // t2 + i t3
    let t0 = (r00 - c.norm_sqr()).max(0.0).sqrt();
    [t0, t1, c.re, c.im, flux.ln()]
}

fn initial_flux(measurements: &[ProjectiveMeasurement]) -> f64 {
    let total: f64 = measurements.iter().map(|m| m.counts as f64).sum();
    let weight: f64 = measurements.iter().map(|m| m.exposure * 0.5).sum();
    (total / weight).max(1e-9)
}

/// Negative Poisson log-likelihood (dropping the n! terms):
/// sum_k mu_k - n_k ln(mu_k), mu_k = flux * exposure_k * <pi_k|rho|pi_k>.
fn neg_log_likelihood(p: &[f64; N_PARAMS], measurements: &[ProjectiveMeasurement]) -> f64 {
    if p[4] > 700.0 {
        return f64::INFINITY; // flux overflow guard
    }
    let rho = params_to_rho(p);
    let flux = p[4].exp();
    nll_of_state(&rho, flux, measurements)
}

/// The same objective for an explicit (rho, flux) pair; exposed for
/// likelihood comparisons against other estimators.
pub fn nll_of_state(
    rho: &DensityMatrix,
    flux: f64,
    measurements: &[ProjectiveMeasurement],
) -> f64 {
    let mut nll = 0.0;
    for m in measurements {
        let prob = rho.expectation(&m.projector).unwrap_or(0.0).max(0.0);
        let mu = flux * m.exposure * prob;
        nll += mu;
        if m.counts > 0 {
            if mu <= 0.0 {
                return f64::INFINITY;
            }
            nll -= m.counts as f64 * mu.ln();
        }
    }
    nll
}

fn validate_design(measurements: &[ProjectiveMeasurement]) -> Result<()> {
    if measurements.len() < 4 {
        return Err(Error::DegenerateDesign {
            rank: measurements.len(),
        });
    }
    // rows (1, bloch(pi)); the design must span R^4 for (flux, r) to be
    // identifiable
    let mut design = DMatrix::zeros(measurements.len(), 4);
    for (i, m) in measurements.iter().enumerate() {
        let a = m.projector.amplitudes();
        let (u, v) = (a[0], a[1]);
        design[(i, 0)] = 1.0;
        design[(i, 1)] = 2.0 * (u.conj() * v).re; // <sigma_x>
        design[(i, 2)] = 2.0 * (u.conj() * v).im; // <sigma_y>
        design[(i, 3)] = u.norm_sqr() - v.norm_sqr(); // <sigma_z>
    }
    let rank = design.rank(1e-9);
    if rank < 4 {
        return Err(Error::DegenerateDesign { rank });
    }
    Ok(())
}

/// Plain Nelder-Mead simplex minimizer. Converges when both the function
/// spread and the simplex diameter fall below `tol` (relative to the best
/// vertex), or gives up after `max_iter` iterations.
fn nelder_mead<F: Fn(&[f64; N_PARAMS]) -> f64>(
    f: F,
    start: [f64; N_PARAMS],
    tol: f64,
    max_iter: usize,
) -> ([f64; N_PARAMS], f64, bool) {
    const ALPHA: f64 = 1.0; // reflection
    const GAMMA: f64 = 2.0; // expansion
    const BETA: f64 = 0.5; // contraction
    const DELTA: f64 = 0.5; // shrink

    let mut simplex: Vec<[f64; N_PARAMS]> = vec![start];
    for i in 0..N_PARAMS {
        let mut v = start;
        v[i] += 0.1 * (1.0 + v[i].abs());
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut converged = false;

    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..simplex.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let best = order[0];
        let worst = order[N_PARAMS];
        let second_worst = order[N_PARAMS - 1];

        let f_spread = (values[worst] - values[best]).abs();
        let x_spread = simplex
            .iter()
            .map(|v| {
                v.iter()
                    .zip(&simplex[best])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if f_spread <= tol * (1.0 + values[best].abs()) && x_spread <= tol * 10.0 {
            converged = true;
            break;
        }

        // centroid of all but the worst vertex
        let mut centroid = [0.0; N_PARAMS];
        for (idx, v) in simplex.iter().enumerate() {
            if idx == worst {
                continue;
            }
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / N_PARAMS as f64;
            }
        }

        let blend = |a: &[f64; N_PARAMS], b: &[f64; N_PARAMS], t: f64| {
            let mut out = [0.0; N_PARAMS];
            for i in 0..N_PARAMS {
                out[i] = a[i] + t * (b[i] - a[i]);
            }
            out
        };

        let reflected = blend(&centroid, &simplex[worst], -ALPHA);
        let f_reflected = f(&reflected);
        if f_reflected < values[best] {
            let expanded = blend(&centroid, &simplex[worst], -GAMMA);
            let f_expanded = f(&expanded);
            if f_expanded < f_reflected {
                simplex[worst] = expanded;
                values[worst] = f_expanded;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            }
            continue;
        }
        if f_reflected < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = f_reflected;
            continue;
        }
        let contracted = if f_reflected < values[worst] {
            blend(&centroid, &reflected, BETA)
        } else {
            blend(&centroid, &simplex[worst], BETA)
        };
        let f_contracted = f(&contracted);
        if f_contracted < values[worst].min(f_reflected) {
            simplex[worst] = contracted;
            values[worst] = f_contracted;
            continue;
        }
        // shrink toward the best vertex
        let anchor = simplex[best];
        for (idx, v) in simplex.iter_mut().enumerate() {
            if idx == best {
                continue;
            }
            *v = blend(&anchor, v, DELTA);
            values[idx] = f(v);
        }
    }

    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    (simplex[best], values[best], converged)
}
