//! Analytic timing and rate model for nested quantum repeaters:
//! per-segment transmission, expected distribution time, the
//! finite-lifetime correction, and the resulting interconnect rates.
//!
//! Conventions used throughout (and by the bundled memory registry):
//! one elementary time slot is the segment communication time L0/c;
//! rates are reported in bits per minute.

use serde::{Deserialize, Serialize};

use crate::capacity::{capacity_depolarizing, fidelity_to_pn};
use crate::error::{Error, Result};

/// Repeater-chain geometry and physical constants. Fields omitted from a
/// serialized config fall back to the benchmark defaults below.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RepeaterConfig {
    /// End-to-end channel length L (km).
    pub total_length_km: f64,
    /// Nesting depth n of the swapping tree; 2^n elementary segments.
    pub nesting_n: u32,
    /// Elementary segment length L0 (km). Stored explicitly so
    /// non-standard topologies stay expressible.
    pub segment_length_km: f64,
    /// Fiber attenuation length L_att (km).
    pub attenuation_length_km: f64,
    /// Speed of light in fiber (km/s).
    pub light_speed_km_per_s: f64,
    /// Detector efficiency eta_d, in (0,1].
    pub detection_efficiency: f64,
    /// Entanglement-swapping success probability p_s, in (0,1].
    pub swap_probability: f64,
    /// Probability p_e of entangling adjacent memories, in (0,1].
    pub entangle_probability: f64,
}

impl Default for RepeaterConfig {
    /// The 1000-km, two-nesting-level benchmark channel: four 250-km
    /// segments, 22-km attenuation length, c = 2e5 km/s, ideal detection
    /// and swapping, p_e = 0.7.
    fn default() -> Self {
        Self {
            total_length_km: 1000.0,
            nesting_n: 2,
            segment_length_km: 250.0,
            attenuation_length_km: 22.0,
            light_speed_km_per_s: 2.0e5,
            detection_efficiency: 1.0,
            swap_probability: 1.0,
            entangle_probability: 0.7,
        }
    }
}

impl RepeaterConfig {
    /// Config for a chain of 2^n equal segments spanning `total_km`.
    pub fn with_segments(total_km: f64, nesting_n: u32) -> Self {
        Self {
            total_length_km: total_km,
            nesting_n,
            segment_length_km: total_km / (1u64 << nesting_n) as f64,
            ..Self::default()
        }
    }

    /// Communication time of one elementary slot, L0/c (seconds).
    pub fn slot_s(&self) -> f64 {
        self.segment_length_km / self.light_speed_km_per_s
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("total_length_km", self.total_length_km),
            ("segment_length_km", self.segment_length_km),
            ("attenuation_length_km", self.attenuation_length_km),
            ("light_speed_km_per_s", self.light_speed_km_per_s),
        ] {
            if !(v > 0.0) {
                return Err(Error::NotPositive { name, value: v });
            }
        }
        for (name, v) in [
            ("detection_efficiency", self.detection_efficiency),
            ("swap_probability", self.swap_probability),
            ("entangle_probability", self.entangle_probability),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::OutOfRange {
                    name,
                    value: v,
                    min: 0.0,
                    max: 1.0,
                });
            }
        }
        Ok(())
    }
}

/// Photon-source model behind a memory benchmark entry. The pair/emission
/// probability conventions are: 0.7 for absorptive sources fed by a
/// deterministic pair source, 0.1 for emissive (DLCZ-type) schemes to
/// suppress double excitations, 0.7 for cavity-QED nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    SinglePhotonAbsorptive,
    WeakPulseAbsorptive,
    DlczEmissive,
    CavityQed,
}

impl SourceKind {
    /// Default pair/emission probability for this source class.
    pub fn default_pair_probability(self) -> f64 {
        match self {
            SourceKind::SinglePhotonAbsorptive
            | SourceKind::WeakPulseAbsorptive
            | SourceKind::CavityQed => 0.7,
            SourceKind::DlczEmissive => 0.1,
        }
    }
}

/// One quantum memory's benchmark parameters (one registry row).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MemorySpec {
    pub name: String,
    /// Intrinsic retrieval/storage efficiency eta_s, in [0,1].
    pub storage_efficiency: f64,
    /// 1/e storage lifetime tau (seconds). May be infinite.
    pub lifetime_s: f64,
    /// Number of individually addressable multiplexing modes N.
    pub multiplex_n: u32,
    /// Dimension M of the stored qudit (capacity ceiling log2 M).
    pub mode_count_m: u32,
    /// Qubit storage fidelity F_s, in [0,1].
    pub qubit_fidelity: f64,
    pub source_kind: SourceKind,
    /// Photon-pair generation/emission probability p, in (0,1].
    pub pair_probability: f64,
}

impl MemorySpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("storage_efficiency", self.storage_efficiency),
            ("qubit_fidelity", self.qubit_fidelity),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange {
                    name,
                    value: v,
                    min: 0.0,
                    max: 1.0,
                });
            }
        }
        if !(self.pair_probability > 0.0 && self.pair_probability <= 1.0) {
            return Err(Error::OutOfRange {
                name: "pair_probability",
                value: self.pair_probability,
                min: 0.0,
                max: 1.0,
            });
        }
        if self.lifetime_s < 0.0 {
            return Err(Error::NotPositive {
                name: "lifetime_s",
                value: self.lifetime_s,
            });
        }
        if self.multiplex_n < 1 || self.mode_count_m < 1 {
            return Err(Error::NotPositive {
                name: "multiplex_n/mode_count_m",
                value: 0.0,
            });
        }
        Ok(())
    }
}

/// Timing and rate figures for one memory on one channel.
#[derive(Debug, Clone, Serialize)]
pub struct RateResult {
    pub t_tot_s: f64,
    pub t_tau_s: f64,
    pub capacity_bits: f64,
    pub r_qm_bits_per_min: f64,
    pub r_tau_bits_per_min: f64,
}

/// One point of the rate-surface sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub p_n: f64,
    pub m: u32,
    pub eta_s: f64,
    pub r_qm_bits_per_min: f64,
}

/// Transmission efficiency of one segment: exp(-L0 / (2 L_att)).
pub fn segment_transmission(l0_km: f64, l_att_km: f64) -> Result<f64> {
    if !(l0_km > 0.0) {
        return Err(Error::NotPositive {
            name: "l0_km",
            value: l0_km,
        });
    }
    if !(l_att_km > 0.0) {
        return Err(Error::NotPositive {
            name: "l_att_km",
            value: l_att_km,
        });
    }
    Ok((-l0_km / (2.0 * l_att_km)).exp())
}

/// Expected entanglement distribution time for an n-nesting-level chain:
///
///   T_tot = 3^(n+1) (L0/c) prod_{k=1..n}(2^k - (2^k-1) eta)
///           / (N p eta_L0 eta_d eta^4),   eta = eta_s eta_d.
pub fn t_tot(cfg: &RepeaterConfig, mem: &MemorySpec) -> Result<f64> {
    cfg.validate()?;
    mem.validate()?;
    let eta = mem.storage_efficiency * cfg.detection_efficiency;
    let eta_l0 = segment_transmission(cfg.segment_length_km, cfg.attenuation_length_km)?;
    let denom_scale = eta * mem.pair_probability * eta_l0;
    if denom_scale <= 0.0 {
        return Err(Error::InfiniteTime {
            reason: format!(
                "eta * p * eta_L0 = {denom_scale}; no attempt can ever succeed"
            ),
        });
    }
    let n = cfg.nesting_n;
    let mut product = 1.0;
    for k in 1..=n {
        let two_k = (1u64 << k) as f64;
        product *= two_k - (two_k - 1.0) * eta;
    }
    let numerator = 3.0f64.powi(n as i32 + 1) * cfg.slot_s() * product;
    let denominator = mem.multiplex_n as f64
        * mem.pair_probability
        * eta_l0
        * cfg.detection_efficiency
        * eta.powi(4);
    Ok(numerator / denominator)
}

/// Finite-lifetime correction to the distribution time:
///
///   T_tau = (T_tot - A q^(t+1)/(1 - p_e/2)) / (1 - q^(t+1)/(1 - p_e/2)),
///   A = (1+p_e)/(p_e p_s),  q = 1 - p_e,
///
/// with the lifetime expressed as t = floor(tau / (L0/c)) whole slots.
/// As tau -> infinity the correction vanishes and T_tau -> T_tot.
pub fn t_tau(cfg: &RepeaterConfig, mem: &MemorySpec, t_tot_s: f64) -> Result<f64> {
    cfg.validate()?;
    if !(t_tot_s > 0.0) {
        return Err(Error::NotPositive {
            name: "t_tot_s",
            value: t_tot_s,
        });
    }
    let p_e = cfg.entangle_probability;
    let p_s = cfg.swap_probability;
    let q = 1.0 - p_e;
    let slots = (mem.lifetime_s / cfg.slot_s()).floor();
    let correction = q.powf(slots + 1.0) / (1.0 - p_e / 2.0);
    let denominator = 1.0 - correction;
    if denominator <= 0.0 {
        return Err(Error::LifetimeModelOutOfRange {
            reason: format!("correction factor {correction} >= 1"),
        });
    }
    let subtracted = (1.0 + p_e) / (p_e * p_s) * correction;
    if subtracted >= t_tot_s {
        return Err(Error::LifetimeModelOutOfRange {
            reason: format!(
                "subtracted term {subtracted:.6} exceeds t_tot {t_tot_s:.6}; \
                 the chain is faster than one memory round trip"
            ),
        });
    }
    Ok((t_tot_s - subtracted) / denominator)
}

/// Quantum interconnect rate R = C/T, in bits per minute.
pub fn qir(capacity_bits: f64, time_s: f64) -> Result<f64> {
    if capacity_bits < 0.0 {
        return Err(Error::NotPositive {
            name: "capacity_bits",
            value: capacity_bits,
        });
    }
    if !(time_s > 0.0) {
        return Err(Error::NotPositive {
            name: "time_s",
            value: time_s,
        });
    }
    Ok(capacity_bits * 60.0 / time_s)
}

/// Full benchmark of one memory on one channel: capacity from the
/// depolarizing model, T_tot, T_tau, and both rates.
///
/// The depolarizing parameter is inferred from the qubit storage fidelity
/// via the two-mode relation p_n = 2(1 - F_s); this is the mapping that
/// reproduces the published reference rates for every bundled registry
/// row. The full mode count M then sets the capacity.
pub fn evaluate_memory(cfg: &RepeaterConfig, mem: &MemorySpec) -> Result<RateResult> {
    let capacity_bits = if mem.mode_count_m >= 2 {
        let p_n = fidelity_to_pn(mem.qubit_fidelity, 2)?;
        capacity_depolarizing(mem.mode_count_m, p_n)?
    } else {
        0.0 // a single mode carries log2(1) = 0 bits
    };
    let t_tot_s = t_tot(cfg, mem)?;
    let t_tau_s = t_tau(cfg, mem, t_tot_s)?;
    Ok(RateResult {
        t_tot_s,
        t_tau_s,
        capacity_bits,
        r_qm_bits_per_min: qir(capacity_bits, t_tot_s)?,
        r_tau_bits_per_min: qir(capacity_bits, t_tau_s)?,
    })
}

/// Rate surface R_qm over (M, eta_s) for each depolarizing level, with
/// the source probability pinned at p = 1 and N = 1 (the surface isolates
/// the memory itself from the source). Grid points are independent.
pub fn sweep_fig1b(
    m_values: &[u32],
    eta_values: &[f64],
    p_n_values: &[f64],
    cfg: &RepeaterConfig,
) -> Result<Vec<SweepPoint>> {
    if m_values.is_empty() || eta_values.is_empty() || p_n_values.is_empty() {
        return Err(Error::EmptyInput("sweep ranges must be nonempty"));
    }
    cfg.validate()?;
    for &eta in eta_values {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::OutOfRange {
                name: "eta_s",
                value: eta,
                min: 0.0,
                max: 1.0,
            });
        }
    }
    let mut grid = Vec::with_capacity(m_values.len() * eta_values.len() * p_n_values.len());
    for &p_n in p_n_values {
        for &m in m_values {
            if m < 1 {
                return Err(Error::NotPositive {
                    name: "m",
                    value: m as f64,
                });
            }
            let capacity = if m >= 2 {
                capacity_depolarizing(m, p_n)?
            } else {
                0.0
            };
            for &eta_s in eta_values {
                let mem = MemorySpec {
                    name: String::new(),
                    storage_efficiency: eta_s,
                    lifetime_s: f64::INFINITY,
                    multiplex_n: 1,
                    mode_count_m: m,
                    qubit_fidelity: 1.0,
                    source_kind: SourceKind::SinglePhotonAbsorptive,
                    pair_probability: 1.0,
                };
                let time = t_tot(cfg, &mem)?;
                grid.push(SweepPoint {
                    p_n,
                    m,
                    eta_s,
                    r_qm_bits_per_min: qir(capacity, time)?,
                });
            }
        }
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    fn assert_within_pct(value: f64, reference: f64, pct: f64) {
        let dev = (value / reference - 1.0).abs() * 100.0;
        assert!(
            dev <= pct,
            "{value} deviates {dev:.2}% from {reference} (allowed {pct}%)"
        );
    }

    fn this_work() -> MemorySpec {
        MemorySpec {
            name: "this_work".into(),
            storage_efficiency: 0.822,
            lifetime_s: 28.0e-6,
            multiplex_n: 1,
            mode_count_m: 11,
            qubit_fidelity: 0.993,
            source_kind: SourceKind::SinglePhotonAbsorptive,
            pair_probability: 0.7,
        }
    }

    #[test]
    fn segment_transmission_values() {
        assert_close(segment_transmission(1e-12, 22.0).unwrap(), 1.0, 1e-9);
        assert_close(
            segment_transmission(250.0, 22.0).unwrap(),
            3.4073576123257194e-3,
            1e-15,
        );
        assert_close(
            segment_transmission(44.0, 22.0).unwrap(),
            (-1.0f64).exp(),
            1e-15,
        );
        assert!(segment_transmission(0.0, 22.0).is_err());
        assert!(segment_transmission(250.0, 0.0).is_err());
    }

    #[test]
    fn t_tot_lossless_single_segment() {
        let cfg = RepeaterConfig {
            nesting_n: 0,
            segment_length_km: 250.0,
            attenuation_length_km: 1e12, // eta_L0 ~ 1
            ..RepeaterConfig::default()
        };
        let mem = MemorySpec {
            storage_efficiency: 1.0,
            pair_probability: 1.0,
            ..this_work()
        };
        let t = t_tot(&cfg, &mem).unwrap();
        assert_close(t, 3.0 * cfg.slot_s(), 1e-12);
    }

    #[test]
    fn t_tot_reproduces_benchmark_row() {
        let cfg = RepeaterConfig::default();
        let t = t_tot(&cfg, &this_work()).unwrap();
        assert_close(t, 56.00688266816327, 1e-9);
    }

    #[test]
    fn t_tot_halves_when_multiplexing_doubles() {
        let cfg = RepeaterConfig::default();
        let mem = this_work();
        let doubled = MemorySpec {
            multiplex_n: 2,
            ..mem.clone()
        };
        let t1 = t_tot(&cfg, &mem).unwrap();
        let t2 = t_tot(&cfg, &doubled).unwrap();
        assert_eq!(t2, t1 / 2.0);
    }

    #[test]
    fn t_tot_errors_on_zero_efficiency() {
        let cfg = RepeaterConfig::default();
        let mem = MemorySpec {
            storage_efficiency: 0.0,
            ..this_work()
        };
        assert!(matches!(t_tot(&cfg, &mem), Err(Error::InfiniteTime { .. })));
    }

    #[test]
    fn t_tot_strictly_decreasing_in_each_efficiency() {
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..50 {
            let cfg = RepeaterConfig {
                nesting_n: rng.random_range(0..=3),
                detection_efficiency: rng.random_range(0.3..=1.0),
                ..RepeaterConfig::default()
            };
            let mem = MemorySpec {
                storage_efficiency: rng.random_range(0.2..0.9),
                multiplex_n: rng.random_range(1..20),
                pair_probability: rng.random_range(0.05..0.9),
                ..this_work()
            };
            let base = t_tot(&cfg, &mem).unwrap();

            let up = |m: MemorySpec, c: RepeaterConfig| t_tot(&c, &m).unwrap();
            assert!(
                up(
                    MemorySpec {
                        storage_efficiency: (mem.storage_efficiency + 0.05).min(1.0),
                        ..mem.clone()
                    },
                    cfg.clone()
                ) < base
            );
            assert!(
                up(
                    MemorySpec {
                        multiplex_n: mem.multiplex_n + 1,
                        ..mem.clone()
                    },
                    cfg.clone()
                ) < base
            );
            assert!(
                up(
                    MemorySpec {
                        pair_probability: (mem.pair_probability + 0.05).min(1.0),
                        ..mem.clone()
                    },
                    cfg.clone()
                ) < base
            );
            assert!(
                up(
                    mem.clone(),
                    RepeaterConfig {
                        detection_efficiency: (cfg.detection_efficiency + 0.05).min(1.0),
                        ..cfg.clone()
                    }
                ) < base
            );
        }
    }

    #[test]
    fn t_tau_reduces_to_t_tot_for_infinite_lifetime() {
        let cfg = RepeaterConfig::default();
        let mem = MemorySpec {
            lifetime_s: f64::INFINITY,
            ..this_work()
        };
        let tt = t_tot(&cfg, &mem).unwrap();
        assert_close(t_tau(&cfg, &mem, tt).unwrap(), tt, 1e-9);
    }

    #[test]
    fn t_tau_reproduces_benchmark_row() {
        // 28 us lifetime against a 1.25 ms slot gives t = 0 stored slots
        let cfg = RepeaterConfig::default();
        let mem = this_work();
        let tt = t_tot(&cfg, &mem).unwrap();
        let ttau = t_tau(&cfg, &mem, tt).unwrap();
        assert_close(ttau, 101.93114944495628, 1e-9);
    }

    #[test]
    fn t_tau_ratio_matches_long_time_limit() {
        // for T_tot >> correction the ratio tends to 1/(1 - q/(1-p_e/2))
        let cfg = RepeaterConfig::default();
        let mem = MemorySpec {
            storage_efficiency: 0.028,
            multiplex_n: 5,
            lifetime_s: 230e-9,
            ..this_work()
        };
        let tt = t_tot(&cfg, &mem).unwrap();
        let ratio = t_tau(&cfg, &mem, tt).unwrap() / tt;
        assert_within_pct(ratio, 1.0 / (1.0 - 0.3 / 0.65), 0.1);
    }

    #[test]
    fn t_tau_rejects_tiny_t_tot() {
        let cfg = RepeaterConfig::default();
        let mem = this_work();
        assert!(matches!(
            t_tau(&cfg, &mem, 0.5),
            Err(Error::LifetimeModelOutOfRange { .. })
        ));
    }

    #[test]
    fn qir_examples() {
        assert_close(qir(1.0, 60.0).unwrap(), 1.0, 1e-15);
        assert_close(qir(0.0, 17.0).unwrap(), 0.0, 1e-15);
        assert_within_pct(qir(3.376, 56.1).unwrap(), 3.56, 5.0);
        assert!(qir(1.0, 0.0).is_err());
        assert!(qir(1.0, -2.0).is_err());
    }

    #[test]
    fn qir_scales_linearly() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..50 {
            let c = rng.random_range(0.1..10.0);
            let t = rng.random_range(0.1..1e4);
            let k = rng.random_range(0.5..5.0);
            assert_close(qir(k * c, t).unwrap(), k * qir(c, t).unwrap(), 1e-9);
            assert_close(qir(c, k * t).unwrap(), qir(c, t).unwrap() / k, 1e-9);
        }
    }

    #[test]
    fn evaluate_memory_headline_row() {
        let r = evaluate_memory(&RepeaterConfig::default(), &this_work()).unwrap();
        assert_within_pct(r.r_qm_bits_per_min, 3.56, 5.0);
        assert_within_pct(r.r_tau_bits_per_min, 1.99, 5.0);
        // rate/time/capacity consistency
        assert_close(
            r.r_qm_bits_per_min,
            r.capacity_bits * 60.0 / r.t_tot_s,
            1e-9,
        );
        assert_close(
            r.r_tau_bits_per_min,
            r.capacity_bits * 60.0 / r.t_tau_s,
            1e-9,
        );
    }

    #[test]
    fn evaluate_memory_reference_rows() {
        let cfg = RepeaterConfig::default();
        let wang2019 = MemorySpec {
            name: "wang2019".into(),
            storage_efficiency: 0.861,
            lifetime_s: 10e-6,
            multiplex_n: 1,
            mode_count_m: 2,
            qubit_fidelity: 0.996,
            source_kind: SourceKind::SinglePhotonAbsorptive,
            pair_probability: 0.7,
        };
        let r = evaluate_memory(&cfg, &wang2019).unwrap();
        assert_within_pct(r.r_qm_bits_per_min, 1.39, 5.0);
        assert_within_pct(r.r_tau_bits_per_min, 0.78, 5.0);

        let hartung2024 = MemorySpec {
            name: "hartung2024".into(),
            storage_efficiency: 0.70,
            lifetime_s: 1.1e-3,
            multiplex_n: 6,
            mode_count_m: 2,
            qubit_fidelity: 0.962,
            source_kind: SourceKind::CavityQed,
            pair_probability: 0.7,
        };
        let r = evaluate_memory(&cfg, &hartung2024).unwrap();
        assert_within_pct(r.r_qm_bits_per_min, 1.90, 5.0);
        assert_within_pct(r.r_tau_bits_per_min, 1.07, 5.0);
    }

    #[test]
    fn evaluate_memory_single_mode_has_zero_rate() {
        let mem = MemorySpec {
            mode_count_m: 1,
            ..this_work()
        };
        let r = evaluate_memory(&RepeaterConfig::default(), &mem).unwrap();
        assert_eq!(r.capacity_bits, 0.0);
        assert_eq!(r.r_qm_bits_per_min, 0.0);
    }

    #[test]
    fn sweep_matches_evaluate_memory_at_p_one() {
        let cfg = RepeaterConfig::default();
        let p_n = fidelity_to_pn(0.993, 2).unwrap();
        let grid = sweep_fig1b(&[11], &[0.822], &[p_n], &cfg).unwrap();
        assert_eq!(grid.len(), 1);
        let mem = MemorySpec {
            pair_probability: 1.0,
            lifetime_s: f64::INFINITY,
            ..this_work()
        };
        let oracle = evaluate_memory(&cfg, &mem).unwrap();
        assert_close(grid[0].r_qm_bits_per_min, oracle.r_qm_bits_per_min, 1e-9);
    }

    #[test]
    fn sweep_increases_with_storage_efficiency() {
        let cfg = RepeaterConfig::default();
        let etas: Vec<f64> = (1..=20).map(|i| i as f64 / 20.0).collect();
        let grid = sweep_fig1b(&[11], &etas, &[0.01], &cfg).unwrap();
        for pair in grid.windows(2) {
            assert!(pair[1].r_qm_bits_per_min > pair[0].r_qm_bits_per_min);
        }
    }

    #[test]
    fn sweep_capacity_drops_with_noise() {
        let cfg = RepeaterConfig::default();
        let low = sweep_fig1b(&[8], &[0.8], &[0.01], &cfg).unwrap();
        let high = sweep_fig1b(&[8], &[0.8], &[0.5], &cfg).unwrap();
        assert!(high[0].r_qm_bits_per_min < low[0].r_qm_bits_per_min);
    }

    #[test]
    fn sweep_rejects_empty_ranges() {
        let cfg = RepeaterConfig::default();
        assert!(matches!(
            sweep_fig1b(&[], &[0.5], &[0.01], &cfg),
            Err(Error::EmptyInput(_))
        ));
    }
}
