//! Discrete-event Monte-Carlo simulation of the nested repeater
//! protocol, used as an independent oracle for the analytic timing model.
//!
//! Protocol per elementary slot of duration L0/c:
//! - every idle segment attempts entanglement, succeeding with
//!   P0 = 1 - (1 - p eta_L0 eta_d)^N (any of N multiplexed attempts);
//! - when both child links of a nesting node are ready, the swap is
//!   attempted in that slot, succeeding with p_s eta_s^2 eta_d^2
//!   (retrieval of both memories); failure resets both children;
//! - with a finite cutoff, a link idle for more than `cutoff_slots`
//!   while waiting for its sibling is discarded and regenerated.
//!
//! Trials run on independent ChaCha8 streams derived from (seed, trial),
//! so results are bit-identical regardless of how the trials are
//! scheduled across workers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::repeater::{t_tot, MemorySpec, RepeaterConfig};

/// Simulation inputs: the channel, the memory, and the sampling plan.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub cfg: RepeaterConfig,
    pub mem: MemorySpec,
    pub trials: u64,
    pub seed: u64,
    /// Memory lifetime in elementary slots; `None` = infinite.
    pub cutoff_slots: Option<u64>,
    /// Replaces the derived per-segment success probability, for studying
    /// the protocol at a pinned P0.
    pub p0_override: Option<f64>,
}

impl SimConfig {
    pub fn new(cfg: RepeaterConfig, mem: MemorySpec, trials: u64, seed: u64) -> Self {
        Self {
            cfg,
            mem,
            trials,
            seed,
            cutoff_slots: None,
            p0_override: None,
        }
    }

    /// Per-slot segment success probability P0.
    pub fn segment_success_probability(&self) -> Result<f64> {
        if let Some(p0) = self.p0_override {
            if !(p0 > 0.0 && p0 <= 1.0) {
                return Err(Error::OutOfRange {
                    name: "p0_override",
                    value: p0,
                    min: 0.0,
                    max: 1.0,
                });
            }
            return Ok(p0);
        }
        let eta_l0 = crate::repeater::segment_transmission(
            self.cfg.segment_length_km,
            self.cfg.attenuation_length_km,
        )?;
        let x = self.mem.pair_probability * eta_l0 * self.cfg.detection_efficiency;
        let p0 = 1.0 - (1.0 - x).powi(self.mem.multiplex_n as i32);
        if p0 <= 0.0 {
            return Err(Error::InfiniteTime {
                reason: format!("per-slot success probability is {p0}"),
            });
        }
        Ok(p0)
    }

    /// Swap success probability p_s eta_s^2 eta_d^2.
    pub fn swap_success_probability(&self) -> f64 {
        self.cfg.swap_probability
            * self.mem.storage_efficiency.powi(2)
            * self.cfg.detection_efficiency.powi(2)
    }
}

/// Aggregates over all trials.
#[derive(Debug, Clone, Serialize)]
pub struct SimResult {
    pub mean_time_s: f64,
    pub std_error_s: f64,
    pub trials: u64,
    /// Average number of elementary attempt slots spent per segment per
    /// trial, summed over every (re)generation episode.
    pub mean_attempts_per_segment: f64,
}

impl SimResult {
    pub fn mean_slots(&self, cfg: &RepeaterConfig) -> f64 {
        self.mean_time_s / cfg.slot_s()
    }
}

struct TrialState {
    rng: ChaCha8Rng,
    p0: f64,
    p_swap: f64,
    cutoff: Option<u64>,
    attempt_slots: u64,
}

impl TrialState {
    /// Slots until one segment generation succeeds (geometric, >= 1).
    fn segment_ready(&mut self, start: u64) -> u64 {
        let u: f64 = self.rng.random();
        let g = 1 + ((1.0 - u).ln() / (1.0 - self.p0).ln()).floor() as u64;
        self.attempt_slots += g;
        start + g
    }

    /// Slot at which a level-`level` link becomes ready, starting at
    /// `start`.
    fn link_ready(&mut self, level: u32, start: u64) -> u64 {
        if level == 0 {
            return self.segment_ready(start);
        }
        let mut a = self.link_ready(level - 1, start);
        let mut b = self.link_ready(level - 1, start);
        loop {
            if let Some(cut) = self.cutoff {
                // the earlier link expires after `cut` idle slots and
                // regenerates from its expiry time
                while a.abs_diff(b) > cut {
                    if a < b {
                        a = self.link_ready(level - 1, a + cut);
                    } else {
                        b = self.link_ready(level - 1, b + cut);
                    }
                }
            }
            let t = a.max(b);
            if self.rng.random::<f64>() < self.p_swap {
                return t;
            }
            a = self.link_ready(level - 1, t);
            b = self.link_ready(level - 1, t);
        }
    }
}

fn run_trial(sc: &SimConfig, p0: f64, p_swap: f64, trial: u64) -> (u64, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    rng.set_stream(trial + 1);
    let mut state = TrialState {
        rng,
        p0,
        p_swap,
        cutoff: sc.cutoff_slots,
        attempt_slots: 0,
    };
    let slots = state.link_ready(sc.cfg.nesting_n, 0);
    (slots, state.attempt_slots)
}

fn validate(sc: &SimConfig) -> Result<(f64, f64)> {
    sc.cfg.validate()?;
    sc.mem.validate()?;
    if sc.trials == 0 {
        return Err(Error::NotPositive {
            name: "trials",
            value: 0.0,
        });
    }
    let p0 = sc.segment_success_probability()?;
    let p_swap = sc.swap_success_probability();
    if sc.cfg.nesting_n > 0 && p_swap <= 0.0 {
        return Err(Error::InfiniteTime {
            reason: "swap success probability is zero with nesting levels present".into(),
        });
    }
    Ok((p0, p_swap))
}

/// Mean entanglement distribution time over `trials` independent runs.
pub fn simulate(sc: &SimConfig) -> Result<SimResult> {
    let (p0, p_swap) = validate(sc)?;
    let (sum, sum_sq, attempts) = (0..sc.trials)
        .into_par_iter()
        .map(|trial| {
            let (slots, att) = run_trial(sc, p0, p_swap, trial);
            (slots as u128, (slots as u128) * (slots as u128), att as u128)
        })
        .reduce(
            || (0u128, 0u128, 0u128),
            |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2),
        );
    Ok(aggregate(sc, sum, sum_sq, attempts))
}

/// Like `simulate`, additionally returning each trial's slot count.
pub fn simulate_trace(sc: &SimConfig) -> Result<(SimResult, Vec<u64>)> {
    let (p0, p_swap) = validate(sc)?;
    let per_trial: Vec<(u64, u64)> = (0..sc.trials)
        .into_par_iter()
        .map(|trial| run_trial(sc, p0, p_swap, trial))
        .collect();
    let mut sum = 0u128;
    let mut sum_sq = 0u128;
    let mut attempts = 0u128;
    for &(slots, att) in &per_trial {
        sum += slots as u128;
        sum_sq += (slots as u128) * (slots as u128);
        attempts += att as u128;
    }
    let result = aggregate(sc, sum, sum_sq, attempts);
    Ok((result, per_trial.into_iter().map(|(s, _)| s).collect()))
}

fn aggregate(sc: &SimConfig, sum: u128, sum_sq: u128, attempts: u128) -> SimResult {
    let n = sc.trials as f64;
    let slot = sc.cfg.slot_s();
    let mean_slots = sum as f64 / n;
    let variance = if sc.trials > 1 {
        ((sum_sq as f64 / n) - mean_slots * mean_slots).max(0.0) * n / (n - 1.0)
    } else {
        0.0
    };
    let segments = (1u64 << sc.cfg.nesting_n) as f64;
    SimResult {
        mean_time_s: mean_slots * slot,
        std_error_s: (variance / n).sqrt() * slot,
        trials: sc.trials,
        mean_attempts_per_segment: attempts as f64 / (n * segments),
    }
}

/// Ratio of the simulated mean time to the analytic expectation. Only
/// meaningful without a cutoff (the analytic model assumes an infinite
/// memory lifetime) and without a P0 override (the analytic model uses
/// the physical parameters).
pub fn compare_analytic(sc: &SimConfig) -> Result<f64> {
    if sc.cutoff_slots.is_some() {
        return Err(Error::OutOfRange {
            name: "cutoff_slots",
            value: sc.cutoff_slots.unwrap() as f64,
            min: f64::INFINITY,
            max: f64::INFINITY,
        });
    }
    if sc.p0_override.is_some() {
        return Err(Error::OutOfRange {
            name: "p0_override",
            value: sc.p0_override.unwrap(),
            min: f64::NAN,
            max: f64::NAN,
        });
    }
    let simulated = simulate(sc)?;
    let analytic = t_tot(&sc.cfg, &sc.mem)?;
    Ok(simulated.mean_time_s / analytic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::repeater::SourceKind;

    fn base_mem() -> MemorySpec {
        MemorySpec {
            name: "sim".into(),
            storage_efficiency: 1.0,
            lifetime_s: f64::INFINITY,
            multiplex_n: 1,
            mode_count_m: 2,
            qubit_fidelity: 1.0,
            source_kind: SourceKind::SinglePhotonAbsorptive,
            pair_probability: 1.0,
        }
    }

    fn config_n(n: u32) -> RepeaterConfig {
        RepeaterConfig {
            nesting_n: n,
            ..RepeaterConfig::default()
        }
    }

    fn sim_with_p0(n: u32, p0: f64, trials: u64, seed: u64) -> SimConfig {
        SimConfig {
            p0_override: Some(p0),
            ..SimConfig::new(config_n(n), base_mem(), trials, seed)
        }
    }

    #[test]
    fn certain_success_takes_exactly_one_slot() {
        let sc = sim_with_p0(0, 1.0, 1000, 1);
        let r = simulate(&sc).unwrap();
        assert_eq!(r.mean_time_s, sc.cfg.slot_s());
        assert_eq!(r.std_error_s, 0.0);
        assert_eq!(r.mean_attempts_per_segment, 1.0);
    }

    #[test]
    fn single_segment_mean_is_geometric() {
        let sc = sim_with_p0(0, 0.01, 100_000, 2);
        let r = simulate(&sc).unwrap();
        let mean_slots = r.mean_slots(&sc.cfg);
        let se_slots = r.std_error_s / sc.cfg.slot_s();
        assert!(
            (mean_slots - 100.0).abs() < 3.0 * se_slots,
            "mean {mean_slots} +- {se_slots}"
        );
    }

    #[test]
    fn two_links_wait_for_the_slower_one() {
        // perfect swap: total time = max of two geometric variables,
        // E = (3 - 2p) / (p (2 - p))
        let p0 = 0.01;
        let sc = sim_with_p0(1, p0, 200_000, 3);
        let r = simulate(&sc).unwrap();
        let expected = (3.0 - 2.0 * p0) / (p0 * (2.0 - p0));
        let mean_slots = r.mean_slots(&sc.cfg);
        assert!(
            (mean_slots / expected - 1.0).abs() < 0.05,
            "mean {mean_slots} vs {expected}"
        );
    }

    #[test]
    fn results_do_not_depend_on_worker_count() {
        let sc = sim_with_p0(1, 0.05, 5000, 77);
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| simulate(&sc).unwrap());
        let multi = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| simulate(&sc).unwrap());
        assert_eq!(single.mean_time_s.to_bits(), multi.mean_time_s.to_bits());
        assert_eq!(single.std_error_s.to_bits(), multi.std_error_s.to_bits());
        assert_eq!(
            single.mean_attempts_per_segment.to_bits(),
            multi.mean_attempts_per_segment.to_bits()
        );
    }

    #[test]
    fn trace_matches_summary() {
        let sc = sim_with_p0(1, 0.05, 2000, 5);
        let summary = simulate(&sc).unwrap();
        let (from_trace, slots) = simulate_trace(&sc).unwrap();
        assert_eq!(slots.len(), 2000);
        assert_eq!(summary.mean_time_s.to_bits(), from_trace.mean_time_s.to_bits());
    }

    #[test]
    fn finite_cutoff_slows_distribution() {
        let mut sc = sim_with_p0(1, 0.02, 30_000, 11);
        let open = simulate(&sc).unwrap();
        sc.cutoff_slots = Some(20);
        let cut = simulate(&sc).unwrap();
        assert!(
            cut.mean_time_s > open.mean_time_s,
            "cutoff {} vs open {}",
            cut.mean_time_s,
            open.mean_time_s
        );
    }

    #[test]
    fn more_multiplexing_and_efficiency_are_faster() {
        let cfg = config_n(1);
        let mem = MemorySpec {
            storage_efficiency: 0.8,
            pair_probability: 0.5,
            ..base_mem()
        };
        let base = simulate(&SimConfig::new(cfg.clone(), mem.clone(), 20_000, 9)).unwrap();
        let more_n = simulate(&SimConfig::new(
            cfg.clone(),
            MemorySpec {
                multiplex_n: 4,
                ..mem.clone()
            },
            20_000,
            9,
        ))
        .unwrap();
        let more_eta = simulate(&SimConfig::new(
            cfg,
            MemorySpec {
                storage_efficiency: 0.95,
                ..mem
            },
            20_000,
            9,
        ))
        .unwrap();
        assert!(more_n.mean_time_s < base.mean_time_s);
        assert!(more_eta.mean_time_s < base.mean_time_s);
    }

    #[test]
    fn analytic_ratio_single_segment() {
        // the analytic form carries a 3x heralding prefactor the
        // simulation does not model; the ratio sits near 1/3
        let cfg = RepeaterConfig {
            nesting_n: 0,
            segment_length_km: 250.0,
            attenuation_length_km: 50.0,
            ..RepeaterConfig::default()
        };
        let mem = MemorySpec {
            pair_probability: 0.5,
            ..base_mem()
        };
        let sc = SimConfig::new(cfg, mem, 200_000, 21);
        let ratio = compare_analytic(&sc).unwrap();
        assert!((0.3..0.4).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn zero_success_probability_is_rejected() {
        let cfg = config_n(0);
        let mem = MemorySpec {
            pair_probability: 1e-300,
            ..base_mem()
        };
        let mut sc = SimConfig::new(cfg, mem, 10, 1);
        sc.mem.pair_probability = 0.5;
        sc.p0_override = Some(0.0);
        assert!(simulate(&sc).is_err());
    }

    #[test]
    fn compare_analytic_requires_clean_config() {
        let mut sc = sim_with_p0(0, 0.5, 10, 1);
        assert!(compare_analytic(&sc).is_err()); // p0 override present
        sc.p0_override = None;
        sc.cutoff_slots = Some(5);
        assert!(compare_analytic(&sc).is_err()); // finite cutoff
    }
}
