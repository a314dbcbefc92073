//! One handler per subcommand. Each returns the rendered output string;
//! main() decides where it goes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::json;

use qir_core::capacity::{capacity_blahut_arimoto, capacity_depolarizing, depolarizing_channel};
use qir_core::counts::{
    g2_zero, heralding_rate, solve_excitations, storage_efficiency, qudit_fidelity_bound,
    Estimate,
};
use qir_core::entanglement::eof_closed_form_depolarizing;
use qir_core::mcsim::{compare_analytic, simulate, simulate_trace, SimConfig};
use qir_core::repeater::{evaluate_memory, sweep_fig1b, MemorySpec, RepeaterConfig, SourceKind};
use qir_core::state::{uhlmann_fidelity, DensityMatrix};
use qir_core::tomography::{mle_reconstruct, poisson_bootstrap, BasisLabel};

use crate::errors::CliError;
use crate::files::{
    parse_count_file, parse_qudit_label, parse_tomo_file, CountLine, QuditLabel, QuditStage,
    StageTag,
};
use crate::output::{fmt_sig, round_sig};
use crate::registry::{load_registry, MemoryRegistry};

/// Shared flags resolved by main().
pub struct Ctx {
    pub json: bool,
    pub precision: usize,
    pub seed: u64,
    pub lenient: bool,
}

impl Ctx {
    fn f(&self, x: f64) -> String {
        fmt_sig(x, self.precision)
    }

    fn j(&self, x: f64) -> serde_json::Value {
        json!(round_sig(x, self.precision))
    }
}

const BUNDLED_REGISTRY: &str = include_str!("../data/table_s1.toml");

fn csv_to_string(rows: Vec<Vec<String>>) -> Result<String, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.write_record(&row).map_err(std::io::Error::other)?;
    }
    let bytes = writer.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Usage(e.to_string()))
}

fn json_to_string(value: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&value).expect("json serialization");
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------
// table-s1
// ---------------------------------------------------------------------------

pub fn cmd_table_s1(ctx: &Ctx, registry_path: Option<&Path>) -> Result<String, CliError> {
    let registry = match registry_path {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            load_registry(path, &text)?
        }
        None => load_registry(Path::new("<bundled>"), BUNDLED_REGISTRY)?,
    };
    render_table(ctx, &registry)
}

fn render_table(ctx: &Ctx, registry: &MemoryRegistry) -> Result<String, CliError> {
    let mut rows = vec![vec![
        "name".to_string(),
        "capacity_bits".to_string(),
        "t_tot_s".to_string(),
        "t_tau_s".to_string(),
        "r_qm_bits_per_min".to_string(),
        "r_tau_bits_per_min".to_string(),
        "published_r_qm".to_string(),
        "published_r_tau".to_string(),
        "status".to_string(),
    ]];
    let mut objects = Vec::new();
    for entry in &registry.entries {
        match evaluate_memory(&registry.defaults, &entry.mem) {
            Ok(rate) => {
                let status = match (entry.published_r_qm, entry.published_r_tau) {
                    (Some(rq), Some(rt)) => {
                        let tol = entry.tolerance_pct / 100.0;
                        let ok = (rate.r_qm_bits_per_min / rq - 1.0).abs() <= tol
                            && (rate.r_tau_bits_per_min / rt - 1.0).abs() <= tol;
                        if ok { "PASS" } else { "FAIL" }.to_string()
                    }
                    _ => String::new(),
                };
                rows.push(vec![
                    entry.mem.name.clone(),
                    ctx.f(rate.capacity_bits),
                    ctx.f(rate.t_tot_s),
                    ctx.f(rate.t_tau_s),
                    ctx.f(rate.r_qm_bits_per_min),
                    ctx.f(rate.r_tau_bits_per_min),
                    entry.published_r_qm.map(|v| ctx.f(v)).unwrap_or_default(),
                    entry.published_r_tau.map(|v| ctx.f(v)).unwrap_or_default(),
                    status.clone(),
                ]);
                objects.push(json!({
                    "name": entry.mem.name,
                    "capacity_bits": ctx.j(rate.capacity_bits),
                    "t_tot_s": ctx.j(rate.t_tot_s),
                    "t_tau_s": ctx.j(rate.t_tau_s),
                    "r_qm_bits_per_min": ctx.j(rate.r_qm_bits_per_min),
                    "r_tau_bits_per_min": ctx.j(rate.r_tau_bits_per_min),
                    "published_r_qm": entry.published_r_qm,
                    "published_r_tau": entry.published_r_tau,
                    "status": status,
                }));
            }
            Err(e) => {
                rows.push(vec![
                    entry.mem.name.clone(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    entry.published_r_qm.map(|v| ctx.f(v)).unwrap_or_default(),
                    entry.published_r_tau.map(|v| ctx.f(v)).unwrap_or_default(),
                    format!("ERROR: {e}"),
                ]);
                objects.push(json!({
                    "name": entry.mem.name,
                    "status": format!("ERROR: {e}"),
                }));
            }
        }
    }
    if ctx.json {
        Ok(json_to_string(json!(objects)))
    } else {
        csv_to_string(rows)
    }
}

// ---------------------------------------------------------------------------
// fig1b
// ---------------------------------------------------------------------------

pub fn cmd_fig1b(
    ctx: &Ctx,
    p_n_list: &[f64],
    m_max: u32,
    eta_steps: u32,
) -> Result<String, CliError> {
    if m_max < 1 || eta_steps < 1 {
        return Err(CliError::Usage(
            "m-max and eta-steps must be at least 1".into(),
        ));
    }
    let m_values: Vec<u32> = (1..=m_max).collect();
    let eta_values: Vec<f64> = (1..=eta_steps).map(|i| i as f64 / eta_steps as f64).collect();
    let cfg = RepeaterConfig::default();
    let grid = sweep_fig1b(&m_values, &eta_values, p_n_list, &cfg)?;

    if ctx.json {
        let points: Vec<_> = grid
            .iter()
            .map(|p| {
                json!({
                    "p_n": p.p_n,
                    "m": p.m,
                    "eta_s": ctx.j(p.eta_s),
                    "r_qm_bits_per_min": ctx.j(p.r_qm_bits_per_min),
                })
            })
            .collect();
        return Ok(json_to_string(json!(points)));
    }
    let mut rows = vec![vec![
        "p_n".to_string(),
        "m".to_string(),
        "eta_s".to_string(),
        "r_qm_bits_per_min".to_string(),
    ]];
    for p in &grid {
        rows.push(vec![
            ctx.f(p.p_n),
            p.m.to_string(),
            ctx.f(p.eta_s),
            ctx.f(p.r_qm_bits_per_min),
        ]);
    }
    csv_to_string(rows)
}

// ---------------------------------------------------------------------------
// counts
// ---------------------------------------------------------------------------

pub fn cmd_counts(
    ctx: &Ctx,
    file: &Path,
    qudit: bool,
    subtract: bool,
) -> Result<String, CliError> {
    let text = std::fs::read_to_string(file)?;
    let lines = parse_count_file(file, &text)?;
    if qudit {
        qudit_pipeline(ctx, file, &lines)
    } else {
        plain_counts(ctx, &lines, subtract)
    }
}

fn plain_counts(ctx: &Ctx, lines: &[CountLine], subtract: bool) -> Result<String, CliError> {
    // estimator pass; --lenient downgrades per-record failures to rows
    let mut computed: Vec<(String, Option<Estimate>, Option<Estimate>, Vec<String>)> = Vec::new();
    for line in lines {
        let mut errors = Vec::new();
        let g2 = match g2_zero(&line.record) {
            Ok(e) => Some(e),
            Err(e) => {
                if !ctx.lenient {
                    return Err(e.into());
                }
                errors.push(format!("g2: {e}"));
                None
            }
        };
        let h = match heralding_rate(&line.record, subtract) {
            Ok(e) => Some(e),
            Err(e) => {
                if !ctx.lenient {
                    return Err(e.into());
                }
                errors.push(format!("heralding: {e}"));
                None
            }
        };
        computed.push((line.record.label.clone(), g2, h, errors));
    }

    // pair `before:X` / `after:X` labels for storage efficiency
    let mut before: BTreeMap<String, Estimate> = BTreeMap::new();
    for (label, _, h, _) in &computed {
        if let (Some(mode), Some(est)) = (label.strip_prefix("before:"), h) {
            before.insert(mode.to_string(), *est);
        }
    }

    let mut rows = vec![vec![
        "label".to_string(),
        "g2".to_string(),
        "g2_sigma".to_string(),
        "heralding_rate".to_string(),
        "heralding_sigma".to_string(),
        "storage_efficiency".to_string(),
        "storage_sigma".to_string(),
        "status".to_string(),
    ]];
    let mut objects = Vec::new();
    for (label, g2, h, mut errors) in computed {
        let eta = label
            .strip_prefix("after:")
            .and_then(|mode| before.get(mode).map(|b| (mode, *b)))
            .and_then(|(_, b)| match h {
                Some(a) => match storage_efficiency(&a, &b) {
                    Ok(e) => Some(e),
                    Err(e) => {
                        errors.push(format!("storage_efficiency: {e}"));
                        None
                    }
                },
                None => None,
            });
        let status = if errors.is_empty() {
            "OK".to_string()
        } else {
            format!("ERROR: {}", errors.join("; "))
        };
        rows.push(vec![
            label.clone(),
            g2.map(|e| ctx.f(e.value)).unwrap_or_default(),
            g2.map(|e| ctx.f(e.sigma)).unwrap_or_default(),
            h.map(|e| ctx.f(e.value)).unwrap_or_default(),
            h.map(|e| ctx.f(e.sigma)).unwrap_or_default(),
            eta.map(|e| ctx.f(e.value)).unwrap_or_default(),
            eta.map(|e| ctx.f(e.sigma)).unwrap_or_default(),
            status.clone(),
        ]);
        objects.push(json!({
            "label": label,
            "g2": g2.map(|e| ctx.j(e.value)),
            "g2_sigma": g2.map(|e| ctx.j(e.sigma)),
            "heralding_rate": h.map(|e| ctx.j(e.value)),
            "heralding_sigma": h.map(|e| ctx.j(e.sigma)),
            "storage_efficiency": eta.map(|e| ctx.j(e.value)),
            "storage_sigma": eta.map(|e| ctx.j(e.sigma)),
            "status": status,
        }));
    }
    if ctx.json {
        Ok(json_to_string(json!(objects)))
    } else {
        csv_to_string(rows)
    }
}

fn qudit_pipeline(ctx: &Ctx, file: &Path, lines: &[CountLine]) -> Result<String, CliError> {
    let mut stages: BTreeMap<StageTag, QuditStage> = BTreeMap::new();
    for line in lines {
        let parsed = parse_qudit_label(&line.record.label).ok_or_else(|| {
            CliError::parse(
                file,
                Some(line.line),
                format!(
                    "label {:?} does not match the qudit grammar \
                     (h:<stage>:<mode>, q:<stage>:<mode>, qf:<stage>, g2:<stage>)",
                    line.record.label
                ),
            )
        })?;
        match parsed {
            QuditLabel::Heralding(stage, mode) => {
                let h = heralding_rate(&line.record, true)?;
                stages.entry(stage).or_default().heralding.insert(mode, h.value);
            }
            QuditLabel::Population(stage, mode) => {
                let q = heralding_rate(&line.record, true)?;
                stages.entry(stage).or_default().population.insert(mode, q.value);
            }
            QuditLabel::FullQudit(stage) => {
                let q_f = heralding_rate(&line.record, true)?;
                stages.entry(stage).or_default().q_f = Some(q_f.value);
            }
            QuditLabel::AntiCorrelation(stage) => {
                let g2 = g2_zero(&line.record)?;
                stages.entry(stage).or_default().g2 = Some(g2.value);
            }
        }
    }

    let mut rows = vec![vec![
        "stage".to_string(),
        "quantity".to_string(),
        "mode".to_string(),
        "value".to_string(),
    ]];
    let mut stage_json = serde_json::Map::new();
    for (tag, stage) in &stages {
        let name = tag.as_str();
        let modes: Vec<String> = stage.heralding.keys().cloned().collect();
        if modes.is_empty() {
            return Err(CliError::parse(
                file,
                None,
                format!("stage {name:?} has no heralding records"),
            ));
        }
        let pop_modes: Vec<String> = stage.population.keys().cloned().collect();
        if pop_modes != modes {
            return Err(CliError::parse(
                file,
                None,
                format!("stage {name:?}: population modes {pop_modes:?} do not match heralding modes {modes:?}"),
            ));
        }
        let q_f = stage.q_f.ok_or_else(|| {
            CliError::parse(file, None, format!("stage {name:?} is missing a qf record"))
        })?;
        let g2 = stage.g2.ok_or_else(|| {
            CliError::parse(file, None, format!("stage {name:?} is missing a g2 record"))
        })?;

        let heralding: Vec<f64> = modes.iter().map(|m| stage.heralding[m]).collect();
        let mut sum_q_over_h = 0.0;
        for mode in &modes {
            let h = stage.heralding[mode];
            if h <= 0.0 {
                return Err(qir_core::Error::UndefinedEstimator {
                    reason: format!("stage {name}: heralding rate of mode {mode:?} is zero"),
                }
                .into());
            }
            sum_q_over_h += stage.population[mode] / h;
        }
        let decomp = solve_excitations(sum_q_over_h, g2)?;
        let bound = qudit_fidelity_bound(&heralding, q_f, &decomp)?;

        for mode in &modes {
            rows.push(vec![
                name.to_string(),
                "heralding_rate".to_string(),
                mode.clone(),
                ctx.f(stage.heralding[mode]),
            ]);
        }
        for mode in &modes {
            rows.push(vec![
                name.to_string(),
                "population".to_string(),
                mode.clone(),
                ctx.f(stage.population[mode]),
            ]);
        }
        for (quantity, value) in [
            ("q_f", q_f),
            ("g2", g2),
            ("sum_q_over_h", sum_q_over_h),
            ("p0", decomp.p0),
            ("p1", decomp.p1),
            ("p2", decomp.p2),
            ("fidelity_bound", bound),
        ] {
            rows.push(vec![
                name.to_string(),
                quantity.to_string(),
                String::new(),
                ctx.f(value),
            ]);
        }
        stage_json.insert(
            name.to_string(),
            json!({
                "modes": modes,
                "heralding_rate": heralding.iter().map(|&v| ctx.j(v)).collect::<Vec<_>>(),
                "population": modes.iter().map(|m| ctx.j(stage.population[m])).collect::<Vec<_>>(),
                "q_f": ctx.j(q_f),
                "g2": ctx.j(g2),
                "sum_q_over_h": ctx.j(sum_q_over_h),
                "p0": ctx.j(decomp.p0),
                "p1": ctx.j(decomp.p1),
                "p2": ctx.j(decomp.p2),
                "fidelity_bound": ctx.j(bound),
            }),
        );
    }

    // storage efficiency per mode when both stages carry the mode
    if let (Some(before), Some(after)) =
        (stages.get(&StageTag::Before), stages.get(&StageTag::After))
    {
        let mut etas = Vec::new();
        for (mode, &h_before) in &before.heralding {
            if let Some(&h_after) = after.heralding.get(mode) {
                let eta =
                    storage_efficiency(&Estimate::exact(h_after), &Estimate::exact(h_before))?;
                rows.push(vec![
                    "both".to_string(),
                    "storage_efficiency".to_string(),
                    mode.clone(),
                    ctx.f(eta.value),
                ]);
                etas.push(eta.value);
            }
        }
        if !etas.is_empty() {
            let mean = etas.iter().sum::<f64>() / etas.len() as f64;
            rows.push(vec![
                "both".to_string(),
                "storage_efficiency_mean".to_string(),
                String::new(),
                ctx.f(mean),
            ]);
            stage_json.insert("storage_efficiency_mean".to_string(), ctx.j(mean));
        }
        if let (Some(qf_o), Some(qf_s)) = (before.q_f, after.q_f) {
            let eta_qudit =
                storage_efficiency(&Estimate::exact(qf_s), &Estimate::exact(qf_o))?;
            rows.push(vec![
                "both".to_string(),
                "qudit_storage_efficiency".to_string(),
                String::new(),
                ctx.f(eta_qudit.value),
            ]);
            stage_json.insert("qudit_storage_efficiency".to_string(), ctx.j(eta_qudit.value));
        }
    }

    if ctx.json {
        Ok(json_to_string(serde_json::Value::Object(stage_json)))
    } else {
        csv_to_string(rows)
    }
}

// ---------------------------------------------------------------------------
// tomo
// ---------------------------------------------------------------------------

pub fn cmd_tomo(
    ctx: &Ctx,
    file: &Path,
    target: Option<&str>,
    resamples: usize,
) -> Result<String, CliError> {
    let text = std::fs::read_to_string(file)?;
    let measurements = parse_tomo_file(file, &text)?;
    let result = mle_reconstruct(&measurements, 1e-8, 5000)?;

    let mut object = serde_json::Map::new();
    let mut rho_re = vec![vec![0.0; 2]; 2];
    let mut rho_im = vec![vec![0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let z = result.rho.get(i, j);
            rho_re[i][j] = round_sig(z.re, ctx.precision);
            rho_im[i][j] = round_sig(z.im, ctx.precision);
        }
    }
    object.insert("rho_re".into(), json!(rho_re));
    object.insert("rho_im".into(), json!(rho_im));
    object.insert("log_likelihood".into(), ctx.j(result.log_likelihood));
    object.insert("converged".into(), json!(result.converged));

    if let Some(target_label) = target {
        let label: BasisLabel = target_label
            .parse()
            .map_err(|e| CliError::Usage(format!("--target: {e}")))?;
        let target_state = DensityMatrix::from_pure(&label.projector());
        let fidelity = uhlmann_fidelity(&result.rho, &target_state)?;
        object.insert("target".into(), json!(target_label));
        object.insert("fidelity_vs_target".into(), ctx.j(fidelity));
        if resamples > 0 {
            let sigma = poisson_bootstrap(&measurements, &target_state, resamples, ctx.seed)?;
            object.insert("fidelity_sigma".into(), ctx.j(sigma));
            object.insert("resamples".into(), json!(resamples));
            object.insert("seed".into(), json!(ctx.seed));
        }
    }
    Ok(json_to_string(serde_json::Value::Object(object)))
}

// ---------------------------------------------------------------------------
// eof / capacity / simulate
// ---------------------------------------------------------------------------

pub fn cmd_eof(ctx: &Ctx, m: u32, p_n: f64, pairs: Option<u32>) -> Result<String, CliError> {
    let pair_count = pairs.unwrap_or(m.saturating_mul(m.saturating_sub(1)) / 2);
    let bound = eof_closed_form_depolarizing(m, p_n, pair_count)?;
    if ctx.json {
        Ok(json_to_string(json!({
            "m": m,
            "p_n": p_n,
            "pair_count": pair_count,
            "eof_lower_bound_ebits": ctx.j(bound),
        })))
    } else {
        Ok(format!("{}\n", ctx.f(bound)))
    }
}

pub fn cmd_capacity(
    ctx: &Ctx,
    m: u32,
    p_n: f64,
    run_ba: bool,
    tol: f64,
    max_iter: usize,
) -> Result<String, CliError> {
    let closed = capacity_depolarizing(m, p_n)?;
    if !run_ba {
        return Ok(if ctx.json {
            json_to_string(json!({
                "m": m,
                "p_n": p_n,
                "capacity_bits": ctx.j(closed),
            }))
        } else {
            format!("{}\n", ctx.f(closed))
        });
    }
    let channel = depolarizing_channel(m, p_n)?;
    let ba = capacity_blahut_arimoto(&channel, tol, max_iter)?;
    if ctx.json {
        Ok(json_to_string(json!({
            "m": m,
            "p_n": p_n,
            "capacity_bits": ctx.j(closed),
            "blahut_arimoto_bits": ctx.j(ba.capacity_bits),
            "iterations": ba.iterations,
            "converged": ba.converged,
        })))
    } else {
        Ok(format!(
            "closed_form={}\nblahut_arimoto={}\niterations={}\nconverged={}\n",
            ctx.f(closed),
            ctx.f(ba.capacity_bits),
            ba.iterations,
            ba.converged
        ))
    }
}

#[allow(clippy::too_many_arguments)]
pub struct SimulateArgs {
    pub nesting_n: u32,
    pub trials: u64,
    pub p0: Option<f64>,
    pub cutoff_slots: Option<u64>,
    pub eta_s: f64,
    pub pair_probability: f64,
    pub multiplex_n: u32,
    pub detection_efficiency: f64,
    pub swap_probability: f64,
    pub segment_km: f64,
    pub attenuation_km: f64,
    pub light_speed: f64,
    pub compare: bool,
    pub per_trial: Option<PathBuf>,
}

pub fn cmd_simulate(ctx: &Ctx, args: &SimulateArgs) -> Result<String, CliError> {
    let cfg = RepeaterConfig {
        total_length_km: args.segment_km * (1u64 << args.nesting_n) as f64,
        nesting_n: args.nesting_n,
        segment_length_km: args.segment_km,
        attenuation_length_km: args.attenuation_km,
        light_speed_km_per_s: args.light_speed,
        detection_efficiency: args.detection_efficiency,
        swap_probability: args.swap_probability,
        entangle_probability: 0.7,
    };
    let mem = MemorySpec {
        name: "simulated".into(),
        storage_efficiency: args.eta_s,
        lifetime_s: f64::INFINITY,
        multiplex_n: args.multiplex_n,
        mode_count_m: 2,
        qubit_fidelity: 1.0,
        source_kind: SourceKind::SinglePhotonAbsorptive,
        pair_probability: args.pair_probability,
    };
    let sc = SimConfig {
        cfg,
        mem,
        trials: args.trials,
        seed: ctx.seed,
        cutoff_slots: args.cutoff_slots,
        p0_override: args.p0,
    };

    let result = if let Some(per_trial_path) = &args.per_trial {
        let (result, slots) = simulate_trace(&sc)?;
        let slot_s = sc.cfg.slot_s();
        let mut rows = vec![vec![
            "trial".to_string(),
            "slots".to_string(),
            "time_s".to_string(),
        ]];
        for (i, s) in slots.iter().enumerate() {
            rows.push(vec![
                i.to_string(),
                s.to_string(),
                ctx.f(*s as f64 * slot_s),
            ]);
        }
        std::fs::write(per_trial_path, csv_to_string(rows)?)?;
        result
    } else {
        simulate(&sc)?
    };

    let mean_slots = result.mean_slots(&sc.cfg);
    let ratio = if args.compare {
        Some(compare_analytic(&sc)?)
    } else {
        None
    };

    if ctx.json {
        let mut object = serde_json::Map::new();
        object.insert("trials".into(), json!(result.trials));
        object.insert("seed".into(), json!(ctx.seed));
        object.insert("mean_time_s".into(), ctx.j(result.mean_time_s));
        object.insert("std_error_s".into(), ctx.j(result.std_error_s));
        object.insert("mean_slots".into(), ctx.j(mean_slots));
        object.insert(
            "mean_attempts_per_segment".into(),
            ctx.j(result.mean_attempts_per_segment),
        );
        if let Some(r) = ratio {
            object.insert("analytic_ratio".into(), ctx.j(r));
        }
        Ok(json_to_string(serde_json::Value::Object(object)))
    } else {
        let mut line = format!(
            "trials={} mean_time_s={} std_error_s={} mean_slots={} attempts_per_segment={}",
            result.trials,
            ctx.f(result.mean_time_s),
            ctx.f(result.std_error_s),
            ctx.f(mean_slots),
            ctx.f(result.mean_attempts_per_segment),
        );
        if let Some(r) = ratio {
            line.push_str(&format!(" analytic_ratio={}", ctx.f(r)));
        }
        line.push('\n');
        Ok(line)
    }
}

