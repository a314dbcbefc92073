//! qirbench: command-line benchmarking for quantum-repeater memories.
//!
//! Subcommands reproduce the reference comparison table and rate
//! surfaces, reduce photon-count files, reconstruct qubit states from
//! tomography counts, and run the Monte-Carlo protocol simulator.
//! Exit codes: 0 success, 1 validation/parse failure, 2 computation
//! infeasibility.

mod commands;
mod errors;
mod files;
mod output;
mod registry;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use commands::{Ctx, SimulateArgs};

use output::write_output;

#[derive(Parser)]
#[command(name = "qirbench", version, about = "Quantum-memory benchmarking toolkit")]
struct Cli {
    /// Write output to a file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Emit machine-readable JSON instead of CSV/plain text.
    #[arg(long, global = true)]
    json: bool,

    /// Significant digits for floating-point output.
    #[arg(long, global = true, default_value_t = 6)]
    precision: usize,

    /// Seed for the random-number streams (tomo bootstrap, simulate).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Report per-record failures in the output instead of aborting.
    #[arg(long, global = true)]
    lenient: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a memory registry on the benchmark channel (CSV table).
    TableS1 {
        /// Registry TOML; the bundled reference registry when omitted.
        #[arg(long, value_name = "PATH")]
        registry: Option<PathBuf>,
    },
    /// Rate surface R_qm over (M, eta_s) per depolarizing level (long CSV).
    Fig1b {
        /// Comma-separated depolarizing levels.
        #[arg(long, value_delimiter = ',', default_values_t = [0.01, 0.1, 0.5])]
        pn: Vec<f64>,
        /// Largest mode count M (grid runs 1..=m_max).
        #[arg(long, default_value_t = 32)]
        m_max: u32,
        /// Number of storage-efficiency grid points on (0, 1].
        #[arg(long, default_value_t = 50)]
        eta_steps: u32,
    },
    /// Reduce a photon-count file (g2, heralding, storage efficiency).
    Counts {
        /// Count CSV file: label,n1,n2,n3,n23,window_ns,accidental.
        #[arg(long, value_name = "PATH")]
        file: PathBuf,
        /// Run the full qudit fidelity-bound pipeline (h:/q:/qf:/g2: labels).
        #[arg(long)]
        qudit: bool,
        /// Subtract accidental coincidences from heralding rates.
        #[arg(long)]
        subtract: bool,
    },
    /// Reconstruct a qubit state from tomography counts (JSON).
    Tomo {
        /// Tomography CSV file: basis_label,counts,exposure.
        #[arg(long, value_name = "PATH")]
        file: PathBuf,
        /// Target state for fidelity: L1, L2, D, M, L or R.
        #[arg(long, value_name = "LABEL")]
        target: Option<String>,
        /// Poisson bootstrap resamples for the fidelity sigma (0 = skip).
        #[arg(long, default_value_t = 1000)]
        resamples: usize,
    },
    /// Entanglement-of-formation lower bound for a noisy qudit pair.
    Eof {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        pn: f64,
        /// Mode pairs in the witness set (defaults to all m(m-1)/2).
        #[arg(long)]
        pairs: Option<u32>,
    },
    /// Channel capacity of the depolarizing memory model.
    Capacity {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        pn: f64,
        /// Also run the Blahut-Arimoto maximizer as a cross-check.
        #[arg(long)]
        ba: bool,
        /// Blahut-Arimoto duality-gap tolerance in bits.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
    },
    /// Monte-Carlo simulation of the nested repeater protocol.
    Simulate {
        /// Nesting level n (2^n segments).
        #[arg(long, default_value_t = 0)]
        n: u32,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Override the per-slot segment success probability P0.
        #[arg(long)]
        p0: Option<f64>,
        /// Memory cutoff in elementary slots (absent = infinite).
        #[arg(long)]
        cutoff_slots: Option<u64>,
        #[arg(long, default_value_t = 1.0)]
        eta_s: f64,
        #[arg(long, default_value_t = 1.0)]
        pair_p: f64,
        #[arg(long, default_value_t = 1)]
        multiplex: u32,
        #[arg(long, default_value_t = 1.0)]
        eta_d: f64,
        #[arg(long, default_value_t = 1.0)]
        swap_p: f64,
        #[arg(long, default_value_t = 250.0)]
        segment_km: f64,
        #[arg(long, default_value_t = 22.0)]
        att_km: f64,
        #[arg(long, default_value_t = 2.0e5)]
        light_speed: f64,
        /// Also report the ratio to the analytic expected time.
        #[arg(long)]
        compare: bool,
        /// Write per-trial slot counts to a CSV file.
        #[arg(long, value_name = "PATH")]
        per_trial: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are success; everything else is a usage error
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                _ => {
                    let _ = e.print();
                    ExitCode::from(1)
                }
            };
        }
    };

    let ctx = Ctx {
        json: cli.json,
        precision: cli.precision.clamp(1, 17),
        seed: cli.seed,
        lenient: cli.lenient,
    };

    let rendered = match &cli.command {
        Command::TableS1 { registry } => commands::cmd_table_s1(&ctx, registry.as_deref()),
        Command::Fig1b {
            pn,
            m_max,
            eta_steps,
        } => commands::cmd_fig1b(&ctx, pn, *m_max, *eta_steps),
        Command::Counts {
            file,
            qudit,
            subtract,
        } => commands::cmd_counts(&ctx, file, *qudit, *subtract),
        Command::Tomo {
            file,
            target,
            resamples,
        } => commands::cmd_tomo(&ctx, file, target.as_deref(), *resamples),
        Command::Eof { m, pn, pairs } => commands::cmd_eof(&ctx, *m, *pn, *pairs),
        Command::Capacity {
            m,
            pn,
            ba,
            tol,
            max_iter,
        } => commands::cmd_capacity(&ctx, *m, *pn, *ba, *tol, *max_iter),
        Command::Simulate {
            n,
            trials,
            p0,
            cutoff_slots,
            eta_s,
            pair_p,
            multiplex,
            eta_d,
            swap_p,
            segment_km,
            att_km,
            light_speed,
            compare,
            per_trial,
        } => commands::cmd_simulate(
            &ctx,
            &SimulateArgs {
                nesting_n: *n,
                trials: *trials,
                p0: *p0,
                cutoff_slots: *cutoff_slots,
                eta_s: *eta_s,
                pair_probability: *pair_p,
                multiplex_n: *multiplex,
                detection_efficiency: *eta_d,
                swap_probability: *swap_p,
                segment_km: *segment_km,
                attenuation_km: *att_km,
                light_speed: *light_speed,
                compare: *compare,
                per_trial: per_trial.clone(),
            },
        ),
    };

    match rendered {
        Ok(content) => {
            if let Err(e) = write_output(cli.out.as_deref(), &content) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
