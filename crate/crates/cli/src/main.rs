use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nli_cli::{cmd_analyze, cmd_scan, cmd_simulate, exit_code, AnalyzeParams};

#[derive(Parser)]
#[command(
    name = "nli",
    version,
    about = "Simulate a modulated photon-pair interferometer and analyze timetag streams"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a timetag file from a JSON run config.
    Simulate {
        /// Run config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output timetag file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the coincidence/fold/visibility pipeline over a timetag file.
    Analyze {
        /// Input timetag file.
        #[arg(long)]
        tags: PathBuf,
        /// Drive period used for folding, ps.
        #[arg(long)]
        period_ps: i64,
        /// Coincidence window, ps.
        #[arg(long, default_value_t = 1_000)]
        window_ps: i64,
        /// Fold bin count (even). Default: 64 for periods >= 10 ns, else 16.
        #[arg(long)]
        bins: Option<usize>,
        /// Offset-sweep steps over [-T/4, +T/4].
        #[arg(long, default_value_t = 101)]
        sweep_steps: usize,
        /// Delay-histogram bin width, ps.
        #[arg(long, default_value_t = 100)]
        hist_bin_ps: i64,
        /// Delay-histogram half-range, ps.
        #[arg(long, default_value_t = 2_000)]
        hist_range_ps: i64,
        /// Half-width of the coincidence peak excluded from the accidental
        /// estimate, ps.
        #[arg(long, default_value_t = 200)]
        peak_halfwidth_ps: i64,
        /// Directory for the CSV/JSON outputs.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Scan the TPS phase, fit the fringe, and select the harmonic.
    Scan {
        /// Run config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Number of phase points over one turn.
        #[arg(long, default_value_t = 32)]
        points: usize,
        /// Dwell per point, seconds.
        #[arg(long, default_value_t = 1.0)]
        dwell_s: f64,
        /// Directory for fringe.csv and fit.json.
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    if let Ok(raw) = std::env::var("NLI_THREADS") {
        match raw.parse::<usize>() {
            Ok(n) => {
                if let Err(e) = nli_core::set_thread_cap(Some(n)) {
                    eprintln!("nli: NLI_THREADS: {e}");
                    return ExitCode::from(2);
                }
            }
            Err(_) => {
                eprintln!("nli: NLI_THREADS must be a non-negative integer, got {raw:?}");
                return ExitCode::from(2);
            }
        }
    }

    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, out } => cmd_simulate(&config, &out).map(|summary| {
            println!(
                "{}",
                serde_json::to_string(&summary).expect("summary serializes")
            );
        }),
        Command::Analyze {
            tags,
            period_ps,
            window_ps,
            bins,
            sweep_steps,
            hist_bin_ps,
            hist_range_ps,
            peak_halfwidth_ps,
            out_dir,
        } => {
            let params = AnalyzeParams {
                period_ps,
                window_ps,
                bins,
                sweep_steps,
                hist_bin_ps,
                hist_range_ps,
                peak_halfwidth_ps,
            };
            cmd_analyze(&tags, &params, &out_dir).map(|report| {
                println!(
                    "{}",
                    serde_json::to_string(&report).expect("report serializes")
                );
            })
        }
        Command::Scan {
            config,
            points,
            dwell_s,
            out_dir,
        } => cmd_scan(&config, points, dwell_s, &out_dir).map(|report| {
            println!(
                "{}",
                serde_json::to_string(&report).expect("report serializes")
            );
        }),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nli: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
