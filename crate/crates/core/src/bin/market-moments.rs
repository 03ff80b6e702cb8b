use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use market_moments::app::{self, EXIT_OK, EXIT_USAGE};
use market_moments::config::Settings;
use market_moments::Error;

/// Market-weighted price and return statistics per trading day.
///
/// Reads an event log (`--input`), a named stress fixture (`--stress`) or
/// simulates one (`--seed` / `--sim`), and writes one report row per statistic.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// Event log CSV: time,investor_id,side,price,volume[,adjust]
    #[arg(long)]
    input: Option<PathBuf>,
    /// Ticks per trading day
    #[arg(long)]
    window: Option<String>,
    /// Return horizon: 20 or 20t (ticks), 30s/5m/2h/1d (time), 1.5g (median gaps)
    #[arg(long)]
    tau: Option<String>,
    /// fifo, lifo or prorata
    #[arg(long)]
    policy: Option<String>,
    /// Recompute every volatility directly and report the deltas
    #[arg(long)]
    oracle: bool,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    /// Simulator seed
    #[arg(long)]
    seed: Option<String>,
    /// Settings file of `key = value` lines; flags override it
    #[arg(long)]
    sim: Option<PathBuf>,
    /// Report destination (default stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the event log that was analysed
    #[arg(long)]
    events_out: Option<PathBuf>,
    /// Comma-separated horizons; writes a volatility-versus-horizon CSV instead of the report
    #[arg(long)]
    tau_sweep: Option<String>,
    /// Named fixture: single_lot_single_sale, one_giant_lot, many_tiny_lots,
    /// all_same_investor, one_sale_per_investor
    #[arg(long)]
    stress: Option<String>,
}

fn settings(cli: &Cli) -> Result<Settings, Error> {
    let mut s = Settings::default();
    if let Some(path) = &cli.sim {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        s.apply_config_text(&text)?;
    }
    let flags = [
        ("window", &cli.window),
        ("tau", &cli.tau),
        ("policy", &cli.policy),
        ("format", &cli.format),
        ("seed", &cli.seed),
        ("tau_sweep", &cli.tau_sweep),
        ("stress", &cli.stress),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            s.set(key, v)?;
        }
    }
    if cli.oracle {
        s.pipeline.oracle = true;
    }
    if cli.input.is_some() {
        s.input.clone_from(&cli.input);
    }
    if cli.out.is_some() {
        s.out.clone_from(&cli.out);
    }
    if cli.events_out.is_some() {
        s.events_out.clone_from(&cli.events_out);
    }
    Ok(s)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    let settings = match settings(&cli) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(app::exit_code(&e));
        }
    };
    let code = app::run(
        &settings,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    ExitCode::from(code)
}
