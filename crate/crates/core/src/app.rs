//! End-to-end run: obtain an event log, run the pipeline, write the report.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::config::Settings;
use crate::error::{Error, Result};
use crate::events::{ticks_from_events, EventRecord};
use crate::io;
use crate::pipeline::{self, PipelineReport};
use crate::sim;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_PARSE: u8 = 2;
pub const EXIT_ORACLE: u8 = 3;

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } | Error::Ordering { .. } => EXIT_PARSE,
        _ => EXIT_USAGE,
    }
}

/// Exit code for a completed report: any oracle disagreement is a failure.
pub fn report_exit_code(report: &PipelineReport) -> u8 {
    if report.oracle_failures() > 0 {
        EXIT_ORACLE
    } else {
        EXIT_OK
    }
}

/// Event log from the input file, a stress fixture or the simulator.
pub fn load_events(settings: &Settings) -> Result<Vec<EventRecord>> {
    match (&settings.input, settings.stress) {
        (Some(_), Some(_)) => Err(Error::config("--input and --stress are mutually exclusive")),
        (Some(path), None) => io::read_events(path),
        (None, Some(case)) => Ok(case.events()),
        (None, None) => {
            let mut cfg = settings.sim.clone();
            cfg.window_size = settings.pipeline.window_size;
            sim::generate(&cfg)
        }
    }
}

fn relabel(e: Error, path: &Path) -> Error {
    match e {
        Error::Io { source, .. } => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    }
}

fn with_output<T>(
    out: Option<&Path>,
    stdout: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> Result<T>,
) -> Result<T> {
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?;
            f(&mut BufWriter::new(file)).map_err(|e| relabel(e, path))
        }
        None => f(stdout).map_err(|e| relabel(e, Path::new("<stdout>"))),
    }
}

/// Outcome of a successful run.
#[derive(Debug)]
pub enum RunOutput {
    Report(PipelineReport),
    Sweep { rows: usize },
}

pub fn execute(settings: &Settings, stdout: &mut dyn Write) -> Result<RunOutput> {
    let events = load_events(settings)?;
    if let Some(path) = &settings.events_out {
        io::write_events_file(path, &events)?;
    }
    if let Some(taus) = &settings.tau_sweep {
        let ticks = ticks_from_events(&events)?;
        let rows = pipeline::tau_sweep(&ticks, settings.pipeline.window_size, taus)?;
        with_output(settings.out.as_deref(), stdout, |w| {
            io::write_tau_sweep_csv(w, &rows)
        })?;
        return Ok(RunOutput::Sweep { rows: rows.len() });
    }
    let report = pipeline::run_pipeline(&events, &settings.pipeline)?;
    with_output(settings.out.as_deref(), stdout, |w| {
        io::write_report(w, &report.rows, settings.format, settings.pipeline.oracle)
    })?;
    Ok(RunOutput::Report(report))
}

/// Human-readable account of skipped events and failed window statistics.
pub fn write_summary(report: &PipelineReport, w: &mut dyn Write) -> std::io::Result<()> {
    writeln!(
        w,
        "{} full windows ({} leading ticks left out), {} rows, {} skipped events, {} window errors, {} oracle failures",
        report.full_windows,
        report.partial_ticks,
        report.rows.len(),
        report.skipped.len(),
        report.window_errors.len(),
        report.oracle_failures()
    )?;
    for s in &report.skipped {
        writeln!(w, "skipped {} at {}: {}", s.investor_id, s.time, s.reason)?;
    }
    for e in &report.window_errors {
        writeln!(
            w,
            "window {} ({}) {}: {}",
            e.window_index, e.window_anchor, e.family, e.message
        )?;
    }
    Ok(())
}

/// Run and map the outcome to a process exit code.
pub fn run(settings: &Settings, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8 {
    match execute(settings, stdout) {
        Ok(RunOutput::Report(report)) => {
            let _ = write_summary(&report, stderr);
            report_exit_code(&report)
        }
        Ok(RunOutput::Sweep { rows }) => {
            let _ = writeln!(stderr, "{rows} sweep rows");
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}
