//! Full pipeline over a simulated market with the direct-sum cross-check on.

use market_moments::pipeline::{run_pipeline, Family, PipelineOptions};
use market_moments::sim::{self, SimConfig};

fn main() -> market_moments::Result<()> {
    let log = sim::generate(&SimConfig {
        seed: 42,
        investor_count: 20,
        tick_count: 5_000,
        ..SimConfig::default()
    })?;
    let report = run_pipeline(
        &log,
        &PipelineOptions {
            window_size: 500,
            oracle: true,
            ..PipelineOptions::default()
        },
    )?;

    for family in Family::ALL {
        let worst = report
            .rows_of(family)
            .filter_map(|r| r.oracle_delta_rel)
            .fold(0.0f64, f64::max);
        println!(
            "{family:<16} rows {:>5}  worst relative delta {worst:.2e}",
            report.rows_of(family).count()
        );
    }
    println!("oracle failures: {}", report.oracle_failures());

    let mut out = std::io::stdout().lock();
    let tail: Vec<_> = report.rows_of(Family::ActualMarket).cloned().collect();
    market_moments::io::write_report_csv(&mut out, &tail, true)?;
    Ok(())
}
