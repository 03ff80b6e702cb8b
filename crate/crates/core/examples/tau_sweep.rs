//! Anticipated volatility as a function of the horizon, as plot-ready CSV.

use market_moments::events::ticks_from_events;
use market_moments::pipeline::tau_sweep;
use market_moments::sim::{self, SimConfig};

fn main() -> market_moments::Result<()> {
    let log = sim::generate(&SimConfig {
        seed: 7,
        tick_count: 2_000,
        ..SimConfig::default()
    })?;
    let ticks = ticks_from_events(&log)?;
    let taus = market_moments::config::parse_tau_list("1,2,5,10,20,50,100,200")?;
    let rows = tau_sweep(&ticks, 200, &taus)?;
    market_moments::io::write_tau_sweep_csv(std::io::stdout().lock(), &rows)?;
    Ok(())
}
