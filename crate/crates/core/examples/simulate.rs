//! Generate a seeded event log and the named stress fixtures.

use market_moments::io;
use market_moments::sim::{self, PriceModel, SimConfig, StressCase, VolumeModel};

fn main() -> market_moments::Result<()> {
    let cfg = SimConfig {
        seed: 2024,
        investor_count: 4,
        tick_count: 12,
        price_model: PriceModel::Lognormal {
            mu: 3.0,
            sigma: 0.05,
        },
        volume_model: VolumeModel::Pareto {
            alpha: 1.5,
            min: 10.0,
        },
        ..SimConfig::default()
    };
    let log = sim::generate(&cfg)?;
    io::write_events(std::io::stdout().lock(), &log)?;
    assert_eq!(log, sim::generate(&cfg)?);

    for case in StressCase::ALL {
        println!("{case}: {} events", case.events().len());
    }
    Ok(())
}
