//! Returns an investor could have realized by holding for a fixed horizon.

use market_moments::anticipated::{self, Tau};
use market_moments::moments::{partition_windows, InvestorId, Side, TradeTick};

fn main() -> market_moments::Result<()> {
    let prices = [10.0, 10.5, 10.2, 11.0, 10.8, 11.3, 11.1, 11.6];
    let ticks: Vec<TradeTick> = prices
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            TradeTick::new(
                60 * i as i64,
                InvestorId::new("m"),
                Side::Buy,
                p,
                10.0 + i as f64,
            )
        })
        .collect::<Result<_, _>>()?;
    let windows = partition_windows(&ticks, 4)?;
    let last = windows.full.last().expect("two full windows");

    for tau in ["2t", "4t", "120s", "3g"] {
        let shift = tau.parse::<Tau>()?.resolve(&ticks)?;
        let pairs = anticipated::shifted_pairs_in(&ticks, last.range(), shift)?;
        let s = anticipated::return_stats(&pairs)?;
        println!(
            "tau {tau:>4} ({shift}): mean {:.6}  volatility {:.3e}  cov(C, C_o) {:.3}",
            s.mean, s.volatility, s.current_past_cov
        );
    }
    Ok(())
}
