//! Volume-weighted price moments for one trading day.

use market_moments::moments::{partition_windows, InvestorId, Side, TradeTick};
use market_moments::price;

fn main() -> market_moments::Result<()> {
    let trades = [
        (0, 10.0, 100.0),
        (1, 10.2, 300.0),
        (2, 9.9, 50.0),
        (3, 10.4, 250.0),
        (4, 10.1, 120.0),
    ];
    let ticks: Vec<TradeTick> = trades
        .iter()
        .map(|&(t, p, v)| TradeTick::new(t, InvestorId::new("desk"), Side::Buy, p, v))
        .collect::<Result<_, _>>()?;

    // five ticks in windows of two: the oldest tick is left over
    let windows = partition_windows(&ticks, 2)?;
    println!(
        "partial window: {:?} ticks",
        windows.partial.map(|w| w.tick_count())
    );
    for w in &windows.full {
        let s = price::price_stats(w)?;
        let direct = price::direct_price_volatility(w)?;
        println!(
            "anchor {}: vwap {:.4}  second {:.4}  volatility {:.6} (direct {:.6})",
            w.anchor_time(),
            s.mean,
            s.second_moment,
            s.volatility,
            direct.volatility
        );
    }

    let day = partition_windows(&ticks, ticks.len())?.full[0];
    for m in 1..=2 {
        println!(
            "a(t;{m}) = {:.6}",
            price::weighted_price_moment(&day, 1, m)?
        );
    }
    Ok(())
}
