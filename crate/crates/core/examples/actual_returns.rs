//! Realized returns per sale, per investor-day and across the market.

use std::collections::BTreeMap;

use market_moments::actual;
use market_moments::{EventRecord, Ledger, MatchPolicy};

fn main() -> market_moments::Result<()> {
    let log = vec![
        EventRecord::buy(0, "ann", 10.0, 2.0),
        EventRecord::buy(1, "ann", 8.0, 3.0),
        EventRecord::buy(2, "bob", 20.0, 10.0),
        EventRecord::sell(3, "ann", 12.0, 4.0),
        EventRecord::sell(4, "bob", 21.0, 4.0),
        EventRecord::sell(5, "ann", 11.0, 1.0),
        EventRecord::sell(6, "bob", 19.5, 6.0),
    ];
    let (_, sales) = Ledger::replay(&log, MatchPolicy::Fifo)?;

    let mut by_investor: BTreeMap<String, Vec<_>> = BTreeMap::new();
    for sale in &sales {
        let s = actual::sale_return_stats(sale)?;
        println!(
            "{} sells at {}: g = {:.4}, σ² = {:.3e} over {} lots",
            sale.investor_id, sale.sale_time, s.mean, s.volatility, s.leg_count
        );
        by_investor
            .entry(sale.investor_id.to_string())
            .or_default()
            .push(s);
    }

    let mut days = Vec::new();
    for (who, sales) in &by_investor {
        let d = actual::investor_day_stats(sales)?;
        println!("{who}: G = {:.4}, σ_G² = {:.3e}", d.mean, d.volatility);
        days.push(d);
    }
    let market = actual::cross_investor_stats(&days)?;
    println!(
        "market: R = {:.4}, σ_R² = {:.3e} (direct {:.3e})",
        market.mean, market.volatility, market.oracle.direct
    );
    Ok(())
}
