//! Matching a sale against purchase lots under each policy.

use market_moments::{InvestorId, Ledger, MatchPolicy};

fn main() -> market_moments::Result<()> {
    let alice = InvestorId::new("alice");
    for policy in [MatchPolicy::Fifo, MatchPolicy::Lifo, MatchPolicy::ProRata] {
        let mut ledger = Ledger::new();
        ledger.record_purchase(&alice, 1, 10.0, 2.0)?;
        ledger.record_purchase(&alice, 2, 8.0, 3.0)?;
        ledger.record_purchase(&alice, 3, 9.0, 5.0)?;
        let sale = ledger.record_sale(&alice, 4, 12.0, 6.0, policy)?;
        println!(
            "{policy}: {} legs, {} shares left",
            sale.leg_count(),
            ledger.remaining_inventory(&alice)
        );
        for leg in &sale.legs {
            println!(
                "  lot@{} {:>6.3} sh  bought {:>4}  return {:.4}",
                leg.lot_purchase_time, leg.matched_volume, leg.lot_price, leg.actual_return
            );
        }
    }

    let mut ledger = Ledger::new();
    ledger.record_purchase(&alice, 1, 10.0, 2.0)?;
    match ledger.record_sale(&alice, 2, 11.0, 5.0, MatchPolicy::Fifo) {
        Err(e) => println!("oversell: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
