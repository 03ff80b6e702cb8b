//! The investor event log: one row per market trade, tagged with the
//! investor who bought or sold.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{InvestorId, Side, TradeTick};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub time: i64,
    pub investor_id: InvestorId,
    pub side: Side,
    pub price: f64,
    pub volume: f64,
    /// Multiplicative present-time price adjustment.
    pub adjust: f64,
}

impl EventRecord {
    pub fn buy(time: i64, investor: &str, price: f64, volume: f64) -> Self {
        EventRecord::new(time, investor, Side::Buy, price, volume)
    }

    pub fn sell(time: i64, investor: &str, price: f64, volume: f64) -> Self {
        EventRecord::new(time, investor, Side::Sell, price, volume)
    }

    pub fn new(time: i64, investor: &str, side: Side, price: f64, volume: f64) -> Self {
        EventRecord {
            time,
            investor_id: InvestorId::new(investor),
            side,
            price,
            volume,
            adjust: 1.0,
        }
    }

    pub fn with_adjust(mut self, adjust: f64) -> Self {
        self.adjust = adjust;
        self
    }

    /// Price after applying the adjustment factor.
    pub fn adjusted_price(&self) -> f64 {
        self.price * self.adjust
    }

    /// The market trade this event represents, with adjustment applied.
    pub fn to_tick(&self) -> Result<TradeTick> {
        TradeTick::new(
            self.time,
            self.investor_id.clone(),
            self.side,
            self.price,
            self.volume,
        )?
        .adjusted(self.adjust)
    }
}

/// Convert a whole log to ticks, checking time order.
pub fn ticks_from_events(events: &[EventRecord]) -> Result<Vec<TradeTick>> {
    let mut out = Vec::with_capacity(events.len());
    let mut previous: Option<i64> = None;
    for (i, e) in events.iter().enumerate() {
        if let Some(p) = previous {
            if e.time < p {
                return Err(Error::Ordering {
                    context: format!("event {i}"),
                    time: e.time,
                    previous: p,
                });
            }
        }
        previous = Some(e.time);
        out.push(e.to_tick()?);
    }
    Ok(out)
}
