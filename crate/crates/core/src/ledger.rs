//! Per-investor purchase-lot ledger.
//!
//! Buys append lots to the investor's queue. A sale is matched against the
//! queue according to a [`MatchPolicy`] and comes back as a
//! [`SaleDecomposition`]: one leg per lot it consumed, each carrying the
//! leg's current value at the sale price, its original value at the lot
//! price and the realized return.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::EventRecord;
use crate::moments::{InvestorId, Side};
use crate::sum;

/// Relative slack when comparing a sale against fractional inventory.
const VOLUME_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum MatchPolicy {
    #[default]
    Fifo,
    Lifo,
    ProRata,
}

impl FromStr for MatchPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fifo" => Ok(MatchPolicy::Fifo),
            "lifo" => Ok(MatchPolicy::Lifo),
            "prorata" | "pro-rata" | "pro_rata" => Ok(MatchPolicy::ProRata),
            other => Err(Error::config(format!("unknown match policy `{other}`"))),
        }
    }
}

impl fmt::Display for MatchPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchPolicy::Fifo => "fifo",
            MatchPolicy::Lifo => "lifo",
            MatchPolicy::ProRata => "prorata",
        })
    }
}

/// A parcel of shares bought at one time and (adjusted) price.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurchaseLot {
    pub purchase_time: i64,
    pub volume_remaining: f64,
    pub adjusted_price: f64,
    /// Value of the remaining volume at the purchase price.
    pub original_value: f64,
}

impl PurchaseLot {
    fn new(purchase_time: i64, adjusted_price: f64, volume: f64) -> Self {
        PurchaseLot {
            purchase_time,
            volume_remaining: volume,
            adjusted_price,
            original_value: adjusted_price * volume,
        }
    }

    fn consume(&mut self, volume: f64) {
        self.volume_remaining -= volume;
        self.original_value = self.adjusted_price * self.volume_remaining;
    }
}

/// The part of a sale matched against one lot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaleLeg {
    pub lot_purchase_time: i64,
    pub matched_volume: f64,
    pub lot_price: f64,
    pub current_value: f64,
    pub original_value: f64,
    pub actual_return: f64,
}

impl SaleLeg {
    fn new(lot: &PurchaseLot, sale_price: f64, volume: f64) -> Self {
        SaleLeg {
            lot_purchase_time: lot.purchase_time,
            matched_volume: volume,
            lot_price: lot.adjusted_price,
            current_value: sale_price * volume,
            original_value: lot.adjusted_price * volume,
            actual_return: sale_price / lot.adjusted_price,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaleDecomposition {
    pub investor_id: InvestorId,
    pub sale_time: i64,
    pub sale_price: f64,
    pub sale_volume: f64,
    pub legs: Vec<SaleLeg>,
}

impl SaleDecomposition {
    pub fn leg_count(&self) -> usize {
        self.legs.len()
    }

    pub fn total_current_value(&self) -> f64 {
        sum::sum(self.legs.iter().map(|l| l.current_value))
    }

    pub fn total_original_value(&self) -> f64 {
        sum::sum(self.legs.iter().map(|l| l.original_value))
    }

    pub fn matched_volume(&self) -> f64 {
        sum::sum(self.legs.iter().map(|l| l.matched_volume))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
struct Book {
    lots: VecDeque<PurchaseLot>,
    last_time: Option<i64>,
    purchased: f64,
    sold: f64,
    /// Running inventory, kept alongside the lots to avoid rescanning them.
    held: f64,
}

impl Book {
    fn remaining(&self) -> f64 {
        sum::sum(self.lots.iter().map(|l| l.volume_remaining))
    }

    fn check_time(&self, investor: &InvestorId, time: i64) -> Result<()> {
        match self.last_time {
            Some(prev) if time < prev => Err(Error::Ordering {
                context: format!("investor {investor}"),
                time,
                previous: prev,
            }),
            _ => Ok(()),
        }
    }
}

/// Cost-basis ledger for any number of investors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ledger {
    books: BTreeMap<InvestorId, Book>,
    integer_volumes: bool,
}

fn check_positive(what: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} must be positive, got {v}")))
    }
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Only whole-share volumes are accepted; pro-rata splits are rounded by
    /// largest remainder.
    pub fn with_integer_volumes(mut self, on: bool) -> Self {
        self.integer_volumes = on;
        self
    }

    fn check_volume(&self, volume: f64) -> Result<()> {
        check_positive("volume", volume)?;
        if self.integer_volumes && volume.fract() != 0.0 {
            return Err(Error::domain(format!(
                "volume {volume} is not a whole number of shares"
            )));
        }
        Ok(())
    }

    pub fn record_purchase(
        &mut self,
        investor: &InvestorId,
        time: i64,
        price: f64,
        volume: f64,
    ) -> Result<()> {
        check_positive("price", price)?;
        self.check_volume(volume)?;
        let book = self.books.entry(investor.clone()).or_default();
        book.check_time(investor, time)?;
        book.last_time = Some(time);
        book.purchased += volume;
        book.held += volume;
        book.lots.push_back(PurchaseLot::new(time, price, volume));
        Ok(())
    }

    /// Seed inventory that predates the event log.
    pub fn seed_opening_inventory(
        &mut self,
        investor: &InvestorId,
        time: i64,
        price: f64,
        volume: f64,
    ) -> Result<()> {
        self.record_purchase(investor, time, price, volume)
    }

    pub fn record_sale(
        &mut self,
        investor: &InvestorId,
        time: i64,
        price: f64,
        volume: f64,
        policy: MatchPolicy,
    ) -> Result<SaleDecomposition> {
        check_positive("price", price)?;
        self.check_volume(volume)?;
        let integer = self.integer_volumes;
        let Some(book) = self.books.get_mut(investor) else {
            return Err(Error::InsufficientInventory {
                investor: investor.to_string(),
                shortfall: volume,
            });
        };
        book.check_time(investor, time)?;
        let available = book.held;
        if volume > available * (1.0 + VOLUME_EPS) {
            return Err(Error::InsufficientInventory {
                investor: investor.to_string(),
                shortfall: volume - available,
            });
        }
        book.last_time = Some(time);
        book.sold += volume;
        book.held = if volume >= available {
            0.0
        } else {
            book.held - volume
        };

        let legs = if volume >= available {
            // Full liquidation: every lot goes in full.
            let legs = book
                .lots
                .iter()
                .map(|lot| SaleLeg::new(lot, price, lot.volume_remaining));
            let legs: Vec<_> = match policy {
                MatchPolicy::Lifo => legs.rev().collect(),
                _ => legs.collect(),
            };
            book.lots.clear();
            legs
        } else {
            match policy {
                MatchPolicy::Fifo => match_sequential(&mut book.lots, price, volume, false),
                MatchPolicy::Lifo => match_sequential(&mut book.lots, price, volume, true),
                MatchPolicy::ProRata => {
                    let on_hand = book.remaining();
                    match_pro_rata(&mut book.lots, price, volume, on_hand, integer)
                }
            }
        };

        Ok(SaleDecomposition {
            investor_id: investor.clone(),
            sale_time: time,
            sale_price: price,
            sale_volume: volume,
            legs,
        })
    }

    /// Apply one event. Buys return `None`, sales their decomposition.
    pub fn apply(
        &mut self,
        event: &EventRecord,
        policy: MatchPolicy,
    ) -> Result<Option<SaleDecomposition>> {
        check_positive("adjust", event.adjust)?;
        let price = event.adjusted_price();
        match event.side {
            Side::Buy => self
                .record_purchase(&event.investor_id, event.time, price, event.volume)
                .map(|_| None),
            Side::Sell => self
                .record_sale(&event.investor_id, event.time, price, event.volume, policy)
                .map(Some),
        }
    }

    /// Replay a whole log, stopping at the first error.
    pub fn replay(
        events: &[EventRecord],
        policy: MatchPolicy,
    ) -> Result<(Ledger, Vec<SaleDecomposition>)> {
        let mut ledger = Ledger::new();
        let mut sales = Vec::new();
        for e in events {
            if let Some(sale) = ledger.apply(e, policy)? {
                sales.push(sale);
            }
        }
        Ok((ledger, sales))
    }

    pub fn remaining_inventory(&self, investor: &InvestorId) -> f64 {
        self.books.get(investor).map_or(0.0, Book::remaining)
    }

    pub fn total_purchased(&self, investor: &InvestorId) -> f64 {
        self.books.get(investor).map_or(0.0, |b| b.purchased)
    }

    pub fn total_sold(&self, investor: &InvestorId) -> f64 {
        self.books.get(investor).map_or(0.0, |b| b.sold)
    }

    pub fn lots(&self, investor: &InvestorId) -> impl Iterator<Item = &PurchaseLot> {
        self.books
            .get(investor)
            .into_iter()
            .flat_map(|b| b.lots.iter())
    }

    pub fn investors(&self) -> impl Iterator<Item = &InvestorId> {
        self.books.keys()
    }
}

fn match_sequential(
    lots: &mut VecDeque<PurchaseLot>,
    price: f64,
    volume: f64,
    newest_first: bool,
) -> Vec<SaleLeg> {
    let mut legs = Vec::new();
    let mut need = volume;
    while need > 0.0 {
        let lot = if newest_first {
            lots.back_mut()
        } else {
            lots.front_mut()
        };
        let Some(lot) = lot else { break };
        let take = need.min(lot.volume_remaining);
        legs.push(SaleLeg::new(lot, price, take));
        lot.consume(take);
        need -= take;
        if lot.volume_remaining <= VOLUME_EPS * take {
            if newest_first {
                lots.pop_back();
            } else {
                lots.pop_front();
            }
        }
    }
    legs
}

fn match_pro_rata(
    lots: &mut VecDeque<PurchaseLot>,
    price: f64,
    volume: f64,
    available: f64,
    integer: bool,
) -> Vec<SaleLeg> {
    let shares: Vec<f64> = lots
        .iter()
        .map(|l| volume * l.volume_remaining / available)
        .collect();
    let takes = if integer {
        largest_remainder(&shares, volume, lots)
    } else {
        let mut takes = shares;
        let last = takes.len() - 1;
        let others = sum::sum(takes[..last].iter().copied());
        takes[last] = (volume - others).clamp(0.0, lots[last].volume_remaining);
        takes
    };
    let mut legs = Vec::with_capacity(takes.len());
    for (lot, take) in lots.iter_mut().zip(takes) {
        if take > 0.0 {
            legs.push(SaleLeg::new(lot, price, take));
            lot.consume(take);
        }
    }
    lots.retain(|l| l.volume_remaining > VOLUME_EPS * volume);
    legs
}

/// Round proportional shares to whole numbers summing to `volume`, giving
/// leftover units to the largest fractional parts (earlier lots win ties).
fn largest_remainder(shares: &[f64], volume: f64, lots: &VecDeque<PurchaseLot>) -> Vec<f64> {
    let mut takes: Vec<f64> = shares.iter().map(|s| s.floor()).collect();
    let mut leftover = (volume - takes.iter().sum::<f64>()).round() as i64;
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = shares[a] - takes[a];
        let fb = shares[b] - takes[b];
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    while leftover > 0 {
        let mut progressed = false;
        for &i in &order {
            if leftover == 0 {
                break;
            }
            if takes[i] + 1.0 <= lots[i].volume_remaining {
                takes[i] += 1.0;
                leftover -= 1;
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    takes
}
