//! Seeded synthetic market.
//!
//! The generator is xoshiro256** seeded through SplitMix64 (the reference
//! seeding of that generator), and every distribution below is sampled with
//! an explicit formula so that other implementations can reproduce a log
//! bit for bit:
//!
//! * uniform `u ∈ [0, 1)`: `(next_u64 >> 11) · 2⁻⁵³`
//! * integer below `n`: `(next_u64 · n) >> 64` (128-bit product)
//! * standard normal: Box–Muller cosine branch, `√(−2 ln(1 − u₁)) · cos(2π u₂)`
//! * Pareto: `min · (1 − u)^(−1/α)`, floored to whole shares (at least one)
//!
//! Per tick the draws happen in a fixed order: price, investor, volume, side.

use std::fmt;
use std::str::FromStr;

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::error::{Error, Result};
use crate::events::EventRecord;
use crate::moments::{InvestorId, Side};

#[derive(Debug, Clone)]
pub struct SimRng(Xoshiro256StarStar);

impl SimRng {
    pub fn new(seed: u64) -> Self {
        SimRng(Xoshiro256StarStar::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n`. `n` must be non-zero.
    pub fn below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn lognormal(&mut self, mu: f64, sigma: f64) -> f64 {
        (mu + sigma * self.normal()).exp()
    }

    /// Continuous Pareto sample.
    pub fn pareto(&mut self, alpha: f64, min: f64) -> f64 {
        min * (1.0 - self.uniform()).powf(-1.0 / alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriceModel {
    Constant(f64),
    /// Multiplicative random walk starting at `start`.
    GeometricWalk {
        start: f64,
        drift: f64,
        step_vol: f64,
    },
    /// Independent lognormal draws.
    Lognormal {
        mu: f64,
        sigma: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VolumeModel {
    Fixed(f64),
    /// Inclusive range of whole shares.
    UniformInt {
        lo: u64,
        hi: u64,
    },
    Pareto {
        alpha: f64,
        min: f64,
    },
}

impl VolumeModel {
    fn sample(&self, rng: &mut SimRng) -> f64 {
        match *self {
            VolumeModel::Fixed(v) => v,
            VolumeModel::UniformInt { lo, hi } => (lo + rng.below(hi - lo + 1)) as f64,
            VolumeModel::Pareto { alpha, min } => rng.pareto(alpha, min).floor().max(1.0),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be positive, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be finite")))
    }
}

impl PriceModel {
    fn validate(&self) -> Result<()> {
        match *self {
            PriceModel::Constant(c) => positive("constant price", c),
            PriceModel::GeometricWalk {
                start,
                drift,
                step_vol,
            } => {
                positive("start price", start)?;
                finite("drift", drift)?;
                positive("step volatility", step_vol)
            }
            PriceModel::Lognormal { mu, sigma } => {
                finite("mu", mu)?;
                positive("sigma", sigma)
            }
        }
    }
}

impl VolumeModel {
    fn validate(&self) -> Result<()> {
        match *self {
            VolumeModel::Fixed(v) => positive("fixed volume", v),
            VolumeModel::UniformInt { lo, hi } if lo >= 1 && lo <= hi => Ok(()),
            VolumeModel::UniformInt { lo, hi } => Err(Error::config(format!(
                "uniform volume range {lo}..={hi} is invalid"
            ))),
            VolumeModel::Pareto { alpha, min } => {
                positive("pareto alpha", alpha)?;
                positive("pareto minimum", min)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub investor_count: usize,
    pub tick_count: usize,
    pub price_model: PriceModel,
    pub volume_model: VolumeModel,
    /// Probability that a tick is a buy.
    pub buy_probability: f64,
    pub window_size: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 1,
            investor_count: 10,
            tick_count: 1_000,
            price_model: PriceModel::GeometricWalk {
                start: 100.0,
                drift: 0.0,
                step_vol: 0.01,
            },
            volume_model: VolumeModel::UniformInt { lo: 1, hi: 100 },
            buy_probability: 0.55,
            window_size: 100,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.investor_count == 0 {
            return Err(Error::config("investor_count must be at least 1"));
        }
        if self.window_size == 0 {
            return Err(Error::config("window_size must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.buy_probability) {
            return Err(Error::config(format!(
                "buy probability {} outside [0, 1]",
                self.buy_probability
            )));
        }
        self.price_model.validate()?;
        self.volume_model.validate()
    }
}

pub fn investor_name(q: usize) -> String {
    format!("inv{q:04}")
}

/// Generate an inventory-feasible event log. Sells the chosen investor cannot
/// cover are turned into buys.
pub fn generate(config: &SimConfig) -> Result<Vec<EventRecord>> {
    config.validate()?;
    let mut rng = SimRng::new(config.seed);
    let ids: Vec<InvestorId> = (0..config.investor_count)
        .map(|q| InvestorId::from(investor_name(q)))
        .collect();
    let mut inventory = vec![0.0f64; config.investor_count];
    let mut price = match config.price_model {
        PriceModel::GeometricWalk { start, .. } => start,
        _ => 0.0,
    };
    let mut events = Vec::with_capacity(config.tick_count);
    for k in 0..config.tick_count {
        price = match config.price_model {
            PriceModel::Constant(c) => c,
            PriceModel::GeometricWalk {
                drift, step_vol, ..
            } => {
                if k == 0 {
                    price
                } else {
                    price * (drift + step_vol * rng.normal()).exp()
                }
            }
            PriceModel::Lognormal { mu, sigma } => rng.lognormal(mu, sigma),
        };
        let q = rng.below(config.investor_count as u64) as usize;
        let volume = config.volume_model.sample(&mut rng);
        let mut side = if rng.uniform() < config.buy_probability {
            Side::Buy
        } else {
            Side::Sell
        };
        if side == Side::Sell && inventory[q] < volume {
            side = Side::Buy;
        }
        match side {
            Side::Buy => inventory[q] += volume,
            Side::Sell => inventory[q] -= volume,
        }
        events.push(EventRecord {
            time: k as i64,
            investor_id: ids[q].clone(),
            side,
            price,
            volume,
            adjust: 1.0,
        });
    }
    Ok(events)
}

/// Hand-built logs that drive the degenerate branches of the statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StressCase {
    /// One buy, one full sale: a single leg (M = 1), one sale (N = 1).
    SingleLotSingleSale,
    /// A huge lot sold off in small pieces, every sale single-leg.
    OneGiantLot,
    /// A hundred one-share lots liquidated by one sale.
    ManyTinyLots,
    /// A single investor trading back and forth (Q = 1).
    AllSameInvestor,
    /// Eight investors each buy one lot, then each sells it whole.
    OneSalePerInvestor,
}

impl StressCase {
    pub const ALL: [StressCase; 5] = [
        StressCase::SingleLotSingleSale,
        StressCase::OneGiantLot,
        StressCase::ManyTinyLots,
        StressCase::AllSameInvestor,
        StressCase::OneSalePerInvestor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StressCase::SingleLotSingleSale => "single_lot_single_sale",
            StressCase::OneGiantLot => "one_giant_lot",
            StressCase::ManyTinyLots => "many_tiny_lots",
            StressCase::AllSameInvestor => "all_same_investor",
            StressCase::OneSalePerInvestor => "one_sale_per_investor",
        }
    }

    pub fn events(self) -> Vec<EventRecord> {
        match self {
            StressCase::SingleLotSingleSale => vec![
                EventRecord::buy(0, "inv0000", 10.0, 10.0),
                EventRecord::sell(1, "inv0000", 12.0, 10.0),
            ],
            StressCase::OneGiantLot => {
                let mut ev = vec![EventRecord::buy(0, "inv0000", 10.0, 1_000_000.0)];
                ev.extend(
                    (1..10)
                        .map(|k| EventRecord::sell(k, "inv0000", 10.0 + 0.5 * k as f64, 1_000.0)),
                );
                ev
            }
            StressCase::ManyTinyLots => {
                let mut ev: Vec<_> = (0..100)
                    .map(|k| EventRecord::buy(k, "inv0000", 10.0 + 0.1 * k as f64, 1.0))
                    .collect();
                ev.push(EventRecord::sell(100, "inv0000", 12.0, 100.0));
                ev
            }
            StressCase::AllSameInvestor => vec![
                EventRecord::buy(0, "inv0000", 10.0, 10.0),
                EventRecord::buy(1, "inv0000", 11.0, 10.0),
                EventRecord::sell(2, "inv0000", 12.0, 5.0),
                EventRecord::buy(3, "inv0000", 10.5, 5.0),
                EventRecord::sell(4, "inv0000", 12.5, 8.0),
                EventRecord::sell(5, "inv0000", 11.0, 7.0),
            ],
            StressCase::OneSalePerInvestor => {
                let q = 8;
                let mut ev: Vec<_> = (0..q)
                    .map(|k| {
                        EventRecord::buy(
                            k,
                            &investor_name(k as usize),
                            10.0 + 0.5 * k as f64,
                            10.0 * (k + 1) as f64,
                        )
                    })
                    .collect();
                ev.extend((0..q).map(|k| {
                    EventRecord::sell(
                        q + k,
                        &investor_name(k as usize),
                        11.0 + 0.75 * (k % 3) as f64,
                        10.0 * (k + 1) as f64,
                    )
                }));
                ev
            }
        }
    }
}

impl FromStr for StressCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StressCase::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::config(format!("unknown stress case `{s}`")))
    }
}

impl fmt::Display for StressCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Look up a stress fixture by name.
pub fn stress_case(name: &str) -> Result<Vec<EventRecord>> {
    Ok(name.parse::<StressCase>()?.events())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::{Ledger, MatchPolicy};

    #[test]
    fn same_seed_same_log() {
        let cfg = SimConfig {
            seed: 42,
            ..SimConfig::default()
        };
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let other = SimConfig {
            seed: 43,
            ..cfg.clone()
        };
        assert_ne!(generate(&cfg).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn generated_logs_replay() {
        for policy in [MatchPolicy::Fifo, MatchPolicy::Lifo, MatchPolicy::ProRata] {
            let cfg = SimConfig {
                seed: 7,
                volume_model: VolumeModel::Pareto {
                    alpha: 1.5,
                    min: 1.0,
                },
                ..SimConfig::default()
            };
            let log = generate(&cfg).unwrap();
            Ledger::replay(&log, policy).unwrap();
        }
    }

    #[test]
    fn all_buys_when_probability_is_one() {
        let cfg = SimConfig {
            buy_probability: 1.0,
            ..SimConfig::default()
        };
        assert!(generate(&cfg).unwrap().iter().all(|e| e.side == Side::Buy));
    }

    #[test]
    fn invalid_configs() {
        let bad = [
            SimConfig {
                investor_count: 0,
                ..SimConfig::default()
            },
            SimConfig {
                buy_probability: 1.5,
                ..SimConfig::default()
            },
            SimConfig {
                window_size: 0,
                ..SimConfig::default()
            },
            SimConfig {
                price_model: PriceModel::Constant(0.0),
                ..SimConfig::default()
            },
            SimConfig {
                price_model: PriceModel::Lognormal {
                    mu: 0.0,
                    sigma: -1.0,
                },
                ..SimConfig::default()
            },
            SimConfig {
                volume_model: VolumeModel::UniformInt { lo: 5, hi: 2 },
                ..SimConfig::default()
            },
            SimConfig {
                volume_model: VolumeModel::Pareto {
                    alpha: 0.0,
                    min: 1.0,
                },
                ..SimConfig::default()
            },
        ];
        for cfg in bad {
            assert!(matches!(generate(&cfg), Err(Error::Config(_))), "{cfg:?}");
        }
    }

    #[test]
    fn uniform_range() {
        let mut rng = SimRng::new(3);
        for _ in 0..10_000 {
            let u = rng.uniform();
            assert!((0.0..1.0).contains(&u));
            assert!(rng.below(7) < 7);
        }
    }

    #[test]
    fn stress_lookup() {
        for case in StressCase::ALL {
            assert_eq!(stress_case(case.name()).unwrap(), case.events());
            Ledger::replay(&case.events(), MatchPolicy::Fifo).unwrap();
        }
        assert!(matches!(stress_case("nope"), Err(Error::Config(_))));
    }
}
