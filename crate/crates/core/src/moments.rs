//! Trade ticks, count-based trading-day windows and the frequency-based
//! (equal-weight) moment estimators everything else is built on.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::{self, NeumaierSum};

/// Absolute floor below which a negative variance is treated as rounding noise.
pub const VARIANCE_NOISE_FLOOR: f64 = 1e-12;

/// Opaque investor identifier. Cheap to clone.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InvestorId(Arc<str>);

impl InvestorId {
    pub fn new(id: &str) -> Self {
        InvestorId(Arc::from(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for InvestorId {
    fn from(s: &str) -> Self {
        InvestorId::new(s)
    }
}

impl From<String> for InvestorId {
    fn from(s: String) -> Self {
        InvestorId(Arc::from(s))
    }
}

impl fmt::Display for InvestorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for InvestorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn code(self) -> &'static str {
        match self {
            Side::Buy => "B",
            Side::Sell => "S",
        }
    }
}

/// One market trade. `value` is always `price * volume`.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeTick {
    time: i64,
    investor_id: InvestorId,
    side: Side,
    price: f64,
    volume: f64,
    value: f64,
}

impl TradeTick {
    pub fn new(
        time: i64,
        investor_id: impl Into<InvestorId>,
        side: Side,
        price: f64,
        volume: f64,
    ) -> Result<Self> {
        if !(price.is_finite() && price > 0.0) {
            return Err(Error::domain(format!(
                "price must be positive, got {price}"
            )));
        }
        if !(volume.is_finite() && volume > 0.0) {
            return Err(Error::domain(format!(
                "volume must be positive, got {volume}"
            )));
        }
        Ok(TradeTick {
            time,
            investor_id: investor_id.into(),
            side,
            price,
            volume,
            value: price * volume,
        })
    }

    /// Rescale price and value by a present-time adjustment factor.
    pub fn adjusted(mut self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::domain(format!(
                "adjustment factor must be positive, got {factor}"
            )));
        }
        if factor != 1.0 {
            self.price *= factor;
            self.value = self.price * self.volume;
        }
        Ok(self)
    }

    pub fn time(&self) -> i64 {
        self.time
    }

    pub fn investor_id(&self) -> &InvestorId {
        &self.investor_id
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn price(&self) -> f64 {
        self.price
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

/// A "trading day": a run of consecutive ticks over which all statistics are
/// averaged. Windows are count-based; `anchor_time` is the time of the last
/// tick in the window.
#[derive(Debug, Clone, Copy)]
pub struct TradingDayWindow<'a> {
    anchor_time: i64,
    /// Offset of the first tick in the series the window was cut from.
    start: usize,
    ticks: &'a [TradeTick],
    eligible: bool,
}

impl<'a> TradingDayWindow<'a> {
    /// Wrap a standalone run of ticks as a full window.
    pub fn new(ticks: &'a [TradeTick]) -> Result<Self> {
        if ticks.is_empty() {
            return Err(Error::domain("empty window"));
        }
        check_time_order(ticks)?;
        Ok(Self::from_parts(ticks, 0, true))
    }

    fn from_parts(ticks: &'a [TradeTick], start: usize, eligible: bool) -> Self {
        TradingDayWindow {
            anchor_time: ticks.last().map(TradeTick::time).unwrap_or_default(),
            start,
            ticks,
            eligible,
        }
    }

    pub fn anchor_time(&self) -> i64 {
        self.anchor_time
    }

    pub fn tick_count(&self) -> usize {
        self.ticks.len()
    }

    pub fn ticks(&self) -> &'a [TradeTick] {
        self.ticks
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.ticks.len()
    }

    /// Partial windows never produce statistics.
    pub fn is_eligible(&self) -> bool {
        self.eligible
    }

    pub fn prices(&self) -> impl Iterator<Item = f64> + 'a {
        self.ticks.iter().map(TradeTick::price)
    }

    pub fn volumes(&self) -> impl Iterator<Item = f64> + 'a {
        self.ticks.iter().map(TradeTick::volume)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + 'a {
        self.ticks.iter().map(TradeTick::value)
    }
}

/// Result of cutting a tick series into trading days.
#[derive(Debug, Clone)]
pub struct WindowPartition<'a> {
    /// Leading ticks that do not fill a window, oldest first.
    pub partial: Option<TradingDayWindow<'a>>,
    /// Full windows in chronological order; the last one ends at the last tick.
    pub full: Vec<TradingDayWindow<'a>>,
}

impl<'a> WindowPartition<'a> {
    /// All windows, partial first, in time order.
    pub fn iter(&self) -> impl Iterator<Item = &TradingDayWindow<'a>> {
        self.partial.iter().chain(self.full.iter())
    }
}

fn check_time_order(ticks: &[TradeTick]) -> Result<()> {
    for (i, pair) in ticks.windows(2).enumerate() {
        if pair[1].time < pair[0].time {
            return Err(Error::Ordering {
                context: format!("tick {}", i + 1),
                time: pair[1].time,
                previous: pair[0].time,
            });
        }
    }
    Ok(())
}

/// Cut `ticks` into consecutive non-overlapping windows of exactly
/// `tick_count` ticks, counting back from the most recent tick.
pub fn partition_windows(ticks: &[TradeTick], tick_count: usize) -> Result<WindowPartition<'_>> {
    if tick_count == 0 {
        return Err(Error::config("window tick count must be at least 1"));
    }
    check_time_order(ticks)?;
    let remainder = ticks.len() % tick_count;
    let partial =
        (remainder > 0).then(|| TradingDayWindow::from_parts(&ticks[..remainder], 0, false));
    let full = ticks[remainder..]
        .chunks_exact(tick_count)
        .enumerate()
        .map(|(k, chunk)| TradingDayWindow::from_parts(chunk, remainder + k * tick_count, true))
        .collect();
    Ok(WindowPartition { partial, full })
}

fn non_empty(series: &[f64]) -> Result<()> {
    if series.is_empty() {
        Err(Error::domain("empty series"))
    } else {
        Ok(())
    }
}

/// Frequency-based n-th raw moment `(1/N) Σ xᵢⁿ`.
pub fn raw_moment(series: &[f64], n: u32) -> Result<f64> {
    non_empty(series)?;
    if n == 0 {
        return Err(Error::domain("moment order must be at least 1"));
    }
    let exp = i32::try_from(n).map_err(|_| Error::domain("moment order too large"))?;
    Ok(sum::sum(series.iter().map(|x| x.powi(exp))) / series.len() as f64)
}

pub fn mean(series: &[f64]) -> Result<f64> {
    raw_moment(series, 1)
}

/// Frequency-based variance `E[x²] − E[x]²`, evaluated in centered form.
pub fn variance(series: &[f64]) -> Result<f64> {
    covariance(series, series)
}

/// Frequency-based covariance `E[xy] − E[x]E[y]` over index-paired series.
pub fn covariance(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::domain(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    non_empty(xs)?;
    let mx = mean(xs)?;
    let my = mean(ys)?;
    let mut acc = NeumaierSum::new();
    for (x, y) in xs.iter().zip(ys) {
        acc.add((x - mx) * (y - my));
    }
    Ok(acc.value() / xs.len() as f64)
}

/// Apply the noise-floor rule to a variance-like quantity: values in
/// `[-tolerance, 0)` become zero, anything lower is an error.
pub fn clamp_variance(value: f64, tolerance: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -tolerance {
        Ok(0.0)
    } else {
        Err(Error::NegativeVariance { value, tolerance })
    }
}

/// Raw moments up to a chosen order together with the variance.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    count: usize,
    raw_moments: Vec<f64>,
    variance: f64,
}

impl MomentSet {
    pub fn from_series(series: &[f64], max_order: u32) -> Result<Self> {
        non_empty(series)?;
        let max_order = max_order.max(2);
        let raw_moments = (1..=max_order)
            .map(|n| raw_moment(series, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(MomentSet {
            count: series.len(),
            raw_moments,
            variance: variance(series)?,
        })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn max_order(&self) -> u32 {
        self.raw_moments.len() as u32
    }

    /// Raw moment of order `n`, if it was computed.
    pub fn raw(&self, n: u32) -> Option<f64> {
        let idx = usize::try_from(n).ok()?.checked_sub(1)?;
        self.raw_moments.get(idx).copied()
    }

    pub fn mean(&self) -> f64 {
        self.raw_moments[0]
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ticks(n: usize) -> Vec<TradeTick> {
        (0..n)
            .map(|i| TradeTick::new(i as i64, "a", Side::Buy, 10.0 + i as f64, 1.0).unwrap())
            .collect()
    }

    #[test]
    fn raw_moment_examples() {
        assert_eq!(raw_moment(&[1.0, 2.0, 3.0], 1).unwrap(), 2.0);
        assert!((raw_moment(&[1.0, 2.0, 3.0], 2).unwrap() - 14.0 / 3.0).abs() < 1e-15);
        assert_eq!(raw_moment(&[5.0; 4], 3).unwrap(), 125.0);
        assert!(matches!(raw_moment(&[], 1), Err(Error::Domain(_))));
    }

    #[test]
    fn variance_examples() {
        assert_eq!(variance(&[7.0; 3]).unwrap(), 0.0);
        assert_eq!(variance(&[1.0, 3.0]).unwrap(), 1.0);
        assert!((variance(&[10.0, 20.0, 30.0]).unwrap() - 200.0 / 3.0).abs() < 1e-12);
        assert!(variance(&[]).is_err());
    }

    #[test]
    fn covariance_examples() {
        assert_eq!(covariance(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.25);
        assert_eq!(covariance(&[4.0; 3], &[1.0, -7.0, 2.5]).unwrap(), 0.0);
        assert_eq!(covariance(&[1.0, -1.0], &[-1.0, 1.0]).unwrap(), -1.0);
        assert!(covariance(&[1.0], &[1.0, 2.0]).is_err());
        assert!(covariance(&[], &[]).is_err());
    }

    #[test]
    fn clamp_rule() {
        assert_eq!(clamp_variance(-5e-13, VARIANCE_NOISE_FLOOR).unwrap(), 0.0);
        assert_eq!(clamp_variance(3.0, VARIANCE_NOISE_FLOOR).unwrap(), 3.0);
        assert!(matches!(
            clamp_variance(-1e-9, VARIANCE_NOISE_FLOOR),
            Err(Error::NegativeVariance { .. })
        ));
    }

    #[test]
    fn tick_rejects_non_positive() {
        assert!(TradeTick::new(0, "a", Side::Buy, 0.0, 1.0).is_err());
        assert!(TradeTick::new(0, "a", Side::Buy, 1.0, -1.0).is_err());
        assert!(TradeTick::new(0, "a", Side::Buy, f64::NAN, 1.0).is_err());
        let t = TradeTick::new(0, "a", Side::Sell, 2.5, 4.0).unwrap();
        assert_eq!(t.value(), 10.0);
        let t = t.adjusted(2.0).unwrap();
        assert_eq!((t.price(), t.volume(), t.value()), (5.0, 4.0, 20.0));
    }

    #[test]
    fn partition_examples() {
        let t = ticks(10);
        let p = partition_windows(&t, 5).unwrap();
        assert_eq!(p.full.len(), 2);
        assert!(p.partial.is_none());

        let t = ticks(11);
        let p = partition_windows(&t, 5).unwrap();
        assert_eq!(p.full.len(), 2);
        let partial = p.partial.unwrap();
        assert_eq!(partial.tick_count(), 1);
        assert!(!partial.is_eligible());
        assert_eq!(p.full[1].anchor_time(), 10);
        assert_eq!(p.full[0].range(), 1..6);

        let t = ticks(3);
        let p = partition_windows(&t, 5).unwrap();
        assert!(p.full.is_empty());
        assert_eq!(p.partial.unwrap().tick_count(), 3);

        assert!(matches!(partition_windows(&t, 0), Err(Error::Config(_))));
    }

    #[test]
    fn partition_rejects_unordered() {
        let mut t = ticks(4);
        t.swap(1, 2);
        assert!(matches!(
            partition_windows(&t, 2),
            Err(Error::Ordering { .. })
        ));
    }

    #[test]
    fn moment_set() {
        let m = MomentSet::from_series(&[1.0, 2.0, 3.0, 4.0], 4).unwrap();
        assert_eq!(m.count(), 4);
        assert_eq!(m.raw(1), Some(2.5));
        assert_eq!(m.raw(2), Some(7.5));
        assert_eq!(m.raw(5), None);
        assert_eq!(m.raw(0), None);
        assert!((m.variance() - (m.raw(2).unwrap() - 6.25)).abs() < 1e-12);
    }
}
