//! "Anticipated" returns: each trade's price over the price a fixed shift
//! earlier, weighted by the value the same volume had at that earlier price.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::decompose::{self, DirectForm, RatioDecomposition};
use crate::error::{Error, Result};
use crate::moments::TradeTick;
use crate::sum;

/// Configured return horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tau {
    /// A number of ticks back along the tick series.
    Ticks(usize),
    /// An absolute duration in the time unit of the input.
    Duration(i64),
    /// A multiple of the median inter-trade gap of the history.
    GapMultiple(f64),
}

impl Tau {
    pub fn resolve(&self, history: &[TradeTick]) -> Result<Shift> {
        match *self {
            Tau::Ticks(k) => Ok(Shift::Ticks(k)),
            Tau::Duration(d) if d >= 0 => Ok(Shift::Duration(d)),
            Tau::Duration(d) => Err(Error::config(format!("negative shift {d}"))),
            Tau::GapMultiple(f) => {
                if !(f.is_finite() && f >= 0.0) {
                    return Err(Error::config(format!("invalid gap multiple {f}")));
                }
                let gap = median_gap(history)
                    .ok_or_else(|| Error::config("need two ticks to measure the median gap"))?;
                Ok(Shift::Duration((f * gap).round() as i64))
            }
        }
    }
}

/// Parses `12` or `12t` as ticks, `30s`/`5m`/`2h`/`1d` as seconds, `2.5g` as a
/// gap multiple.
impl FromStr for Tau {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::config(format!("cannot parse tau `{s}`"));
        let (num, unit) = match s.char_indices().last() {
            Some((i, c)) if c.is_ascii_alphabetic() => (&s[..i], Some(c)),
            Some(_) => (s, None),
            None => return Err(bad()),
        };
        let seconds = |mult: i64| -> Result<Tau> {
            let v: i64 = num.parse().map_err(|_| bad())?;
            v.checked_mul(mult).map(Tau::Duration).ok_or_else(bad)
        };
        match unit {
            None | Some('t') => num.parse().map(Tau::Ticks).map_err(|_| bad()),
            Some('s') => seconds(1),
            Some('m') => seconds(60),
            Some('h') => seconds(3_600),
            Some('d') => seconds(86_400),
            Some('g') => num.parse().map(Tau::GapMultiple).map_err(|_| bad()),
            Some(_) => Err(bad()),
        }
    }
}

/// Median spacing between consecutive tick times.
pub fn median_gap(history: &[TradeTick]) -> Option<f64> {
    let mut gaps: Vec<i64> = history
        .windows(2)
        .map(|w| w[1].time() - w[0].time())
        .collect();
    if gaps.is_empty() {
        return None;
    }
    gaps.sort_unstable();
    let mid = gaps.len() / 2;
    Some(if gaps.len() % 2 == 1 {
        gaps[mid] as f64
    } else {
        (gaps[mid - 1] as f64 + gaps[mid] as f64) / 2.0
    })
}

/// A resolved shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shift {
    Ticks(usize),
    Duration(i64),
}

impl fmt::Display for Shift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shift::Ticks(k) => write!(f, "{k}t"),
            Shift::Duration(d) => write!(f, "{d}s"),
        }
    }
}

pub trait PriceLookup {
    /// Price in force at `time`.
    fn price_at_or_before(&self, time: i64) -> Option<f64>;
}

/// Last-observation lookup: the price of the latest trade at or before the
/// requested time.
#[derive(Debug, Clone, Copy)]
pub struct LastObservation<'a> {
    ticks: &'a [TradeTick],
}

impl<'a> LastObservation<'a> {
    /// `ticks` must be time-ordered.
    pub fn new(ticks: &'a [TradeTick]) -> Self {
        LastObservation { ticks }
    }
}

impl PriceLookup for LastObservation<'_> {
    fn price_at_or_before(&self, time: i64) -> Option<f64> {
        let idx = self.ticks.partition_point(|t| t.time() <= time);
        idx.checked_sub(1).map(|i| self.ticks[i].price())
    }
}

impl<F: Fn(i64) -> Option<f64>> PriceLookup for F {
    fn price_at_or_before(&self, time: i64) -> Option<f64> {
        self(time)
    }
}

/// A trade paired with the value its volume had `shift` earlier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftedTradePair {
    pub time: i64,
    pub current_value: f64,
    pub original_value: f64,
    pub anticipated_return: f64,
    /// Time between the trade and the past price it was paired with.
    pub shift: i64,
}

impl ShiftedTradePair {
    fn new(tick: &TradeTick, past_price: f64, past_time: i64) -> Self {
        ShiftedTradePair {
            time: tick.time(),
            current_value: tick.value(),
            original_value: past_price * tick.volume(),
            anticipated_return: tick.price() / past_price,
            shift: tick.time() - past_time,
        }
    }
}

/// Pair every tick with the price `shift` time units earlier.
pub fn build_shifted_pairs(
    ticks: &[TradeTick],
    shift: i64,
    lookup: &impl PriceLookup,
) -> Result<Vec<ShiftedTradePair>> {
    ticks
        .iter()
        .map(|t| {
            let past = t.time() - shift;
            let price = lookup
                .price_at_or_before(past)
                .ok_or_else(|| Error::MissingPastPrice {
                    tick_time: t.time(),
                    shift: Shift::Duration(shift).to_string(),
                })?;
            Ok(ShiftedTradePair::new(t, price, past))
        })
        .collect()
}

/// Pairs for `history[range]`, looking back into the whole of `history`.
pub fn shifted_pairs_in(
    history: &[TradeTick],
    range: Range<usize>,
    shift: Shift,
) -> Result<Vec<ShiftedTradePair>> {
    match shift {
        Shift::Duration(d) => {
            build_shifted_pairs(&history[range], d, &LastObservation::new(history))
        }
        Shift::Ticks(k) => range
            .map(|i| {
                let tick = &history[i];
                let past = i.checked_sub(k).map(|j| &history[j]).ok_or_else(|| {
                    Error::MissingPastPrice {
                        tick_time: tick.time(),
                        shift: shift.to_string(),
                    }
                })?;
                Ok(ShiftedTradePair::new(tick, past.price(), past.time()))
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnStats {
    pub mean: f64,
    pub second_moment: f64,
    pub volatility: f64,
    pub current_value_volatility: f64,
    pub past_value_volatility: f64,
    pub current_past_cov: f64,
    pub count: usize,
}

impl From<&RatioDecomposition> for ReturnStats {
    fn from(d: &RatioDecomposition) -> Self {
        ReturnStats {
            mean: d.mean,
            second_moment: d.second_moment,
            volatility: d.volatility,
            current_value_volatility: d.numerator_variance,
            past_value_volatility: d.base_variance,
            current_past_cov: d.covariance,
            count: d.count,
        }
    }
}

fn columns(pairs: &[ShiftedTradePair]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let returns = pairs.iter().map(|p| p.anticipated_return).collect();
    let current = pairs.iter().map(|p| p.current_value).collect();
    let original = pairs.iter().map(|p| p.original_value).collect();
    (returns, current, original)
}

/// Original-value weights `C_oᵢᵐ / Σ C_oⱼᵐ`.
pub fn weight_fn_original_value(pairs: &[ShiftedTradePair], m: u32) -> Result<Vec<f64>> {
    let original: Vec<f64> = pairs.iter().map(|p| p.original_value).collect();
    decompose::normalized_weights(&original, m)
}

/// Portfolio return of the window: total current value over total original value.
pub fn mean_return(pairs: &[ShiftedTradePair]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::domain("no shifted pairs"));
    }
    let original = sum::sum(pairs.iter().map(|p| p.original_value));
    if original <= 0.0 {
        return Err(Error::domain("zero total original value"));
    }
    Ok(sum::sum(pairs.iter().map(|p| p.current_value)) / original)
}

pub fn return_decomposition(pairs: &[ShiftedTradePair]) -> Result<RatioDecomposition> {
    let (returns, current, original) = columns(pairs);
    decompose::decompose_checked(&returns, &current, &original)
}

pub fn return_second_moment(pairs: &[ShiftedTradePair]) -> Result<f64> {
    Ok(return_decomposition(pairs)?.second_moment)
}

pub fn return_volatility(pairs: &[ShiftedTradePair]) -> Result<f64> {
    Ok(return_decomposition(pairs)?.volatility)
}

pub fn return_stats(pairs: &[ShiftedTradePair]) -> Result<ReturnStats> {
    Ok(ReturnStats::from(&return_decomposition(pairs)?))
}

pub fn direct_return_volatility(pairs: &[ShiftedTradePair]) -> Result<DirectForm> {
    let (returns, _, original) = columns(pairs);
    decompose::direct_form(&returns, &original)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::Side;

    fn pair(r: f64, original: f64) -> ShiftedTradePair {
        ShiftedTradePair {
            time: 0,
            current_value: r * original,
            original_value: original,
            anticipated_return: r,
            shift: 1,
        }
    }

    fn tick(time: i64, price: f64, volume: f64) -> TradeTick {
        TradeTick::new(time, "a", Side::Sell, price, volume).unwrap()
    }

    #[test]
    fn build_pair_example() {
        let history = vec![tick(0, 10.0, 1.0), tick(5, 11.0, 2.0)];
        let pairs = build_shifted_pairs(&history[1..], 5, &LastObservation::new(&history)).unwrap();
        let p = pairs[0];
        assert!((p.current_value - 22.0).abs() < 1e-12);
        assert!((p.original_value - 20.0).abs() < 1e-12);
        assert!((p.anticipated_return - 1.1).abs() < 1e-12);
    }

    #[test]
    fn zero_shift_is_identity() {
        let history = vec![tick(0, 10.0, 1.0), tick(5, 11.0, 2.0)];
        let pairs = build_shifted_pairs(&history, 0, &LastObservation::new(&history)).unwrap();
        for (p, t) in pairs.iter().zip(&history) {
            assert_eq!(p.anticipated_return, 1.0);
            assert_eq!(p.original_value, t.value());
        }
        let pairs = shifted_pairs_in(&history, 0..2, Shift::Ticks(0)).unwrap();
        assert!(pairs.iter().all(|p| p.anticipated_return == 1.0));
    }

    #[test]
    fn missing_past_price() {
        let history = vec![tick(10, 10.0, 1.0), tick(11, 11.0, 2.0)];
        let err = build_shifted_pairs(&history, 5, &LastObservation::new(&history)).unwrap_err();
        assert!(matches!(err, Error::MissingPastPrice { tick_time: 10, .. }));
        let err = shifted_pairs_in(&history, 0..2, Shift::Ticks(1)).unwrap_err();
        assert!(matches!(err, Error::MissingPastPrice { tick_time: 10, .. }));
    }

    #[test]
    fn last_observation_uses_latest_prior_trade() {
        let history = vec![tick(0, 10.0, 1.0), tick(3, 12.0, 1.0), tick(7, 9.0, 1.0)];
        let lookup = LastObservation::new(&history);
        assert_eq!(lookup.price_at_or_before(-1), None);
        assert_eq!(lookup.price_at_or_before(0), Some(10.0));
        assert_eq!(lookup.price_at_or_before(5), Some(12.0));
        assert_eq!(lookup.price_at_or_before(100), Some(9.0));
    }

    #[test]
    fn original_value_weights() {
        let pairs = [pair(1.0, 10.0), pair(1.0, 30.0)];
        assert_eq!(
            weight_fn_original_value(&pairs, 1).unwrap(),
            vec![0.25, 0.75]
        );
        assert_eq!(weight_fn_original_value(&pairs, 2).unwrap(), vec![0.1, 0.9]);
        let pairs = [pair(1.0, 4.0); 4];
        assert_eq!(weight_fn_original_value(&pairs, 2).unwrap(), vec![0.25; 4]);
    }

    #[test]
    fn return_moments_example() {
        let pairs = [pair(1.2, 10.0), pair(0.9, 30.0)];
        assert!((mean_return(&pairs).unwrap() - 0.975).abs() < 1e-12);
        assert!((return_volatility(&pairs).unwrap() - 0.010125).abs() < 1e-9 * 0.010125);
        assert!((return_second_moment(&pairs).unwrap() - 0.960750).abs() < 1e-9);
    }

    #[test]
    fn degenerate_returns() {
        let pairs = [pair(1.1, 10.0), pair(1.1, 25.0), pair(1.1, 3.0)];
        assert!((mean_return(&pairs).unwrap() - 1.1).abs() < 1e-12);
        assert!(return_volatility(&pairs).unwrap().abs() < 1e-12);
        assert!((return_second_moment(&pairs).unwrap() - 1.21).abs() < 1e-12);

        let single = [pair(0.8, 5.0)];
        assert!((mean_return(&single).unwrap() - 0.8).abs() < 1e-15);
        assert!((return_second_moment(&single).unwrap() - 0.64).abs() < 1e-12);
        assert_eq!(return_volatility(&single).unwrap(), 0.0);
    }

    #[test]
    fn volatility_is_scale_free() {
        let pairs = [pair(1.2, 10.0), pair(0.9, 30.0), pair(1.05, 7.0)];
        let scaled: Vec<_> = pairs
            .iter()
            .map(|p| pair(p.anticipated_return, p.original_value * 123.0))
            .collect();
        let a = return_volatility(&pairs).unwrap();
        let b = return_volatility(&scaled).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn tau_parsing() {
        assert_eq!("12".parse::<Tau>().unwrap(), Tau::Ticks(12));
        assert_eq!("12t".parse::<Tau>().unwrap(), Tau::Ticks(12));
        assert_eq!("30s".parse::<Tau>().unwrap(), Tau::Duration(30));
        assert_eq!("5m".parse::<Tau>().unwrap(), Tau::Duration(300));
        assert_eq!("2h".parse::<Tau>().unwrap(), Tau::Duration(7200));
        assert_eq!("2.5g".parse::<Tau>().unwrap(), Tau::GapMultiple(2.5));
        assert!("".parse::<Tau>().is_err());
        assert!("x".parse::<Tau>().is_err());
        assert!("3q".parse::<Tau>().is_err());
    }

    #[test]
    fn gap_multiple_resolves_against_median() {
        let history = vec![
            tick(0, 1.0, 1.0),
            tick(2, 1.0, 1.0),
            tick(4, 1.0, 1.0),
            tick(100, 1.0, 1.0),
        ];
        assert_eq!(median_gap(&history), Some(2.0));
        assert_eq!(
            Tau::GapMultiple(3.0).resolve(&history).unwrap(),
            Shift::Duration(6)
        );
        assert!(Tau::GapMultiple(1.0).resolve(&history[..1]).is_err());
    }
}
