//! Market-based price statistics: volume weights, generalized VWAP, the price
//! second moment and price volatility expressed through trade value and
//! volume moments.

use serde::{Deserialize, Serialize};

use crate::decompose::{self, DirectForm, RatioDecomposition};
use crate::error::{Error, Result};
use crate::moments::TradingDayWindow;
use crate::sum;

/// Largest weight or moment order accepted by the public interface.
pub const MAX_ORDER: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceStats {
    /// VWAP.
    pub mean: f64,
    pub second_moment: f64,
    pub volatility: f64,
    pub value_volatility: f64,
    pub volume_volatility: f64,
    pub value_volume_cov: f64,
    pub tick_count: usize,
}

impl From<&RatioDecomposition> for PriceStats {
    fn from(d: &RatioDecomposition) -> Self {
        PriceStats {
            mean: d.mean,
            second_moment: d.second_moment,
            volatility: d.volatility,
            value_volatility: d.numerator_variance,
            volume_volatility: d.base_variance,
            value_volume_cov: d.covariance,
            tick_count: d.count,
        }
    }
}

fn check_order(name: &str, k: u32) -> Result<()> {
    if (1..=MAX_ORDER).contains(&k) {
        Ok(())
    } else {
        Err(Error::config(format!(
            "{name} must be in 1..={MAX_ORDER}, got {k}"
        )))
    }
}

fn check_full(window: &TradingDayWindow<'_>) -> Result<()> {
    if window.is_eligible() {
        Ok(())
    } else {
        Err(Error::domain(
            "partial window is not eligible for statistics",
        ))
    }
}

/// Volume weights `Uᵢᵐ / Σ Uⱼᵐ`.
pub fn weight_fn_volume(window: &TradingDayWindow<'_>, m: u32) -> Result<Vec<f64>> {
    check_full(window)?;
    check_order("weight order m", m)?;
    let volumes: Vec<f64> = window.volumes().collect();
    decompose::normalized_weights(&volumes, m)
}

/// `Σ pᵢⁿ wᵢ(m)`; with `n = m = 1` this is the VWAP.
pub fn weighted_price_moment(window: &TradingDayWindow<'_>, n: u32, m: u32) -> Result<f64> {
    check_order("price moment order n", n)?;
    let weights = weight_fn_volume(window, m)?;
    let exp = n as i32;
    Ok(sum::sum(
        window.prices().zip(weights).map(|(p, w)| p.powi(exp) * w),
    ))
}

/// Full decomposition of the window's price statistics.
pub fn price_decomposition(window: &TradingDayWindow<'_>) -> Result<RatioDecomposition> {
    check_full(window)?;
    let values: Vec<f64> = window.values().collect();
    let volumes: Vec<f64> = window.volumes().collect();
    let prices: Vec<f64> = window.prices().collect();
    decompose::decompose_checked(&prices, &values, &volumes)
}

/// VWAP, computed as total value over total volume.
pub fn vwap(window: &TradingDayWindow<'_>) -> Result<f64> {
    check_full(window)?;
    let value = sum::sum(window.values());
    let volume = sum::sum(window.volumes());
    if volume <= 0.0 {
        return Err(Error::domain("zero total volume"));
    }
    Ok(value / volume)
}

pub fn price_second_moment(window: &TradingDayWindow<'_>) -> Result<f64> {
    Ok(price_decomposition(window)?.second_moment)
}

pub fn price_volatility(window: &TradingDayWindow<'_>) -> Result<f64> {
    Ok(price_decomposition(window)?.volatility)
}

pub fn price_stats(window: &TradingDayWindow<'_>) -> Result<PriceStats> {
    Ok(PriceStats::from(&price_decomposition(window)?))
}

/// `Σ (pᵢ − a)² Uᵢ² / Σ Uⱼ²` evaluated term by term.
pub fn direct_price_volatility(window: &TradingDayWindow<'_>) -> Result<DirectForm> {
    check_full(window)?;
    let prices: Vec<f64> = window.prices().collect();
    let volumes: Vec<f64> = window.volumes().collect();
    decompose::direct_form(&prices, &volumes)
}
