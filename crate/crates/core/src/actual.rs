//! Realized ("actual") return statistics at three aggregation levels.
//!
//! 1. A single sale, averaged over the lots it was matched against.
//! 2. One investor over a trading day, averaged over the investor's sales.
//! 3. The whole market over a trading day, averaged over investors.
//!
//! Each level feeds the next through its per-unit average current and
//! original values, and each level's volatility is computed twice: from the
//! value-moment decomposition and directly as a weighted sum of squared
//! deviations. The two must agree.

use serde::{Deserialize, Serialize};

use crate::decompose::{dual_route, OracleDelta};
use crate::error::{Error, Result};
use crate::ledger::SaleDecomposition;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaleReturnStats {
    pub mean: f64,
    pub second_moment: f64,
    pub volatility: f64,
    pub current_value_volatility: f64,
    pub original_value_volatility: f64,
    pub current_original_cov: f64,
    pub leg_count: usize,
    /// Average leg current value, C(tᵢ;1).
    pub current_value_avg: f64,
    /// Average leg original value, C_o(tᵢ;1).
    pub original_value_avg: f64,
    /// Volatility evaluated as a weighted sum over legs, and its delta.
    pub oracle: OracleDelta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvestorDayStats {
    pub mean: f64,
    pub second_moment: f64,
    pub volatility: f64,
    pub avg_current_value_volatility: f64,
    pub avg_original_value_volatility: f64,
    pub cov: f64,
    pub sale_count: usize,
    /// Mean of the per-sale average current values, C(t;1|1).
    pub current_value_avg: f64,
    /// Mean of the per-sale average original values, C_o(t;1|1).
    pub original_value_avg: f64,
    pub oracle: OracleDelta,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossInvestorStats {
    pub mean: f64,
    pub second_moment: f64,
    pub volatility: f64,
    pub current_value_volatility: f64,
    pub original_value_volatility: f64,
    pub cov: f64,
    pub investor_count: usize,
    pub oracle: OracleDelta,
}

/// `(C(tᵢ;1), C_o(tᵢ;1))`: the sale's current and original value per leg.
pub fn per_sale_value_averages(decomp: &SaleDecomposition) -> Result<(f64, f64)> {
    let m = decomp.leg_count();
    if m == 0 {
        return Err(Error::domain("sale has no legs"));
    }
    let m = m as f64;
    Ok((
        decomp.total_current_value() / m,
        decomp.total_original_value() / m,
    ))
}

pub fn sale_return_stats(decomp: &SaleDecomposition) -> Result<SaleReturnStats> {
    if decomp.legs.is_empty() {
        return Err(Error::domain("sale has no legs"));
    }
    let returns: Vec<f64> = decomp.legs.iter().map(|l| l.actual_return).collect();
    let current: Vec<f64> = decomp.legs.iter().map(|l| l.current_value).collect();
    let original: Vec<f64> = decomp.legs.iter().map(|l| l.original_value).collect();
    let (d, oracle) = dual_route(&returns, &current, &original)?;
    Ok(SaleReturnStats {
        mean: d.mean,
        second_moment: d.second_moment,
        volatility: d.volatility,
        current_value_volatility: d.numerator_variance,
        original_value_volatility: d.base_variance,
        current_original_cov: d.covariance,
        leg_count: d.count,
        current_value_avg: d.numerator_mean,
        original_value_avg: d.base_mean,
        oracle,
    })
}

/// Statistics of one investor's sales within one trading day.
pub fn investor_day_stats(sales: &[SaleReturnStats]) -> Result<InvestorDayStats> {
    if sales.is_empty() {
        return Err(Error::domain("investor has no sales in the window"));
    }
    let returns: Vec<f64> = sales.iter().map(|s| s.mean).collect();
    let current: Vec<f64> = sales.iter().map(|s| s.current_value_avg).collect();
    let original: Vec<f64> = sales.iter().map(|s| s.original_value_avg).collect();
    let (d, oracle) = dual_route(&returns, &current, &original)?;
    Ok(InvestorDayStats {
        mean: d.mean,
        second_moment: d.second_moment,
        volatility: d.volatility,
        avg_current_value_volatility: d.numerator_variance,
        avg_original_value_volatility: d.base_variance,
        cov: d.covariance,
        sale_count: d.count,
        current_value_avg: d.numerator_mean,
        original_value_avg: d.base_mean,
        oracle,
    })
}

/// Statistics across the investors active in one trading day.
pub fn cross_investor_stats(investors: &[InvestorDayStats]) -> Result<CrossInvestorStats> {
    if investors.is_empty() {
        return Err(Error::domain("no investors with sales in the window"));
    }
    let returns: Vec<f64> = investors.iter().map(|s| s.mean).collect();
    let current: Vec<f64> = investors.iter().map(|s| s.current_value_avg).collect();
    let original: Vec<f64> = investors.iter().map(|s| s.original_value_avg).collect();
    let (d, oracle) = dual_route(&returns, &current, &original)?;
    Ok(CrossInvestorStats {
        mean: d.mean,
        second_moment: d.second_moment,
        volatility: d.volatility,
        current_value_volatility: d.numerator_variance,
        original_value_volatility: d.base_variance,
        cov: d.covariance,
        investor_count: d.count,
        oracle,
    })
}
