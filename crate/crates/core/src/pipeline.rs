//! Per-window orchestration: ledger replay, windowing and all five statistic
//! families, with optional oracle deltas.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::actual::{self, InvestorDayStats, SaleReturnStats};
use crate::anticipated::{self, Shift, Tau};
use crate::decompose::{DirectForm, OracleDelta, RatioDecomposition};
use crate::error::{Error, Result};
use crate::events::{ticks_from_events, EventRecord};
use crate::ledger::{Ledger, MatchPolicy, SaleDecomposition};
use crate::moments::{partition_windows, InvestorId, TradeTick, TradingDayWindow};
use crate::price;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOptions {
    pub window_size: usize,
    /// Return horizon; `None` means one window length in ticks.
    pub tau: Option<Tau>,
    pub policy: MatchPolicy,
    pub oracle: bool,
    pub integer_volumes: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            window_size: 100,
            tau: None,
            policy: MatchPolicy::Fifo,
            oracle: false,
            integer_volumes: false,
        }
    }
}

impl PipelineOptions {
    pub fn tau(&self) -> Tau {
        self.tau.unwrap_or(Tau::Ticks(self.window_size))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Price,
    Anticipated,
    ActualSale,
    ActualInvestor,
    ActualMarket,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Price,
        Family::Anticipated,
        Family::ActualSale,
        Family::ActualInvestor,
        Family::ActualMarket,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Price => "price",
            Family::Anticipated => "anticipated",
            Family::ActualSale => "actual_sale",
            Family::ActualInvestor => "actual_investor",
            Family::ActualMarket => "actual_market",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::config(format!("unknown statistic family `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    /// No units to aggregate (e.g. a window without sales).
    Empty,
    /// Decomposed and direct volatility disagree.
    OracleFail,
}

impl RowStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Empty => "empty",
            RowStatus::OracleFail => "oracle_fail",
        }
    }
}

impl FromStr for RowStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(RowStatus::Ok),
            "empty" => Ok(RowStatus::Empty),
            "oracle_fail" => Ok(RowStatus::OracleFail),
            _ => Err(Error::config(format!("unknown row status `{s}`"))),
        }
    }
}

/// One report line. Fields that do not apply to the row's family are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub window_index: usize,
    pub window_anchor: i64,
    pub family: Family,
    pub status: RowStatus,
    pub investor_id: Option<String>,
    pub sale_time: Option<i64>,
    pub tick_count: Option<u64>,
    pub leg_count: Option<u64>,
    pub sale_count: Option<u64>,
    pub investor_count: Option<u64>,
    pub mean: Option<f64>,
    pub second_moment: Option<f64>,
    pub volatility: Option<f64>,
    pub value_volatility: Option<f64>,
    pub volume_volatility: Option<f64>,
    pub value_volume_cov: Option<f64>,
    pub current_value_volatility: Option<f64>,
    pub past_value_volatility: Option<f64>,
    pub current_past_cov: Option<f64>,
    pub original_value_volatility: Option<f64>,
    pub current_original_cov: Option<f64>,
    pub avg_current_value_volatility: Option<f64>,
    pub avg_original_value_volatility: Option<f64>,
    pub cov: Option<f64>,
    pub oracle_direct_volatility: Option<f64>,
    pub oracle_delta_abs: Option<f64>,
    pub oracle_delta_rel: Option<f64>,
}

impl ReportRow {
    pub fn new(window_index: usize, window_anchor: i64, family: Family) -> Self {
        ReportRow {
            window_index,
            window_anchor,
            family,
            status: RowStatus::Ok,
            investor_id: None,
            sale_time: None,
            tick_count: None,
            leg_count: None,
            sale_count: None,
            investor_count: None,
            mean: None,
            second_moment: None,
            volatility: None,
            value_volatility: None,
            volume_volatility: None,
            value_volume_cov: None,
            current_value_volatility: None,
            past_value_volatility: None,
            current_past_cov: None,
            original_value_volatility: None,
            current_original_cov: None,
            avg_current_value_volatility: None,
            avg_original_value_volatility: None,
            cov: None,
            oracle_direct_volatility: None,
            oracle_delta_abs: None,
            oracle_delta_rel: None,
        }
    }

    fn with_oracle(mut self, delta: Option<OracleDelta>) -> Self {
        if let Some(d) = delta {
            self.oracle_direct_volatility = Some(d.direct);
            self.oracle_delta_abs = Some(d.abs);
            self.oracle_delta_rel = Some(d.rel);
            if !d.passed {
                self.status = RowStatus::OracleFail;
            }
        }
        self
    }

    /// Every volatility-type field of the row, for range checks.
    pub fn volatilities(&self) -> impl Iterator<Item = f64> {
        [
            self.volatility,
            self.value_volatility,
            self.volume_volatility,
            self.current_value_volatility,
            self.past_value_volatility,
            self.original_value_volatility,
            self.avg_current_value_volatility,
            self.avg_original_value_volatility,
        ]
        .into_iter()
        .flatten()
    }
}

/// An event the ledger rejected; the rest of the investor's stream continues.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedUnit {
    pub investor_id: InvestorId,
    pub time: i64,
    pub reason: String,
}

/// A statistic family that could not be computed for one window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowError {
    pub window_index: usize,
    pub window_anchor: i64,
    pub family: Family,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineReport {
    pub rows: Vec<ReportRow>,
    pub skipped: Vec<SkippedUnit>,
    pub window_errors: Vec<WindowError>,
    /// Leading ticks left out because they do not fill a window.
    pub partial_ticks: usize,
    pub full_windows: usize,
}

impl PipelineReport {
    pub fn oracle_failures(&self) -> usize {
        self.rows
            .iter()
            .filter(|r| r.status == RowStatus::OracleFail)
            .count()
    }

    pub fn rows_of(&self, family: Family) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(move |r| r.family == family)
    }
}

/// Sales keyed by the index of the tick that produced them.
struct IndexedSale {
    tick: usize,
    sale: SaleDecomposition,
}

fn replay_lenient(
    records: &[EventRecord],
    options: &PipelineOptions,
) -> (Vec<IndexedSale>, Vec<SkippedUnit>) {
    let mut ledger = Ledger::new().with_integer_volumes(options.integer_volumes);
    let mut sales = Vec::new();
    let mut skipped = Vec::new();
    for (tick, e) in records.iter().enumerate() {
        match ledger.apply(e, options.policy) {
            Ok(Some(sale)) => sales.push(IndexedSale { tick, sale }),
            Ok(None) => {}
            Err(err) => skipped.push(SkippedUnit {
                investor_id: e.investor_id.clone(),
                time: e.time,
                reason: err.to_string(),
            }),
        }
    }
    (sales, skipped)
}

pub fn run_pipeline(records: &[EventRecord], options: &PipelineOptions) -> Result<PipelineReport> {
    if options.window_size == 0 {
        return Err(Error::config("window size must be at least 1"));
    }
    let ticks = ticks_from_events(records)?;
    let partition = partition_windows(&ticks, options.window_size)?;
    let shift = options.tau().resolve(&ticks)?;
    let (sales, skipped) = replay_lenient(records, options);

    let ctx = WindowContext {
        ticks: &ticks,
        sales: &sales,
        shift,
        oracle: options.oracle,
    };
    let per_window: Vec<(Vec<ReportRow>, Vec<WindowError>)> = partition
        .full
        .par_iter()
        .enumerate()
        .map(|(index, window)| ctx.window_rows(index, window))
        .collect();

    let mut report = PipelineReport {
        skipped,
        partial_ticks: partition.partial.map_or(0, |p| p.tick_count()),
        full_windows: partition.full.len(),
        ..PipelineReport::default()
    };
    for (rows, errors) in per_window {
        report.rows.extend(rows);
        report.window_errors.extend(errors);
    }
    Ok(report)
}

struct WindowContext<'a> {
    ticks: &'a [TradeTick],
    sales: &'a [IndexedSale],
    shift: Shift,
    oracle: bool,
}

impl WindowContext<'_> {
    fn window_rows(
        &self,
        index: usize,
        window: &TradingDayWindow<'_>,
    ) -> (Vec<ReportRow>, Vec<WindowError>) {
        let anchor = window.anchor_time();
        let mut rows = Vec::new();
        let mut errors = Vec::new();
        let mut fail = |family: Family, err: Error| {
            errors.push(WindowError {
                window_index: index,
                window_anchor: anchor,
                family,
                message: err.to_string(),
            })
        };

        match self.price_row(index, window) {
            Ok(row) => rows.push(row),
            Err(e) => fail(Family::Price, e),
        }
        match self.anticipated_row(index, window) {
            Ok(row) => rows.push(row),
            Err(e) => fail(Family::Anticipated, e),
        }

        let range = window.range();
        let lo = self.sales.partition_point(|s| s.tick < range.start);
        let hi = self.sales.partition_point(|s| s.tick < range.end);
        let mut by_investor: BTreeMap<&InvestorId, Vec<SaleReturnStats>> = BTreeMap::new();
        for s in &self.sales[lo..hi] {
            match actual::sale_return_stats(&s.sale) {
                Ok(stats) => {
                    rows.push(self.sale_row(index, anchor, &s.sale, &stats));
                    by_investor
                        .entry(&s.sale.investor_id)
                        .or_default()
                        .push(stats);
                }
                Err(e) => fail(Family::ActualSale, e),
            }
        }

        let mut investors: Vec<InvestorDayStats> = Vec::with_capacity(by_investor.len());
        for (id, sales) in &by_investor {
            match actual::investor_day_stats(sales) {
                Ok(stats) => {
                    rows.push(self.investor_row(index, anchor, id, &stats));
                    investors.push(stats);
                }
                Err(e) => fail(Family::ActualInvestor, e),
            }
        }

        let mut market = ReportRow::new(index, anchor, Family::ActualMarket);
        if investors.is_empty() {
            market.status = RowStatus::Empty;
            market.investor_count = Some(0);
            rows.push(market);
        } else {
            match actual::cross_investor_stats(&investors) {
                Ok(s) => {
                    market.investor_count = Some(s.investor_count as u64);
                    market.mean = Some(s.mean);
                    market.second_moment = Some(s.second_moment);
                    market.volatility = Some(s.volatility);
                    market.current_value_volatility = Some(s.current_value_volatility);
                    market.original_value_volatility = Some(s.original_value_volatility);
                    market.cov = Some(s.cov);
                    rows.push(market.with_oracle(self.oracle.then_some(s.oracle)));
                }
                Err(e) => fail(Family::ActualMarket, e),
            }
        }
        (rows, errors)
    }

    fn price_row(&self, index: usize, window: &TradingDayWindow<'_>) -> Result<ReportRow> {
        let d = price::price_decomposition(window)?;
        let delta = self.oracle_delta(&d, || price::direct_price_volatility(window))?;
        let s = price::PriceStats::from(&d);
        let mut row = ReportRow::new(index, window.anchor_time(), Family::Price);
        row.tick_count = Some(s.tick_count as u64);
        row.mean = Some(s.mean);
        row.second_moment = Some(s.second_moment);
        row.volatility = Some(s.volatility);
        row.value_volatility = Some(s.value_volatility);
        row.volume_volatility = Some(s.volume_volatility);
        row.value_volume_cov = Some(s.value_volume_cov);
        Ok(row.with_oracle(delta))
    }

    fn anticipated_row(&self, index: usize, window: &TradingDayWindow<'_>) -> Result<ReportRow> {
        let pairs = anticipated::shifted_pairs_in(self.ticks, window.range(), self.shift)?;
        let d = anticipated::return_decomposition(&pairs)?;
        let delta = self.oracle_delta(&d, || anticipated::direct_return_volatility(&pairs))?;
        let s = anticipated::ReturnStats::from(&d);
        let mut row = ReportRow::new(index, window.anchor_time(), Family::Anticipated);
        row.tick_count = Some(s.count as u64);
        row.mean = Some(s.mean);
        row.second_moment = Some(s.second_moment);
        row.volatility = Some(s.volatility);
        row.current_value_volatility = Some(s.current_value_volatility);
        row.past_value_volatility = Some(s.past_value_volatility);
        row.current_past_cov = Some(s.current_past_cov);
        Ok(row.with_oracle(delta))
    }

    fn oracle_delta(
        &self,
        d: &RatioDecomposition,
        direct: impl FnOnce() -> Result<DirectForm>,
    ) -> Result<Option<OracleDelta>> {
        if !self.oracle {
            return Ok(None);
        }
        Ok(Some(OracleDelta::compare(d, &direct()?)))
    }

    fn sale_row(
        &self,
        index: usize,
        anchor: i64,
        sale: &SaleDecomposition,
        s: &SaleReturnStats,
    ) -> ReportRow {
        let mut row = ReportRow::new(index, anchor, Family::ActualSale);
        row.investor_id = Some(sale.investor_id.to_string());
        row.sale_time = Some(sale.sale_time);
        row.leg_count = Some(s.leg_count as u64);
        row.mean = Some(s.mean);
        row.second_moment = Some(s.second_moment);
        row.volatility = Some(s.volatility);
        row.current_value_volatility = Some(s.current_value_volatility);
        row.original_value_volatility = Some(s.original_value_volatility);
        row.current_original_cov = Some(s.current_original_cov);
        row.with_oracle(self.oracle.then_some(s.oracle))
    }

    fn investor_row(
        &self,
        index: usize,
        anchor: i64,
        id: &InvestorId,
        s: &InvestorDayStats,
    ) -> ReportRow {
        let mut row = ReportRow::new(index, anchor, Family::ActualInvestor);
        row.investor_id = Some(id.to_string());
        row.sale_count = Some(s.sale_count as u64);
        row.mean = Some(s.mean);
        row.second_moment = Some(s.second_moment);
        row.volatility = Some(s.volatility);
        row.avg_current_value_volatility = Some(s.avg_current_value_volatility);
        row.avg_original_value_volatility = Some(s.avg_original_value_volatility);
        row.cov = Some(s.cov);
        row.with_oracle(self.oracle.then_some(s.oracle))
    }
}

/// One point of an anticipated-volatility-versus-horizon curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauSweepRow {
    pub window_index: usize,
    pub window_anchor: i64,
    pub tau: String,
    pub shift: String,
    pub mean: f64,
    pub volatility: f64,
}

/// Anticipated-return mean and volatility for every full window and every
/// horizon in `taus`. Window/horizon combinations that reach before the start
/// of the history are left out.
pub fn tau_sweep(
    ticks: &[TradeTick],
    window_size: usize,
    taus: &[Tau],
) -> Result<Vec<TauSweepRow>> {
    let partition = partition_windows(ticks, window_size)?;
    let shifts: Vec<(String, Shift)> = taus
        .iter()
        .map(|t| Ok((format_tau(t), t.resolve(ticks)?)))
        .collect::<Result<_>>()?;
    let rows = partition
        .full
        .par_iter()
        .enumerate()
        .flat_map_iter(|(index, window)| {
            shifts.iter().filter_map(move |(label, shift)| {
                let pairs = anticipated::shifted_pairs_in(ticks, window.range(), *shift).ok()?;
                let s = anticipated::return_stats(&pairs).ok()?;
                Some(TauSweepRow {
                    window_index: index,
                    window_anchor: window.anchor_time(),
                    tau: label.clone(),
                    shift: shift.to_string(),
                    mean: s.mean,
                    volatility: s.volatility,
                })
            })
        })
        .collect();
    Ok(rows)
}

pub fn format_tau(tau: &Tau) -> String {
    match tau {
        Tau::Ticks(k) => format!("{k}t"),
        Tau::Duration(d) => format!("{d}s"),
        Tau::GapMultiple(f) => format!("{f}g"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> Vec<EventRecord> {
        vec![
            EventRecord::buy(0, "a", 10.0, 2.0),
            EventRecord::buy(1, "a", 8.0, 3.0),
            EventRecord::sell(2, "a", 12.0, 5.0),
            EventRecord::buy(3, "b", 10.0, 4.0),
            EventRecord::sell(4, "b", 11.0, 4.0),
            EventRecord::sell(5, "c", 11.0, 1.0),
        ]
    }

    #[test]
    fn rows_per_window_in_order() {
        let opts = PipelineOptions {
            window_size: 3,
            tau: Some(Tau::Ticks(1)),
            oracle: true,
            ..PipelineOptions::default()
        };
        let report = run_pipeline(&fixture(), &opts).unwrap();
        assert_eq!(report.full_windows, 2);
        assert_eq!(report.partial_ticks, 0);
        assert_eq!(report.skipped.len(), 1);
        assert_eq!(report.skipped[0].investor_id.as_str(), "c");
        let fams: Vec<Family> = report.rows.iter().map(|r| r.family).collect();
        use Family::*;
        assert_eq!(
            fams,
            vec![
                Price,
                ActualSale,
                ActualInvestor,
                ActualMarket, // window 0: tau reaches before tick 0
                Price,
                Anticipated,
                ActualSale,
                ActualInvestor,
                ActualMarket,
            ]
        );
        assert_eq!(report.window_errors.len(), 1);
        assert_eq!(report.window_errors[0].family, Anticipated);
        assert_eq!(report.oracle_failures(), 0);
        let sale = &report.rows[1];
        assert!((sale.mean.unwrap() - 60.0 / 44.0).abs() < 1e-12);
        assert!(sale.oracle_delta_rel.unwrap() <= 1e-9);
    }

    #[test]
    fn no_sales_gives_empty_market_row() {
        let events: Vec<_> = (0..4)
            .map(|t| EventRecord::buy(t, "a", 10.0, 1.0))
            .collect();
        let opts = PipelineOptions {
            window_size: 2,
            ..PipelineOptions::default()
        };
        let report = run_pipeline(&events, &opts).unwrap();
        let market: Vec<_> = report.rows_of(Family::ActualMarket).collect();
        assert_eq!(market.len(), 2);
        assert!(market.iter().all(|r| r.status == RowStatus::Empty));
        assert!(report.rows.iter().all(|r| r.oracle_delta_rel.is_none()));
    }

    #[test]
    fn partial_window_is_left_out() {
        let events: Vec<_> = (0..5)
            .map(|t| EventRecord::buy(t, "a", 10.0 + t as f64, 1.0))
            .collect();
        let opts = PipelineOptions {
            window_size: 2,
            tau: Some(Tau::Ticks(1)),
            ..PipelineOptions::default()
        };
        let report = run_pipeline(&events, &opts).unwrap();
        assert_eq!(report.partial_ticks, 1);
        assert_eq!(report.full_windows, 2);
        assert_eq!(report.rows_of(Family::Price).count(), 2);
        assert_eq!(report.rows[0].window_anchor, 2);
    }

    #[test]
    fn zero_window_is_config_error() {
        let opts = PipelineOptions {
            window_size: 0,
            ..PipelineOptions::default()
        };
        assert!(matches!(
            run_pipeline(&fixture(), &opts),
            Err(Error::Config(_))
        ));
    }
}
