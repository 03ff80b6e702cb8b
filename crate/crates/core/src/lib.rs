//! Market-weighted moments of trade prices and of anticipated and realized
//! investor returns.
//!
//! Every statistic in the crate is the ratio of two value series averaged over
//! a "trading day" of `N` consecutive trades: trade value over volume gives
//! the volume-weighted price, current over past value gives returns. Means are
//! value-weighted (`ΣC / ΣC_o`), and volatilities are expressed through the
//! variances and covariance of the value series themselves; see [`decompose`].
//!
//! ```
//! use market_moments::{moments::{partition_windows, InvestorId, TradeTick, Side}, price};
//!
//! let ticks = vec![
//!     TradeTick::new(0, InvestorId::new("a"), Side::Buy, 10.0, 1.0).unwrap(),
//!     TradeTick::new(1, InvestorId::new("b"), Side::Sell, 20.0, 3.0).unwrap(),
//! ];
//! let windows = partition_windows(&ticks, 2).unwrap();
//! let stats = price::price_stats(&windows.full[0]).unwrap();
//! assert_eq!(stats.mean, 17.5);
//! assert!((stats.volatility - 11.25).abs() < 1e-12);
//! ```

pub mod actual;
pub mod anticipated;
pub mod app;
pub mod config;
pub mod decompose;
pub mod error;
pub mod events;
pub mod io;
pub mod ledger;
pub mod moments;
pub mod pipeline;
pub mod price;
pub mod sim;
pub mod sum;

pub use error::{Error, Result};
pub use events::EventRecord;
pub use ledger::{Ledger, MatchPolicy, SaleDecomposition};
pub use moments::{InvestorId, Side, TradeTick, TradingDayWindow};
pub use pipeline::{run_pipeline, Family, PipelineOptions, ReportRow};
