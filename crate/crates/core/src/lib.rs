//! Trade strength g = trade/GDP and its rate f: data ingestion, maximum
//! likelihood fits for five positive families, AIC/BIC ranking, a Monte Carlo
//! tail experiment, trade forecasts and K-means clustering of countries.
//!
//! ```
//! use trade_strength::{select, Family, Sample};
//!
//! let sample = Sample::new(vec![0.3, 1.2, 0.7, 2.9, 0.5, 4.1, 0.9]).unwrap();
//! let report = select(&sample).unwrap();
//! assert!(Family::ALL.contains(&report.winner_aic));
//! ```

pub mod cluster;
pub mod dataset;
pub mod distfit;
pub mod error;
pub mod forecast;
pub mod modelselect;
pub mod strength;
pub mod theory;

pub use cluster::{ClusterInput, ClusterPoint, ClusterResult};
pub use dataset::{CountryPanel, GdpRecord, JoinReport, PanelRow, SkipReport, TradeRecord};
pub use distfit::{digamma, log_gamma, Family, FitResult, ParetoLikelihood, Params, Sample};
pub use error::{Error, Result};
pub use forecast::{ForecastSeries, GrowthPath};
pub use modelselect::{select, ModelScore, SelectionReport};
pub use strength::{RateSample, Sign, StrengthSample};
pub use theory::{SimConfig, SimOutcome, SimReport, TailEstimate};
