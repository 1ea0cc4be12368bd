//! Pairwise lagged cross-correlation scores, top-k partner queries, EARS-C
//! outbreak alarms and alarm-overlap reports for district-level weekly
//! surveillance counts.
//!
//! The pipeline: [`ingest`] a wide CSV table, gap-fill each row into a
//! [`timeseries::TimeSeries`], score every region pair with [`xcorr`] and
//! [`scorematrix`], flag alarms with [`anomaly`], and draw figures with
//! [`report`].

pub mod anomaly;
pub mod cli;
pub mod error;
pub mod ingest;
pub mod normal;
pub mod numfmt;
pub mod report;
pub mod scorematrix;
pub mod timeseries;
pub mod xcorr;

pub use error::{Error, Result};
pub use ingest::{parse_wide_csv, validate, QualityReport, RegionRecord, SurveillanceTable};
pub use scorematrix::{compute_all, ScoreConfig, ScoreMatrix};
pub use timeseries::{fill_missing, TimeSeries, WeekRange};
pub use xcorr::{ccf, significance_threshold, weighted_score, CorrelationVector, WeightVector};
