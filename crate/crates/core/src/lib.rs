//! Anytime-valid sequential tests of forecast calibration.
//!
//! Forecast/observation pairs are turned into PIT values, randomized ranks or
//! quantile-PIT pairs ([`transforms`]); betting strategies turn those into
//! conditional e-values ([`uniform`], [`discrete`], [`order`]); and
//! [`eprocess`] merges them at forecast lag `h` into evidence that can be
//! monitored and stopped at any time. [`baseline`] and [`sim`] reproduce a
//! power study against classical fixed-sample tests.

pub mod baseline;
pub mod config;
pub mod discrete;
pub mod eprocess;
pub mod error;
pub mod format;
pub mod monitor;
pub mod order;
pub mod sim;
pub mod special;
pub mod strategy;
pub mod transforms;
pub mod uniform;

pub use eprocess::{EProcess, StepRecord};
pub use error::{Error, Result};
pub use transforms::{pit, quantile_pit, randomized_rank, CalibrationValue, CdfSpec, QuantileForecast};
