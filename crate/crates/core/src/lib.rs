//! Long-horizon hourly electric-demand forecasting for district energy
//! systems.
//!
//! The pipeline cleans meter data, builds exogenous regressors, selects
//! variables with a cross-validated LASSO, fits regression, GAM, SARIMA and
//! hybrid models, and ranks them on held-out years.

pub mod diff;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod gam;
pub mod hybrid;
pub mod io;
pub mod kv;
pub mod linear;
pub mod sarima;
pub mod series;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
