//! Batch front-end for the time-bin HOM simulation library: JSON config
//! ingestion, seeded experiment runners, and CSV/JSON result emission.
//!
//! Every run is fully determined by its config and seed; output files embed
//! the resolved config so results stay auditable.

pub mod config;
pub mod runner;

pub use config::{parse_config, ConfigError, RunConfig};
pub use runner::{run, RunSummary};
