//! File formats, heatmaps and the experiment harness around `netflow-core`.
//!
//! Every text format starts with the line `# netflow-dist v1`. Readers skip
//! `#` comment lines, so hand-written files without the header load too.

pub mod config;
pub mod error;
pub mod formats;
pub mod heatmap;
pub mod reproduce;

pub use error::{CliError, CliResult};

/// First line of every file this crate writes.
pub const FORMAT_HEADER: &str = "# netflow-dist v1";
