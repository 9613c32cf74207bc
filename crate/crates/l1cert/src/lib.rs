//! File formats, reports and the `l1cert` command line on top of
//! [`l1cert_core`].

pub mod cli;
pub mod matrix_io;
pub mod report;
pub mod table;

pub use cli::{run, run_with};

/// Version stamped into every JSON document and CSV header.
pub const SCHEMA_VERSION: u32 = 1;
