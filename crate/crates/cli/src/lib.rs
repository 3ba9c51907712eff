//! Library side of the `ergoflux` command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail range checks

pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod verify;

pub use config::{load_config, parse_config, Command, Format, Overrides, RunConfig};
pub use error::{CliError, CliResult};
pub use run::run;

/// Sizes the global rayon pool from `ERGOFLUX_THREADS` when set.
pub fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("ERGOFLUX_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("ERGOFLUX_THREADS={v:?} is not a positive integer")))?;
    // a second initialization in the same process is harmless
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
