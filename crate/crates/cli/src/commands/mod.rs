mod analysis;
mod data;
mod model;

pub use analysis::{compare, gradcheck};
pub use data::{augment, split, synth};
pub use model::{benchmark, experiment, train};

use std::env;

use crate::error::{CliError, CliResult};

/// Worker count from `HYPERGRID_THREADS`; 1 when unset.
pub fn thread_count() -> CliResult<usize> {
    match env::var("HYPERGRID_THREADS") {
        Err(_) => Ok(1),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(CliError::usage(format!("HYPERGRID_THREADS must be a positive integer, got `{v}`"))),
        },
    }
}
