//! Seeded simulations, regret and path-length metrics, sweeps and output.

mod config;
mod emit;
mod run;
mod sweep;

pub use config::{
    apply_override, Diagnostics, ExperimentConfig, LearnerConfig, LearnerKind, OutputFormat,
    StreamConfig, StreamName,
};
pub use emit::{emit_record, emit_sweep, to_json_string, with_file, write_record_csv, write_sweep_csv};
pub use run::{run, run_linear, run_mab, Action, Meta, Row, RunRecord, Summary};
pub use sweep::{expand_grid, sweep, CellFailure, SweepCell, SweepTable};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Learner randomness: stream 1 of the root seed. Stream 0 drives the adversary.
pub fn learner_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Tag written into every output's metadata.
pub fn commit_tag() -> &'static str {
    option_env!("PATHLEN_COMMIT").unwrap_or(concat!("pathlen-", env!("CARGO_PKG_VERSION")))
}
