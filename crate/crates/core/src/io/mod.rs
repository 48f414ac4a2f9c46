//! Configuration files, checkpoints and diagnostics output.

pub mod checkpoint;
pub mod config;
pub mod emit;

pub use checkpoint::{decode_checkpoint, encode_checkpoint, read_checkpoint, write_checkpoint};
pub use config::{parse_config, parse_run_config, parse_sweep_config, Config, RunSettings};
pub use emit::{diagnostics_row, write_diagnostics_csv, write_ndjson, DIAGNOSTICS_HEADER};
