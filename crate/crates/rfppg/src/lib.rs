//! File formats, dataset generation and the command implementations
//! behind the `rfppg` binary.
//!
//! * [`capture`]: binary channel-estimate captures (`.rpg`) and raw IQ dumps.
//! * [`ppgfile`]: text PPG files (`.ppg`).
//! * [`archive`]: segment-pair archives written by `preprocess`.
//! * [`config`]: `key = value` run configuration.
//! * [`dataset`]: `simulate` and the dataset manifest.
//! * [`commands`]: `preprocess`, `train`, `eval`, `translate`.

pub mod archive;
pub mod capture;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod plot;
pub mod pool;
pub mod ppgfile;

pub use commands::{cmd_eval, cmd_preprocess, cmd_train, cmd_translate, ModelKind};
pub use config::RunConfig;
pub use dataset::cmd_simulate;
pub use error::{CliError, CliResult};
