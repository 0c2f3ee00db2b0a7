use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rfppg::commands::{history_path, METRICS_FILE};
use rfppg::{cmd_eval, cmd_preprocess, cmd_simulate, cmd_train, cmd_translate, CliError, CliResult, ModelKind, RunConfig};

#[derive(Parser)]
#[command(name = "rfppg", version, about = "Synthesize PPG waveforms from OFDM channel captures")]
struct Cli {
    /// key = value run configuration; defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configuration's base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Multiplies the simulated session length.
    #[arg(long, global = true)]
    scale: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Ridge,
    Mlp,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic capture/PPG dataset.
    Simulate {
        #[arg(long)]
        out: PathBuf,
        /// Also write the received baseband samples of every record.
        #[arg(long)]
        raw_iq: bool,
    },
    /// Turn a dataset directory into an archive of aligned segment pairs.
    Preprocess {
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a DCT-domain regressor on the training split.
    Train {
        pairs: PathBuf,
        #[arg(long, value_enum)]
        model_kind: Kind,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a model on both splits and write a report directory.
    Eval {
        pairs: PathBuf,
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Translate one capture into a synthetic PPG file.
    Translate {
        capture: PathBuf,
        model: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(scale) = cli.scale {
        cfg.scale = scale;
    }
    cfg.validate().map_err(CliError::Usage)?;
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = config(&cli)?;
    match cli.command {
        Command::Simulate { out, raw_iq } => {
            let m = cmd_simulate(&cfg, &out, raw_iq)?;
            let records: usize = m.subjects.iter().map(|s| s.sessions.len()).sum();
            println!("wrote {records} records of {} s for {} subjects to {}", m.duration_s, m.subjects.len(), out.display());
        }
        Command::Preprocess { dataset, out } => {
            let s = cmd_preprocess(&cfg, &dataset, &out)?;
            for r in &s.records {
                println!("{}: {} pairs, {} flagged windows", r.record_id, r.pairs, r.flagged);
            }
            for (id, e) in &s.failures {
                eprintln!("warning: skipped {id}: {e}");
            }
            if !s.failures.is_empty() {
                eprintln!("warning: {} of {} records skipped", s.failures.len(), s.failures.len() + s.records.len());
            }
            println!("{} pairs written to {}", s.pairs, out.display());
        }
        Command::Train { pairs, model_kind, out } => {
            let kind = match model_kind {
                Kind::Ridge => ModelKind::Ridge,
                Kind::Mlp => ModelKind::Mlp,
            };
            let s = cmd_train(&cfg, &pairs, kind, &out)?;
            let last = s.history.last().expect("at least one epoch");
            println!(
                "{} train / {} test pairs; {} epochs, best {}; train MAE {:.6}, validation MAE {:.6}",
                s.train_pairs,
                s.test_pairs,
                s.history.len(),
                s.best_epoch,
                last.train_mae,
                last.val_mae
            );
            println!("model: {}\nhistory: {}", out.display(), history_path(&out).display());
        }
        Command::Eval { pairs, model, out } => {
            let r = cmd_eval(&cfg, &pairs, &model, &out)?;
            for m in &r.metrics {
                println!(
                    "{}: {} segments, MAE {:.4} (DCT {:.4}), r median {:.3} IQR {:.3}, HR error median {:.2} bpm over {}",
                    m.split, m.segments, m.time_mae, m.dct_mae, m.pearson_median, m.pearson_iqr, m.hr_abs_err_median, m.hr_segments
                );
            }
            println!("report: {}", out.join(METRICS_FILE).display());
        }
        Command::Translate { capture, model, out } => {
            let x = cmd_translate(&cfg, &capture, &model, &out)?;
            println!("{} samples ({} s) written to {}", x.len(), x.duration(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
