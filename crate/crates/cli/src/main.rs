//! `pathlen`: run bandit simulations from a JSON config.
//!
//! ```text
//! pathlen run --config exp.json --seed 3 --format csv --out runs/exp.csv
//! pathlen sweep --config grid.json --set stream.horizon=5000
//! ```
//!
//! Output goes to `--out`, else the config's `output`, else a generated file
//! name inside `$PATHLEN_OUTPUT_DIR`, else stdout. Failures exit nonzero with
//! a JSON error object on stderr.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pathlen::harness::{self, ExperimentConfig, OutputFormat};
use pathlen::Error;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "pathlen", version, about = "Path-length adaptive bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// JSON experiment config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed to run; repeat for several seeds in a sweep.
    #[arg(long, global = true)]
    seed: Vec<u64>,

    /// Output file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Learner kind (alg1, alg2, wei_luo, exp3, scribble).
    #[arg(long, global = true)]
    learner: Option<String>,

    /// Stream kind (piecewise, iid_uniform, constant, adaptive_lowerbound,
    /// linear_drift, linear_constant).
    #[arg(long, global = true)]
    stream: Option<String>,

    /// Dotted config override, e.g. `stream.horizon=5000`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Simulate one seed and write its per-round record.
    Run,
    /// Run the config's grid over all seeds and write one row per cell.
    Sweep,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

const OUTPUT_DIR_ENV: &str = "PATHLEN_OUTPUT_DIR";

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut value: Value = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => json!({}),
    };
    if let Some(kind) = &cli.learner {
        harness::apply_override(&mut value, "learner.kind", &serde_json::to_string(kind)?)?;
    }
    if let Some(kind) = &cli.stream {
        harness::apply_override(&mut value, "stream.kind", &serde_json::to_string(kind)?)?;
    }
    for item in &cli.overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {item:?} is not KEY=VALUE")))?;
        harness::apply_override(&mut value, key.trim(), raw)?;
    }
    if !cli.seed.is_empty() {
        value["seeds"] = json!(cli.seed);
    }
    let mut config = ExperimentConfig::from_value(value)?;
    if let Some(f) = cli.format {
        config.format = f.into();
    }
    Ok(config)
}

fn kind_name(v: Value) -> String {
    v.as_str().map(str::to_string).unwrap_or_default()
}

fn destination(cli: &Cli, config: &ExperimentConfig, stem: &str) -> Option<PathBuf> {
    if let Some(p) = cli.out.clone().or_else(|| config.output.clone()) {
        return Some(p);
    }
    let dir = std::env::var_os(OUTPUT_DIR_ENV).filter(|d| !d.is_empty())?;
    let ext = match config.format {
        OutputFormat::Json => "json",
        OutputFormat::Csv => "csv",
    };
    Some(Path::new(&dir).join(format!("{stem}.{ext}")))
}

fn write_output<F>(dest: Option<PathBuf>, write: F) -> Result<(), Error>
where
    F: FnOnce(&mut dyn Write) -> Result<(), Error>,
{
    match dest {
        Some(path) => {
            harness::with_file(&path, |w| write(w))?;
            log::info!("wrote {}", path.display());
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
            lock.flush().map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}

fn execute(cli: &Cli) -> Result<(), Error> {
    let config = load_config(cli)?;
    let learner = kind_name(json!(config.learner.kind));
    let stream = kind_name(json!(config.stream.kind));
    match cli.command.unwrap_or(Command::Run) {
        Command::Run => {
            let [seed] = config.seeds[..] else {
                return Err(Error::Config(format!(
                    "run takes exactly one seed, got {}; use sweep for several",
                    config.seeds.len()
                )));
            };
            let record = harness::run(&config, seed)?;
            let dest = destination(cli, &config, &format!("run-{learner}-{stream}-seed{seed}"));
            write_output(dest, |w| harness::emit_record(&record, config.format, w))
        }
        Command::Sweep => {
            let table = harness::sweep(&config)?;
            let dest = destination(cli, &config, &format!("sweep-{learner}-{stream}"));
            write_output(dest, |w| harness::emit_sweep(&config, &table, config.format, w))
        }
    }
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    let body = json!({ "error": { "kind": kind, "message": message } });
    eprintln!("{body}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.to_string().trim_end(), 2),
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = match e {
                Error::Config(_) => 2,
                _ => 1,
            };
            fail(e.kind(), &e.to_string(), code)
        }
    }
}
