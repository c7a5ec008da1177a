use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sparsenilm::{cmd_eval, cmd_fit, cmd_predict, cmd_run, cmd_synth, CliError, ExitKind, ExperimentConfig};

/// Non-intrusive load monitoring by multi-label sparse representation
/// classification.
#[derive(Parser)]
#[command(name = "sparsenilm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic household CSV to <out>/household.csv
    Synth(Common),
    /// Fit on the train split and write <out>/model.json
    Fit(Common),
    /// Predict the test split with a saved model; writes <out>/predictions.csv
    Predict(WithModel),
    /// Score the test split with a saved model; writes <out>/report.json and report.txt
    Eval(WithModel),
    /// Fit and eval in one pass
    Run(Common),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    train_fraction: Option<f64>,
    /// Watts above which an hour counts as ON
    #[arg(long)]
    on_threshold: Option<f64>,
    #[arg(long, value_parser = ["omp", "ista", "fista"])]
    solver: Option<String>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write intermediate artifacts
    #[arg(long)]
    keep: bool,
    /// Any config key, as key=value; repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct WithModel {
    #[command(flatten)]
    common: Common,
    /// Model file; defaults to <out>/model.json
    #[arg(long)]
    model: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut overrides = Vec::new();
        for item in &self.set {
            let (k, v) = item.split_once('=').ok_or_else(|| {
                CliError::new("usage", "BadOverride", format!("--set expects KEY=VALUE, got {item:?}"), ExitKind::Usage)
            })?;
            overrides.push((k.trim().to_owned(), v.trim().to_owned()));
        }
        let flags = [
            ("seed", self.seed.map(|v| v.to_string())),
            ("classifier.tau", self.tau.map(|v| v.to_string())),
            ("train_fraction", self.train_fraction.map(|v| v.to_string())),
            ("on_threshold", self.on_threshold.map(|v| v.to_string())),
            ("solver.method", self.solver.clone()),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
        ];
        overrides.extend(flags.into_iter().filter_map(|(k, v)| v.map(|v| (k.to_owned(), v))));
        ExperimentConfig::resolve(self.config.as_deref(), &overrides).map_err(CliError::config)
    }
}

fn print_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Synth(c) => print_paths(&cmd_synth(&c.resolve()?)?),
        Command::Fit(c) => print_paths(&cmd_fit(&c.resolve()?, c.keep)?),
        Command::Predict(m) => {
            let cfg = m.common.resolve()?;
            let model = m.model.unwrap_or_else(|| cfg.out.join(sparsenilm::commands::MODEL_FILE));
            print_paths(&cmd_predict(&cfg, &model)?);
        }
        Command::Eval(m) => {
            let cfg = m.common.resolve()?;
            let model = m.model.unwrap_or_else(|| cfg.out.join(sparsenilm::commands::MODEL_FILE));
            let (report, paths) = cmd_eval(&cfg, &model)?;
            print!("{}", report.to_table());
            print_paths(&paths);
        }
        Command::Run(c) => {
            let (report, paths) = cmd_run(&c.resolve()?, c.keep)?;
            print!("{}", report.to_table());
            print_paths(&paths);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            let err = CliError::new("usage", "Usage", e.kind().to_string(), ExitKind::Usage);
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
