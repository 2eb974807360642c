//! `nfepm`: runs channel sweeps, solver accuracy grids, bound curves and
//! Monte-Carlo MAP experiments, writing CSV files.

mod config;
mod error;
mod output;
mod preset;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Scenario;
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "nfepm", version = env!("CARGO_PKG_VERSION"), about = "Near-field pose estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a built-in experiment (table2, fig3 .. fig9).
    Preset {
        name: String,
        #[command(flatten)]
        common: Common,
    },
    /// Channel values and relative errors over a list of distances.
    Channel(Common),
    /// Closed-form solver RMSE over a grid of the prior box.
    Solve(Common),
    /// Ziv-Zakai bounds over an SNR sweep.
    Zzb(Common),
    /// Expected Cramér-Rao bounds over an SNR sweep.
    Ecrb(Common),
    /// Monte-Carlo MSE of the MAP estimator.
    MapMc(Common),
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// `key=value`, with dotted keys for sections (e.g. `zzb.n_delta=32`).
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn overrides(&self) -> Result<Vec<(String, String)>, CliError> {
        self.overrides.iter().map(|s| config::parse_override(s)).collect()
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(cmd: Command) -> Result<Vec<PathBuf>, CliError> {
    let (scenario, common) = match cmd {
        Command::Preset { name, common } => return execute_preset(&name, &common),
        Command::Channel(c) => (Scenario::Channel, c),
        Command::Solve(c) => (Scenario::Solve, c),
        Command::Zzb(c) => (Scenario::Zzb, c),
        Command::Ecrb(c) => (Scenario::Ecrb, c),
        Command::MapMc(c) => (Scenario::MapMc, c),
    };
    let path = common.config.as_deref().ok_or_else(|| CliError::Usage("--config is required".into()))?;
    let mut cfg = config::load(path, &common.overrides()?)?;
    match cfg.scenario {
        Some(s) if s != scenario => {
            return Err(CliError::invariant("scenario", format!("config is for `{s}`, subcommand is `{scenario}`")));
        }
        _ => cfg.scenario = Some(scenario),
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    let table = run::run(&cfg)?;
    let name = cfg.output.clone().unwrap_or_else(|| format!("{scenario}.csv"));
    let header = output::header(&[format!("subcommand = {scenario}"), format!("seed = {}", cfg.seed)], &cfg.to_toml());
    Ok(vec![output::write_csv(&common.out, &name, &header, &table)?])
}

fn execute_preset(name: &str, common: &Common) -> Result<Vec<PathBuf>, CliError> {
    if common.config.is_some() {
        return Err(CliError::Usage("presets take no --config".into()));
    }
    let overrides = common.overrides()?;
    let products = preset::run_preset(name, &overrides, common.seed)?;
    let echo: Vec<String> = overrides.iter().map(|(k, v)| format!("{k}={v}")).collect();
    products
        .iter()
        .map(|p| {
            let mut prov = vec![
                format!("preset = {name}"),
                format!("overrides = [{}]", echo.join(", ")),
                format!("seed = {}", p.config.seed),
            ];
            prov.extend(p.notes.iter().cloned());
            let header = output::header(&prov, &p.config.to_toml());
            output::write_csv(Path::new(&common.out), &p.file, &header, &p.table)
        })
        .collect()
}
