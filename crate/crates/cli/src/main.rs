use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use storage_equilibria::config::keys_in;
use storage_equilibria::{Config, Variant};
use storage_equilibria_cli::sweep::{parse_grid, run_sweep, sweep_csv, sweep_svgs, SweepParam, SweepSpec};
use storage_equilibria_cli::{
    cmd_equilibrium, cmd_policy, cmd_simulate, load_config, CliError, CommandOutput, SimulateOptions,
};

/// Equilibria and Monte Carlo checks for decentralized energy storages.
#[derive(Parser)]
#[command(name = "storeq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Svg,
    Both,
}

#[derive(Args)]
struct Common {
    /// Flat key = value parameter file; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the seed of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; CSV goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// centralized, private, public, sharing, targeted, multi_period or heterogeneous.
    #[arg(long, default_value = "private")]
    variant: String,
    /// Run the best-response audit; exits with 3 when a rule is not certified.
    #[arg(long)]
    audit: bool,
    /// Override a config key, e.g. `--set n=5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the equilibrium strategy and its closed-form payoffs.
    Equilibrium {
        #[command(flatten)]
        common: Common,
    },
    /// Estimate payoffs by Monte Carlo and compare them with the closed forms.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100_000)]
        reps: u64,
        /// Multi-period only: close every position in the last period.
        #[arg(long)]
        close_final: bool,
    },
    /// Sweep one parameter and tabulate metrics in long format.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// delta, alpha, n, rho, sigma or m.
        #[arg(long)]
        param: String,
        /// Comma-separated grid.
        #[arg(long, conflicts_with = "range")]
        values: Option<String>,
        /// start:stop:count grid.
        #[arg(long)]
        range: Option<String>,
        /// Geometric spacing for --range.
        #[arg(long)]
        log: bool,
        /// Comma-separated metric names, e.g. exact,published,A,C,mc.
        #[arg(long, default_value = "exact")]
        metrics: String,
        /// Replications per grid point for Monte Carlo metrics.
        #[arg(long, default_value_t = 10_000)]
        reps: u64,
    },
    /// Compare private, public, sharing and targeted information policies.
    Policy {
        #[command(flatten)]
        common: Common,
    },
}

fn read_config(common: &Common) -> Result<(Config, Vec<String>), CliError> {
    let text = match &common.config {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?,
        None => String::new(),
    };
    let cfg = load_config(&text, &common.overrides, common.seed)?;
    let mut explicit = keys_in(&text);
    explicit.extend(common.overrides.iter().filter_map(|o| o.split_once('=')).map(|(k, _)| k.trim().to_string()));
    Ok((cfg, explicit))
}

fn variant(common: &Common) -> Result<Variant, CliError> {
    Ok(common.variant.parse::<Variant>()?)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn emit(common: &Common, output: CommandOutput) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match &common.out {
        Some(path) => {
            write_file(path, &output.csv)?;
            stdout.write_all(output.summary.as_bytes()).map_err(io)?;
        }
        None => {
            stdout.write_all(output.csv.as_bytes()).map_err(io)?;
            eprint!("{}", output.summary);
        }
    }
    if output.audit_failed {
        return Err(CliError::Audit("equilibrium not certified".into()));
    }
    Ok(())
}

fn svg_path(out: &Path, metric: &str) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
    out.with_file_name(format!("{stem}_{metric}.svg"))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Equilibrium { common } => {
            let (cfg, _) = read_config(&common)?;
            let out = cmd_equilibrium(&cfg, variant(&common)?, common.audit)?;
            emit(&common, out)
        }
        Command::Simulate {
            common,
            reps,
            close_final,
        } => {
            let (cfg, _) = read_config(&common)?;
            let opts = SimulateOptions {
                replications: reps,
                audit: common.audit,
                close_final,
            };
            let out = cmd_simulate(&cfg, variant(&common)?, opts)?;
            emit(&common, out)
        }
        Command::Policy { common } => {
            let (cfg, _) = read_config(&common)?;
            let out = cmd_policy(&cfg)?;
            emit(&common, out)
        }
        Command::Sweep {
            common,
            param,
            values,
            range,
            log,
            metrics,
            reps,
        } => {
            let (cfg, explicit) = read_config(&common)?;
            let grid = parse_grid(values.as_deref(), range.as_deref(), log)?;
            let metrics = metrics.split(',').map(|m| m.trim().to_string()).filter(|m| !m.is_empty()).collect();
            let spec = SweepSpec::new(param.parse::<SweepParam>()?, grid, cfg, &explicit, variant(&common)?, metrics, reps)?;
            if common.format != Format::Csv && common.out.is_none() {
                return Err(CliError::Config("invalid format: SVG output needs --out".into()));
            }
            let rows = run_sweep(&spec)?;
            let csv = sweep_csv(&spec, &rows);
            match &common.out {
                None => print!("{csv}"),
                Some(path) => {
                    if common.format != Format::Svg {
                        write_file(path, &csv)?;
                    }
                    if common.format != Format::Csv {
                        for (metric, svg) in sweep_svgs(&spec, &rows) {
                            write_file(&svg_path(path, &metric), &svg)?;
                        }
                    }
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("storeq: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
