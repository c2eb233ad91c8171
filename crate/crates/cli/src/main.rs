//! `wgheat`: steady states, trajectories, sweeps and figure data for the
//! laser-driven four-level heat device.

mod error;
mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use wgheat_core::solver::EvolveOptions;
use wgheat_core::sweep::{figure_preset, run_sweep_with, Execution, SweepSpec};
use wgheat_core::thermo::analyze;
use wgheat_core::{build_generator, evolve, DensityMatrix, SystemConfig};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "wgheat", version, about = "Heat transport through a laser-driven four-level emitter")]
struct Cli {
    /// Output format; also switches errors on stderr to JSON.
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,

    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// JSON config file.
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Start from a figure preset's base parameters instead of a file.
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,

    /// Override a config field, e.g. `--set temp1=10`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Resample every generated axis to N points.
    #[arg(long, value_name = "N")]
    points: Option<usize>,

    /// Worker threads; 1 runs sequentially.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,

    /// Override a base config field. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Steady state, currents, engine metrics and effective temperature.
    Steady {
        #[command(flatten)]
        config: ConfigArgs,
        /// Print the resolved config (overrides and laser defaults applied) and exit.
        #[arg(long)]
        dump_config: bool,
    },
    /// Integrate from the ground state and tabulate the trajectory.
    Evolve {
        #[command(flatten)]
        config: ConfigArgs,
        /// End time in units of 1/gamma21; defaults to 20 relaxation times.
        #[arg(long, value_name = "T")]
        t_final: Option<f64>,
        /// Number of output rows.
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
    /// Run a sweep spec file.
    Sweep {
        /// JSON sweep spec.
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Regenerate the data behind a figure (fig2..fig5); writes NAME.csv by default.
    Figure {
        name: String,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Check a config against the model's validity conditions.
    Validate {
        #[command(flatten)]
        config: ConfigArgs,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn apply_overrides(config: &mut SystemConfig, overrides: &[String]) -> Result<(), CliError> {
    for o in overrides {
        config.apply_override(o)?;
    }
    Ok(())
}

fn load_config(args: &ConfigArgs) -> Result<SystemConfig, CliError> {
    let mut config = match (&args.config, &args.preset) {
        (Some(path), _) => read_json(path)?,
        (None, Some(name)) => figure_preset(name)?.base,
        (None, None) => return Err(CliError::Usage("one of --config or --preset is required".into())),
    };
    apply_overrides(&mut config, &args.overrides)?;
    Ok(config)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}

fn execution(workers: Option<usize>) -> Execution {
    match workers {
        Some(1) => Execution::Serial,
        w => Execution::Parallel { workers: w },
    }
}

fn run_spec(mut spec: SweepSpec, args: &SweepArgs, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    apply_overrides(&mut spec.base, &args.overrides)?;
    if let Some(n) = args.points {
        if n == 0 {
            return Err(CliError::Usage("--points must be positive".into()));
        }
        spec = spec.with_points(n);
    }
    if args.workers == Some(0) {
        return Err(CliError::Usage("--workers must be positive".into()));
    }
    let result = run_sweep_with(&spec, execution(args.workers))?;
    let failed = result.failed_rows();
    if failed > 0 {
        eprintln!("warning: {failed} of {} points failed", result.rows.len());
    }
    let text = match format {
        Format::Csv => result.to_csv(),
        Format::Json => result.to_json() + "\n",
    };
    emit(out, &text)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Steady { config, dump_config } => {
            let config = load_config(config)?;
            if *dump_config {
                return emit(out, &output::config_json(&config));
            }
            let report = config.validate();
            if report.is_fatal() {
                return Err(report.into_result().unwrap_err().into());
            }
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            let analysis = analyze(&config)?;
            let text = match cli.format.unwrap_or(Format::Json) {
                Format::Json => output::steady_json(&config, &report, &analysis),
                Format::Csv => output::steady_csv(&analysis),
            };
            emit(out, &text)
        }
        Command::Evolve {
            config,
            t_final,
            samples,
        } => {
            let config = load_config(config)?;
            let report = config.validate();
            if report.is_fatal() {
                return Err(report.into_result().unwrap_err().into());
            }
            let gen = build_generator(&config)?;
            let opts = EvolveOptions {
                t_final: *t_final,
                convergence: None,
                samples: *samples,
                ..Default::default()
            };
            let traj = evolve(&gen, &DensityMatrix::ground(), &opts)?;
            let table = output::trajectory_table(&config, &traj);
            let text = match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => table.to_csv(),
                Format::Json => table.to_json(&config, &traj),
            };
            emit(out, &text)
        }
        Command::Sweep { config, sweep } => {
            let spec: SweepSpec = read_json(config)?;
            run_spec(spec, sweep, cli.format.unwrap_or(Format::Csv), out)
        }
        Command::Figure { name, sweep } => {
            let spec = figure_preset(name)?;
            let format = cli.format.unwrap_or(Format::Csv);
            let default_out = PathBuf::from(format!(
                "{name}.{}",
                if format == Format::Csv { "csv" } else { "json" }
            ));
            run_spec(spec, sweep, format, Some(out.unwrap_or(&default_out)))
        }
        Command::Validate { config } => {
            let config = load_config(config)?;
            let report = config.validate();
            let text = match cli.format {
                Some(Format::Json) => output::validation_json(&report),
                Some(Format::Csv) => output::validation_csv(&report),
                None => output::validation_text(&report),
            };
            emit(out, &text)?;
            if report.is_fatal() {
                Err(CliError::Rejected(report.fatal))
            } else {
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage problems count as invalid input, not solver failures
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if cli.format == Some(Format::Json) {
                eprintln!("{}", e.to_json());
            } else if !matches!(e, CliError::Rejected(_)) {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
