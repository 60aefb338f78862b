use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use satrep::commands::{self, CustomOp, CustomSpec};
use satrep::config::Config;
use satrep::output::{emit, Metadata, Table};
use satrep::{figures, CliError};

/// Coverage of IoT uplinks to LEO satellites with frame repetition.
///
/// Any configuration key can be overridden as `--section.key=value`, for
/// example `--repetition.a=2e-4` or `--output.format=json`.
#[derive(Debug, Parser)]
#[command(name = "satrep", version)]
struct Cli {
    /// TOML configuration file; omitted keys take reference defaults.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analytic interference, success and coverage for the configured scenario.
    Analytic,
    /// Monte Carlo estimates next to their analytic values.
    Simulate,
    /// Grid search for the (a, theta_min) maximizing global success.
    Sweep,
    /// Data behind one of figures 2 to 9.
    Figure {
        #[arg(value_parser = clap::value_parser!(u32).range(2..=9))]
        n: u32,
    },
    /// Evaluate one quantity over a swept variable.
    Custom {
        #[arg(long, value_enum)]
        op: CustomOp,
        /// elevation_deg, zenith_deg or a numeric config key (e.g. repetition.a).
        #[arg(long)]
        var: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, default_value_t = 51)]
        points: usize,
        /// Log-spaced values instead of linear.
        #[arg(long)]
        log: bool,
    },
    /// Check a configuration and print it with all defaults filled in.
    ValidateConfig,
}

impl Command {
    fn name(&self) -> String {
        match self {
            Command::Analytic => "analytic".into(),
            Command::Simulate => "simulate".into(),
            Command::Sweep => "sweep".into(),
            Command::Figure { n } => format!("figure {n}"),
            Command::Custom { .. } => "custom".into(),
            Command::ValidateConfig => "validate-config".into(),
        }
    }
}

/// Splits `--section.key=value` overrides from the arguments clap handles.
fn split_overrides(args: impl Iterator<Item = String>) -> (Vec<String>, Vec<String>) {
    args.partition(|a| {
        a.strip_prefix("--")
            .and_then(|s| s.split_once('='))
            .is_some_and(|(k, _)| k.contains('.'))
    })
}

fn load(path: Option<&Path>, overrides: &[String]) -> Result<Config, CliError> {
    Ok(match path {
        Some(p) => Config::load(p, overrides)?,
        None => Config::from_toml_str("", overrides)?,
    })
}

fn run(cli: Cli, overrides: &[String]) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let cfg = load(cli.config.as_deref(), overrides)?;
    let tables: Vec<Table> = match &cli.command {
        Command::ValidateConfig => {
            print!("# config_sha256: {}\n{}", cfg.hash(), cfg.to_toml_string());
            return Ok(());
        }
        Command::Analytic => commands::analytic(&cfg)?,
        Command::Simulate => commands::simulate(&cfg)?,
        Command::Sweep => commands::sweep(&cfg)?,
        Command::Figure { n } => figures::figure(&cfg, *n)?,
        Command::Custom {
            op,
            var,
            from,
            to,
            points,
            log,
        } => commands::custom(
            &cfg,
            &CustomSpec {
                op: *op,
                var: var.clone(),
                from: *from,
                to: *to,
                points: *points,
                log: *log,
            },
        )?,
    };
    let meta = Metadata {
        command: cli.command.name(),
        config_hash: cfg.hash(),
        seed: cfg.sim.seed,
    };
    let dir = Path::new(&cfg.output.dir);
    for t in &tables {
        for path in emit(t, &meta, dir, cfg.output.format)? {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let (overrides, args) = split_overrides(std::env::args());
    let cli = Cli::parse_from(args);
    match run(cli, &overrides) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
