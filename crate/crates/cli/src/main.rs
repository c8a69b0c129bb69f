use clap::{Parser, Subcommand};
use kgtx_cli::commands::{
    cmd_linear_spectral, cmd_simulate, cmd_sweep, cmd_verify, exit_code_for, resolve_out_dir,
};
use kgtx_cli::config::{ConfigError, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Simulator and verification suite for the one-dimensional nonlinear
/// Klein-Gordon transmission problem on two half-axes joined at a node.
#[derive(Parser)]
#[command(name = "kgtx", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Finite-difference run (modes: leapfrog, conserving)
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (env KGTX_OUT overrides)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed for randomized audits (overrides the config)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Closed-form linear solution on the configured grid
    LinearSpectral {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Full invariant suite; exits nonzero iff any check fails
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Cartesian parameter sweep over one or more axes
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Axis as key=v1,v2,... (repeatable; cells form the product)
        #[arg(long = "axis")]
        axes: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for sweep cells
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn load_config(path: &PathBuf) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read config {}: {e}", path.display()))?;
    Ok(RunConfig::parse(&text)?)
}

fn parse_axes(raw: &[String]) -> Result<Vec<(String, Vec<String>)>, ConfigError> {
    raw.iter()
        .map(|spec| {
            let (key, vals) = spec.split_once('=').ok_or(ConfigError {
                line: None,
                message: format!("axis must be key=v1,v2,..., got `{spec}`"),
            })?;
            let values: Vec<String> = vals
                .split(',')
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
                .collect();
            Ok((key.trim().to_string(), values))
        })
        .collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: anyhow::Result<usize> = (|| match &cli.cmd {
        Cmd::Simulate { config, out, seed } => {
            let cfg = load_config(config)?;
            let dir = resolve_out_dir(out.clone(), &cfg);
            cmd_simulate(&cfg, &dir, seed.unwrap_or(cfg.seed))?;
            Ok(0)
        }
        Cmd::LinearSpectral { config, out, seed } => {
            let cfg = load_config(config)?;
            let dir = resolve_out_dir(out.clone(), &cfg);
            cmd_linear_spectral(&cfg, &dir, seed.unwrap_or(cfg.seed))?;
            Ok(0)
        }
        Cmd::Verify { config, out, seed } => {
            let cfg = load_config(config)?;
            let dir = resolve_out_dir(out.clone(), &cfg);
            Ok(cmd_verify(&cfg, &dir, seed.unwrap_or(cfg.seed))?)
        }
        Cmd::Sweep {
            config,
            axes,
            out,
            seed,
            jobs,
        } => {
            let cfg = load_config(config)?;
            let axes = parse_axes(axes)?;
            let dir = resolve_out_dir(out.clone(), &cfg);
            cmd_sweep(&cfg, &axes, &dir, seed.unwrap_or(cfg.seed), (*jobs).max(1))?;
            Ok(0)
        }
    })();

    match result {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failures) => {
            eprintln!("kgtx: {failures} check(s) failed");
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("kgtx: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
