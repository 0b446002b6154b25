use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qsr_cli::{execute, parse_injected_d, resolve_config, CliError, Command, Options, Overrides};

#[derive(Parser)]
#[command(name = "qsr", version, about = "Spin relaxation in the quantized field: coefficients, GKLS spectra, dynamics and Fock-space comparisons")]
struct Cli {
    /// Config file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides output.directory).
    #[arg(long, global = true)]
    out: Option<String>,
    /// Comma-separated subset of csv,json,svg.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Recorded in every report; all computations are deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override a config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Use these d_m instead of computing them: re1,im1,re0,im0,re-1,im-1.
    #[arg(long, global = true, hide = true, allow_hyphen_values = true)]
    inject_d: Option<String>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// d_m by both routes and the decay of u(t).
    Coeffs,
    /// Eigensystem of L and CP certification of its semigroup.
    Spectrum,
    /// Approximate reduced dynamics on the time grid.
    Evolve,
    /// Full truncated-Fock dynamics against the approximation.
    OracleCompare,
    /// Convergence sweep along one discretization axis.
    Sweep {
        /// n_modes, excitation_cap or omega_max.
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated axis values.
        #[arg(long, allow_hyphen_values = true)]
        values: Option<String>,
    },
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("{}", e.record());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut overrides = Overrides {
        sets: cli.set.clone(),
        out: cli.out.clone(),
        formats: cli.format.clone(),
        seed: cli.seed,
    };
    let command = match &cli.command {
        Sub::Coeffs => Command::Coeffs,
        Sub::Spectrum => Command::Spectrum,
        Sub::Evolve => Command::Evolve,
        Sub::OracleCompare => Command::OracleCompare,
        Sub::Sweep { axis, values } => {
            if let Some(a) = axis {
                overrides.sets.push(format!("sweep.axis={a}"));
            }
            if let Some(v) = values {
                overrides.sets.push(format!("sweep.values={v}"));
            }
            Command::Sweep
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    let cfg = match resolve_config(cli.config.as_deref(), std::env::vars(), &overrides) {
        Ok(c) => c,
        Err(e) => return fail(e.into()),
    };
    let opts = match cli.inject_d.as_deref().map(parse_injected_d).transpose() {
        Ok(injected_d) => Options { injected_d },
        Err(e) => return fail(e.into()),
    };
    match execute(command, &cfg, &opts) {
        Ok(summary) => {
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            println!("{}: {}", command.name(), summary.status);
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}
