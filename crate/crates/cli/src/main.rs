use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ergoflux::{init_threads, load_config, run, CliError, CliResult, Command, Format, Overrides};

/// Ergotropy dynamics and ergotropic Mpemba crossings of open quantum batteries.
#[derive(Debug, Parser)]
#[command(name = "ergoflux", version)]
struct Args {
    /// traj | crossings | region | verify | spectrum
    command: String,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the channel's base decay rate.
    #[arg(long)]
    gamma: Option<f64>,
    /// Overrides the time horizon.
    #[arg(long = "t-max")]
    t_max: Option<f64>,
    /// Overrides the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json
    #[arg(long)]
    format: Option<String>,
}

fn go() -> CliResult<()> {
    let args = Args::try_parse().map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            print!("{e}");
            std::process::exit(0);
        }
        _ => CliError::Usage(e.to_string().lines().next().unwrap_or_default().to_string()),
    })?;
    init_threads()?;
    let overrides = Overrides {
        command: Some(args.command.parse::<Command>()?),
        gamma: args.gamma,
        t_max: args.t_max,
        out: args.out,
        format: args.format.as_deref().map(str::parse::<Format>).transpose()?,
    };
    let source =
        std::fs::read_to_string(&args.config).map_err(|e| CliError::Io(format!("{}: {e}", args.config.display())))?;
    let cfg = load_config(&source, &overrides)?;
    for p in run(&cfg)? {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match go() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
