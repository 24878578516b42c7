use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use printchain::par::{self, Exec};
use printchain::pipeline::{self, Context, PipelineConfig, StageOutcome, StageStatus};
use printchain::Error;

/// Design-to-inspection chain for extrusion-based printing.
#[derive(Parser)]
#[command(name = "printchain", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML config file.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Output directory, overriding `io.out_dir`.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Continue past collisions and reach violations.
    #[arg(long, global = true)]
    force: bool,

    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write design.stl and per-layer contours.
    Generate,
    /// Slice an STL into layers.csv or helix.csv.
    Slice {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Plan the toolpath, check it and export G-code and events.
    Toolpath {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Early-age stability from an event series.
    Stability {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Deviation of a scan from the reference mesh.
    Inspect {
        #[arg(long)]
        scan: Option<PathBuf>,
        #[arg(long)]
        reference: Option<PathBuf>,
    },
    /// generate, slice, toolpath and stability, with a manifest.
    Run,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.verbose {
            log::LevelFilter::Info
        } else {
            log::LevelFilter::Warn
        })
        .parse_default_env()
        .init();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(pipeline::exit_code(&e) as u8)
        }
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    let Some(config) = cli.config else {
        return Err(Error::InvalidParameter {
            name: "--config".into(),
            message: "a config file is required".into(),
        });
    };
    let cfg = PipelineConfig::load(&config)?;
    let mut exec = Exec::default();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "--threads".into(),
                message: "must be at least 1".into(),
            });
        }
        if n == 1 {
            exec = Exec::Sequential;
        } else {
            par::set_threads(n);
        }
    }
    let ctx = Context {
        out_dir: cli.out_dir.unwrap_or_else(|| cfg.out_dir.clone()),
        force: cli.force,
        exec,
    };
    let outcome = match cli.command {
        Command::Generate => pipeline::cmd_generate(&cfg, &ctx)?,
        Command::Slice { input } => pipeline::cmd_slice(&cfg, &ctx, input.as_deref())?,
        Command::Toolpath { input } => pipeline::cmd_toolpath(&cfg, &ctx, input.as_deref())?,
        Command::Stability { input } => pipeline::cmd_stability(&cfg, &ctx, input.as_deref())?,
        Command::Inspect { scan, reference } => {
            pipeline::cmd_inspect(&cfg, &ctx, scan.as_deref(), reference.as_deref())?
        }
        Command::Run => {
            let run = pipeline::cmd_run(&cfg, &ctx)?;
            for o in &run.outcomes {
                print_outcome(o);
            }
            for (name, status) in &run.stages {
                let s = match status {
                    StageStatus::Ok => "ok",
                    StageStatus::Failed => "FAILED",
                    StageStatus::Skipped => "skipped",
                    StageStatus::Error(_) => "error",
                };
                println!("{name}: {s}");
            }
            println!("manifest: {}", ctx.out_dir.join(pipeline::MANIFEST).display());
            return Ok(run.passed());
        }
    };
    print_outcome(&outcome);
    Ok(outcome.passed)
}

fn print_outcome(o: &StageOutcome) {
    println!("== {} ==", o.stage);
    print!("{}", o.summary);
    for a in &o.artifacts {
        println!("wrote {a}");
    }
}
