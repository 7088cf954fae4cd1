use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fraisse_cli::{run, Command, RunConfig, DEFAULT_BOUND};

#[derive(Parser)]
#[command(
    name = "fraisse",
    version,
    about = "Embed, extend and retract through a generic limit, with certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Embed a ball tree into the generic limit.
    Embed(BuildArgs),
    /// Retract the generic limit onto an embedded ball tree.
    Retract(BuildArgs),
    /// Extend a bijection between two embedded sets to the ambients.
    Extend(IoArgs),
    /// Re-check a certificate.
    Verify {
        input: PathBuf,
        /// Largest number of maps a brute-force oracle may enumerate.
        #[arg(long, default_value_t = DEFAULT_BOUND)]
        bounds: u128,
    },
    /// Write the shipped fixture certificates.
    Demo {
        #[command(flatten)]
        schedule: ScheduleArgs,
        /// Directory for the certificates; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct IoArgs {
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScheduleArgs {
    /// Length of the Fraïssé sequence.
    #[arg(long, default_value_t = 4)]
    depth: usize,
    #[arg(long, default_value_t = 2)]
    pad_base: usize,
    #[arg(long, default_value_t = 2)]
    pad_growth: usize,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    io: IoArgs,
    #[command(flatten)]
    schedule: ScheduleArgs,
}

fn config(command: Command, s: Option<ScheduleArgs>) -> RunConfig {
    let mut c = RunConfig::new(command);
    if let Some(s) = s {
        c.depth = s.depth;
        c.pad_base = s.pad_base;
        c.pad_growth = s.pad_growth;
    }
    c
}

fn build_config(command: Command, a: BuildArgs) -> RunConfig {
    RunConfig {
        input: Some(a.io.input),
        out: a.io.out,
        ..config(command, Some(a.schedule))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let cfg = match cli.command {
        Cmd::Embed(a) => build_config(Command::Embed, a),
        Cmd::Retract(a) => build_config(Command::Retract, a),
        Cmd::Extend(a) => RunConfig {
            input: Some(a.input),
            out: a.out,
            ..config(Command::Extend, None)
        },
        Cmd::Verify { input, bounds } => RunConfig {
            input: Some(input),
            bounds,
            ..config(Command::Verify, None)
        },
        Cmd::Demo { schedule, out } => RunConfig {
            out,
            ..config(Command::Demo, Some(schedule))
        },
    };
    match run(&cfg) {
        Ok(outcome) => {
            if let Some(doc) = outcome.document {
                let _ = std::io::stdout().write_all(doc.as_bytes());
            }
            for line in outcome.summary {
                eprintln!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
