//! `cohcert`: coherence measures, optimal channels, discrimination games,
//! one-shot rates and certification suites from the command line.
//!
//! Exit codes: 0 ok, 1 certification failure, 2 input error, 3 solver failure.

mod commands;
mod output;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use cohcert::par::{configure_threads, Execution};
use cohcert::Error;

use crate::output::{destination, Emitter};
use crate::source::StateArgs;

#[derive(Parser, Debug)]
#[command(name = "cohcert", version, about = "Coherence quantifiers and their operational certificates")]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, env = "COHCERT_THREADS")]
    threads: Option<usize>,
    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    /// Report path. Defaults to $COHCERT_OUT/<command>.json, else stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Include optimizer witnesses and certificates in the report.
    #[arg(long, global = true)]
    witness: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum InstrumentKind {
    Cmax,
    Phase,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// All coherence measures of one state.
    Measure {
        #[command(flatten)]
        state: StateArgs,
        /// Rank tolerance for support projectors.
        #[arg(long, default_value_t = cohcert::tol::RANK)]
        tol: f64,
        /// Use the closed form of C_max for pure inputs.
        #[arg(long)]
        closed_form: bool,
        /// Write the C_max solver iterations as CSV.
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
    },
    /// Optimal overlap channel of a state, or a given channel applied to it.
    Channel {
        #[command(flatten)]
        state: StateArgs,
        /// Channel JSON to apply instead of constructing one.
        #[arg(long, value_name = "FILE")]
        apply: Option<PathBuf>,
        /// Membership tolerance.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Subchannel discrimination game.
    Game {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_enum, default_value = "cmax")]
        instrument: InstrumentKind,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Allowed |ratio - 2^C_max| for the cmax instrument.
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
    /// One-shot distillation and cost under MIO.
    Oneshot {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.05")]
        eps: Vec<f64>,
        /// Largest target dimension scanned (default min(d^2, 64/d)).
        #[arg(long)]
        m_max: Option<usize>,
        /// Slack on the bound checks.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Smoothed quantities of tensor powers.
    Sweep {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.1")]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 4)]
        n_max: usize,
        /// Also write the records as CSV.
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
    },
    /// Full certification suite on seeded random states.
    Certify {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 25)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.05")]
        eps: Vec<f64>,
        /// Override every tolerance with one value.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long)]
        m_max: Option<usize>,
    },
    /// IO instance raising the average C_min, and the mixed-state C_min example.
    Demo {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Measure { .. } => "measure",
            Command::Channel { .. } => "channel",
            Command::Game { .. } => "game",
            Command::Oneshot { .. } => "oneshot",
            Command::Sweep { .. } => "sweep",
            Command::Certify { .. } => "certify",
            Command::Demo { .. } => "demo",
        }
    }
}

/// Outcome of a command that ran to completion.
pub enum Verdict {
    Ok,
    /// A checked relation did not hold; the report was still written.
    Failed(String),
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Solver(_) => 3,
        Error::Certification(_) | Error::NotFound(_) => 1,
        _ => 2,
    }
}

pub struct Ctx {
    pub exec: Execution,
    pub witness: bool,
    pub emitter: Emitter,
}

fn main() -> ExitCode {
    let started = Instant::now();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        configure_threads(n);
    }
    let env_dir = std::env::var_os("COHCERT_OUT").filter(|v| !v.is_empty()).map(PathBuf::from);
    let ctx = Ctx {
        exec: if cli.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
        witness: cli.witness,
        emitter: Emitter {
            command: cli.command.name().to_string(),
            argv: std::env::args().skip(1).collect(),
            started,
            dest: destination(cli.out.as_deref(), env_dir.as_deref(), cli.command.name()),
        },
    };
    let result = match cli.command {
        Command::Measure {
            state,
            tol,
            closed_form,
            trace,
        } => commands::measure(&ctx, &state, tol, closed_form, trace.as_deref()),
        Command::Channel { state, apply, tol } => commands::channel(&ctx, &state, apply.as_deref(), tol),
        Command::Game {
            state,
            instrument,
            trials,
            seed,
            tol,
        } => commands::game(&ctx, &state, instrument, trials, seed, tol),
        Command::Oneshot { state, eps, m_max, tol } => commands::oneshot(&ctx, &state, &eps, m_max, tol),
        Command::Sweep { state, eps, n_max, csv } => commands::sweep(&ctx, &state, &eps, n_max, csv.as_deref()),
        Command::Certify {
            dim,
            count,
            seed,
            eps,
            tol,
            trials,
            m_max,
        } => commands::certify(&ctx, dim, count, seed, eps, tol, trials, m_max),
        Command::Demo { seed, trials } => commands::demo(&ctx, seed, trials),
    };
    match result {
        Ok(Verdict::Ok) => ExitCode::SUCCESS,
        Ok(Verdict::Failed(msg)) => {
            eprintln!("cohcert: certification failure: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("cohcert: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
