mod commands;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use failure::{Failure, CONFIG};

#[derive(Debug, Parser)]
#[command(
    name = "groundkit",
    version,
    about = "Ground referring expressions, replay LLM prompts and run kitchen command programs"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Scene file (defaults to the fixture kitchen, or the storage scene for `store`).
    #[arg(long, global = true)]
    pub scene: Option<PathBuf>,
    /// Answer prompts from this recorded transcript.
    #[arg(long, global = true, value_name = "TRANSCRIPT", conflicts_with = "live")]
    pub replay: Option<PathBuf>,
    /// Send prompts to the configured endpoint, recording into <out>/transcript.jsonl.
    #[arg(long, global = true)]
    pub live: bool,
    /// Directory for every file the command writes.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Endpoint configuration (TOML) for live mode.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Viewpoint the scene is described from.
    #[arg(long, global = true, default_value = "South")]
    pub viewpoint: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    Ask,
    Yes,
    No,
}

#[derive(Debug, Args)]
pub struct Confirmation {
    /// Answer yes to every confirmation.
    #[arg(long, conflicts_with = "assume_no")]
    pub assume_yes: bool,
    /// Answer no to every confirmation.
    #[arg(long)]
    pub assume_no: bool,
}

impl Confirmation {
    pub fn policy(&self) -> Policy {
        match (self.assume_yes, self.assume_no) {
            (true, _) => Policy::Yes,
            (_, true) => Policy::No,
            _ => Policy::Ask,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Resolve a query against the scene, symbolically or through the model.
    Ground(commands::ground::GroundArgs),
    /// Run prompt variants over the gold set and score them.
    Eval(commands::eval::EvalArgs),
    /// Turn a recipe into a restricted command program.
    Simplify(commands::simplify::SimplifyArgs),
    /// Ask where things are stored, verify the answers and record facts.
    Store(commands::store::StoreArgs),
    /// Run a command program against the kitchen.
    Exec(commands::exec::ExecArgs),
    /// Interactive queries and commands.
    Repl(commands::repl::ReplArgs),
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Ground(a) => commands::ground::run(&cli.global, a),
        Command::Eval(a) => commands::eval::run(&cli.global, a),
        Command::Simplify(a) => commands::simplify::run(&cli.global, a),
        Command::Store(a) => commands::store::run(&cli.global, a),
        Command::Exec(a) => commands::exec::run(&cli.global, a),
        Command::Repl(a) => commands::repl::run(&cli.global, a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(CONFIG);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if let Some(e) = &f.error {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(f.code)
        }
    }
}
