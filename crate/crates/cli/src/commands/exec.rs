use std::path::PathBuf;

use clap::Args;
use groundkit::cmd_lang::{parse_program, run_program, validate_program, KitchenSetup, VerbTable};

use super::{scene, KITCHEN_SCENE, SETUP};
use crate::failure::{Failure, CONFIG, PIPELINE};
use crate::Global;

#[derive(Debug, Args)]
pub struct ExecArgs {
    /// Command program, one command per line.
    #[arg(long)]
    pub program: PathBuf,
    #[arg(long, default_value = SETUP)]
    pub setup: PathBuf,
    /// Leave out steps marked optional.
    #[arg(long)]
    pub skip_optional: bool,
    /// Print each executed step.
    #[arg(long)]
    pub verbose: bool,
}

pub fn run(global: &Global, args: &ExecArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.program)
        .map_err(|e| Failure::msg(CONFIG, format!("{}: {e}", args.program.display())))?;
    let table = VerbTable::standard();
    let cmds = parse_program(&text, &table)
        .map_err(|(line, e)| Failure::msg(PIPELINE, format!("{}:{line}: {e}", args.program.display())))?;
    let setup = KitchenSetup::load(&args.setup).map_err(|e| Failure::msg(CONFIG, e))?;
    if global.scene.is_some() {
        let scene = scene(global, KITCHEN_SCENE)?;
        let report = validate_program(&cmds, &scene, &setup, &table, args.skip_optional);
        for w in &report.warnings {
            eprintln!("warning: line {}: {}", w.line, w.message);
        }
    }

    match run_program(&cmds, &setup.initial_state(), args.skip_optional, &table) {
        Ok((end, log)) => {
            if args.verbose {
                for step in &log {
                    println!("[{:>3}] {}", step.clock, step.command);
                }
            }
            for name in end.objects.keys() {
                println!("{}", end.describe(name));
            }
            println!("holding: {}", end.holding.as_deref().unwrap_or("nothing"));
            println!("location: {}", end.location);
            Ok(())
        }
        Err(e) => {
            if args.verbose {
                for step in &e.log {
                    println!("[{:>3}] {}", step.clock, step.command);
                }
            }
            Err(Failure::new(PIPELINE, e))
        }
    }
}
