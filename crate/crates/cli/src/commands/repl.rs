use std::io::{BufRead, IsTerminal, Write};
use std::path::PathBuf;

use clap::Args;
use groundkit::cmd_lang::{execute, KitchenSetup, VerbTable};
use groundkit::grounding::{parse_query, resolve};
use groundkit::neighbor_graph::build_graph;

use super::{confirm, scene, KITCHEN_SCENE, SETUP};
use crate::failure::{Failure, CONFIG};
use crate::{Confirmation, Global};

#[derive(Debug, Args)]
pub struct ReplArgs {
    #[arg(long, default_value = SETUP)]
    pub setup: PathBuf,
    #[command(flatten)]
    pub confirmation: Confirmation,
}

const HELP: &str = "\
(select ...)      ground a query
view NAME         switch viewpoint
state             show the kitchen state
help              this text
quit              leave
anything else     run it as a kitchen command";

pub fn run(global: &Global, args: &ReplArgs) -> Result<(), Failure> {
    let scene = scene(global, KITCHEN_SCENE)?;
    let setup = KitchenSetup::load(&args.setup).map_err(|e| Failure::msg(CONFIG, e))?;
    let table = VerbTable::standard();
    let policy = args.confirmation.policy();
    let mut state = setup.initial_state();
    let mut graph = build_graph(&scene, &global.viewpoint).map_err(|e| Failure::new(CONFIG, e))?;
    let interactive = std::io::stdin().is_terminal();
    let mut input = std::io::stdin().lock();

    loop {
        if interactive {
            print!("{}> ", graph.viewpoint);
            let _ = std::io::stdout().flush();
        }
        let mut line = String::new();
        if input.read_line(&mut line).unwrap_or(0) == 0 {
            break;
        }
        let line = line.trim();
        match line {
            "" => {}
            "quit" | "exit" => break,
            "help" => println!("{HELP}"),
            "state" => {
                for name in state.objects.keys() {
                    println!("{}", state.describe(name));
                }
                println!("holding: {}", state.holding.as_deref().unwrap_or("nothing"));
            }
            _ if line.starts_with('(') => match parse_query(line) {
                Ok(q) => match resolve(&q, &scene, &graph) {
                    Ok(r) if r.matches.is_empty() => println!("no match"),
                    Ok(r) => {
                        let tag = if r.ambiguous { " (ambiguous)" } else { "" };
                        println!("{}{tag}", r.matches.join(", "));
                    }
                    Err(e) => println!("error: {e}"),
                },
                Err(e) => println!("error: {e}"),
            },
            _ if line.starts_with("view ") => match build_graph(&scene, line[5..].trim()) {
                Ok(g) => graph = g,
                Err(e) => println!("error: {e}"),
            },
            _ => match table.parse(line) {
                Ok(cmd) => {
                    let rendered = table.render(&cmd);
                    if !confirm(policy, &format!("Run `{rendered}`?"), &mut input) {
                        println!("skipped");
                        continue;
                    }
                    match execute(&cmd, &state, &table) {
                        Ok(next) => {
                            state = next;
                            println!("ok [{}]", state.clock);
                        }
                        Err(e) => println!("error: {e}"),
                    }
                }
                Err(e) => println!("error: {e}"),
            },
        }
    }
    Ok(())
}
