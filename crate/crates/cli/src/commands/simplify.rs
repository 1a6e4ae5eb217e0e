use std::path::PathBuf;

use clap::Args;
use groundkit::cmd_lang::{parse_program, validate_program, KitchenSetup, VerbTable};
use groundkit::llm_bridge::build_simplify_prompt;

use super::{client, out_dir, scene, KITCHEN_SCENE, SETUP};
use crate::failure::{Failure, OrExit, CONFIG, PIPELINE};
use crate::Global;

#[derive(Debug, Args)]
pub struct SimplifyArgs {
    /// Recipe text with a `Steps:` section.
    #[arg(long)]
    pub recipe: PathBuf,
    /// Dish name used in the prompt. Defaults to the recipe file name.
    #[arg(long)]
    pub dish: Option<String>,
    /// Kitchen the program is validated against.
    #[arg(long, default_value = SETUP)]
    pub setup: PathBuf,
    /// Leave out optional steps when validating.
    #[arg(long)]
    pub skip_optional: bool,
}

pub fn run(global: &Global, args: &SimplifyArgs) -> Result<(), Failure> {
    let recipe = std::fs::read_to_string(&args.recipe)
        .map_err(|e| Failure::msg(CONFIG, format!("{}: {e}", args.recipe.display())))?;
    let stem = args.recipe.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let dish = args.dish.clone().unwrap_or_else(|| stem.replace(['_', '-'], " "));
    let setup = KitchenSetup::load(&args.setup).map_err(|e| Failure::msg(CONFIG, e))?;
    let scene = scene(global, KITCHEN_SCENE)?;
    let table = VerbTable::standard();
    let out = out_dir(global)?;
    let client = client(global)?;

    let prompt = build_simplify_prompt(&table.templates(), &recipe, &dish).or_exit(CONFIG)?;
    let response = client.complete(&prompt).or_exit(PIPELINE)?;
    let cmds = parse_program(&response, &table)
        .map_err(|(line, e)| Failure::msg(PIPELINE, format!("response line {line}: {e}")))?;
    let program: String = cmds.iter().map(|c| table.render(c) + "\n").collect();
    match out {
        Some(dir) => {
            let path = dir.join(format!("{}.cmds", if stem.is_empty() { "program" } else { &stem }));
            std::fs::write(&path, &program).map_err(|e| Failure::msg(PIPELINE, format!("{}: {e}", path.display())))?;
            eprintln!("wrote {} commands to {}", cmds.len(), path.display());
        }
        None => print!("{program}"),
    }

    let report = validate_program(&cmds, &scene, &setup, &table, args.skip_optional);
    for w in &report.warnings {
        eprintln!("warning: line {}: {}", w.line, w.message);
    }
    for e in &report.errors {
        eprintln!("error: line {}: {}", e.line, e.message);
    }
    if !report.errors.is_empty() {
        return Err(Failure::quiet(PIPELINE));
    }
    Ok(())
}
