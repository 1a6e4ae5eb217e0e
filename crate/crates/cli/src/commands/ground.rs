use std::path::PathBuf;

use clap::Args;
use groundkit::eval_harness::{ask_variant, GoldSet};
use groundkit::grounding::{parse_query, resolve, GroundingError};
use groundkit::llm_bridge::PromptVariant;
use groundkit::neighbor_graph::build_graph;

use super::{client, scene, GOLD, KITCHEN_SCENE};
use crate::failure::{Failure, OrExit, CONFIG, NO_MATCH, PIPELINE};
use crate::Global;

#[derive(Debug, Args)]
pub struct GroundArgs {
    /// Query in the grounding language, e.g. "(select (category Sink))".
    #[arg(long, conflicts_with = "llm")]
    pub dsl: Option<String>,
    /// Ground plain-language expressions through the model.
    #[arg(long)]
    pub llm: bool,
    /// Prompt variant for --llm.
    #[arg(long, default_value = "A", requires = "llm")]
    pub variant: String,
    /// Expression to ground with --llm; repeatable. Defaults to the gold set.
    #[arg(long = "re", requires = "llm")]
    pub res: Vec<String>,
    /// Gold set supplying expressions when no --re is given.
    #[arg(long, default_value = GOLD)]
    pub gold: PathBuf,
}

pub fn run(global: &Global, args: &GroundArgs) -> Result<(), Failure> {
    match (&args.dsl, args.llm) {
        (Some(dsl), _) => symbolic(global, dsl),
        (None, true) => with_model(global, args),
        (None, false) => Err(Failure::msg(CONFIG, "give --dsl <QUERY> or --llm")),
    }
}

fn symbolic(global: &Global, dsl: &str) -> Result<(), Failure> {
    let query = parse_query(dsl).or_exit(CONFIG)?;
    let scene = scene(global, KITCHEN_SCENE)?;
    let graph = build_graph(&scene, &global.viewpoint).or_exit(CONFIG)?;
    let resolution = match resolve(&query, &scene, &graph) {
        Ok(r) => r,
        Err(e @ GroundingError::Unresolvable { .. }) => return Err(Failure::new(NO_MATCH, e)),
        Err(e) => return Err(Failure::new(PIPELINE, e)),
    };
    for id in &resolution.matches {
        println!("{id}");
    }
    for step in &resolution.trace {
        eprintln!("{}{} -> [{}]", "  ".repeat(step.depth), step.constraint, step.survivors.join(", "));
    }
    if resolution.ambiguous {
        eprintln!("ambiguous: {} equally ranked matches", resolution.matches.len());
    }
    if resolution.matches.is_empty() {
        return Err(Failure::msg(NO_MATCH, "no object matches"));
    }
    Ok(())
}

fn with_model(global: &Global, args: &GroundArgs) -> Result<(), Failure> {
    let variant = PromptVariant::by_label(&args.variant)
        .ok_or_else(|| Failure::msg(CONFIG, format!("unknown variant `{}`", args.variant)))?;
    let res = if args.res.is_empty() { GoldSet::load(&args.gold).or_exit(CONFIG)?.texts() } else { args.res.clone() };
    let scene = scene(global, KITCHEN_SCENE)?;
    let client = client(global)?;
    let answers = ask_variant(&variant, &scene, &global.viewpoint, &res, &client).or_exit(PIPELINE)?;
    let mut unanswered = 0;
    for (re, answer) in res.iter().zip(&answers) {
        match answer {
            Some(ids) if !ids.is_empty() => println!("{re} → {}", ids.join(", ")),
            _ => {
                unanswered += 1;
                println!("{re} → ?");
            }
        }
    }
    if unanswered > 0 {
        return Err(Failure::msg(NO_MATCH, format!("{unanswered} expression(s) got no usable answer")));
    }
    Ok(())
}
