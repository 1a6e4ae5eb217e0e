use std::path::PathBuf;

use clap::Args;
use groundkit::eval_harness::{build_report, load_expected, run_variants, DifficultyModel, GoldSet};
use groundkit::llm_bridge::PromptVariant;

use super::{client, out_dir, scene, DIFFICULTY, GOLD, KITCHEN_SCENE};
use crate::failure::{Failure, OrExit, CONFIG, PIPELINE};
use crate::Global;

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Variants to run, e.g. A,C,H. Defaults to all eight.
    #[arg(long, value_delimiter = ',')]
    pub variants: Vec<String>,
    #[arg(long, default_value = GOLD)]
    pub gold: PathBuf,
    #[arg(long, default_value = DIFFICULTY)]
    pub difficulty: PathBuf,
    /// JSON map of variant to expected hit count; any difference fails the run.
    #[arg(long)]
    pub expected: Option<PathBuf>,
}

pub fn run(global: &Global, args: &EvalArgs) -> Result<(), Failure> {
    let variants = if args.variants.is_empty() {
        PromptVariant::standard()
    } else {
        args.variants
            .iter()
            .map(|l| PromptVariant::by_label(l).ok_or_else(|| Failure::msg(CONFIG, format!("unknown variant `{l}`"))))
            .collect::<Result<_, _>>()?
    };
    let gold = GoldSet::load(&args.gold).or_exit(CONFIG)?;
    let model = DifficultyModel::load(&args.difficulty).or_exit(CONFIG)?;
    let expected = args.expected.as_ref().map(load_expected).transpose().or_exit(CONFIG)?;
    let scene = scene(global, KITCHEN_SCENE)?;
    let out = out_dir(global)?;
    let client = client(global)?;

    let mut results = Vec::new();
    let mut failed = false;
    for outcome in run_variants(&variants, &scene, &global.viewpoint, &gold, &client) {
        match outcome {
            Ok(r) => results.push(r),
            Err(e) => {
                eprintln!("error: {e}");
                failed = true;
            }
        }
    }
    if results.is_empty() {
        return Err(Failure::quiet(PIPELINE));
    }
    let report = build_report(&results, &gold, &model).or_exit(PIPELINE)?;
    if let Some(dir) = out {
        report.emit(dir).or_exit(PIPELINE)?;
    }

    println!("variant  hits  accuracy");
    for (label, v) in &report.summary.variants {
        let note = if v.incomplete { "  (incomplete answer)" } else { "" };
        println!("{label:<8} {:>2}/{:<2} {:.2}{note}", v.hits, v.total, v.accuracy);
    }
    let t = &report.summary.threshold;
    println!("misses at difficulty >= {}: {}, below: {}", t.failure_threshold, t.misses_at_or_above, t.misses_below);

    if let Some(mut expected) = expected {
        expected.retain(|label, _| report.summary.variants.contains_key(label));
        for (label, want, got) in report.deviations(&expected) {
            eprintln!("variant {label}: expected {want} hits, got {}", got.map_or("none".into(), |g| g.to_string()));
            failed = true;
        }
    }
    if failed {
        return Err(Failure::quiet(PIPELINE));
    }
    Ok(())
}
