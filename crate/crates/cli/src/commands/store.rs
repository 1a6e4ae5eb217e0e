use std::path::PathBuf;

use clap::Args;
use groundkit::knowledge::{commit_fact, verify_suggestion, FactStore, Verdict};
use groundkit::llm_bridge::{build_storage_prompt, parse_storage_response, StorageLine, StorageSuggestion};

use super::{client, confirm, out_dir, read_lines, scene, STORAGE_SCENE};
use crate::failure::{Failure, OrExit, CONFIG, PIPELINE, REJECTED};
use crate::{Confirmation, Global, Policy};

#[derive(Debug, Args)]
pub struct StoreArgs {
    /// Type classes, one per line.
    #[arg(long, default_value = "fixtures/storage_types.txt")]
    pub types: PathBuf,
    /// Expressions for the things to store, one per line.
    #[arg(long, default_value = "fixtures/storage_res.txt")]
    pub res: PathBuf,
    /// Fact journal to start from. It is read, never written.
    #[arg(long)]
    pub facts: Option<PathBuf>,
    #[command(flatten)]
    pub confirmation: Confirmation,
    /// Record declined suggestions as unconfirmed facts instead of dropping them.
    #[arg(long)]
    pub provisional: bool,
    /// Offer to replace confirmed facts that a suggestion contradicts.
    #[arg(long = "override")]
    pub override_confirmed: bool,
}

pub fn run(global: &Global, args: &StoreArgs) -> Result<(), Failure> {
    let types = read_lines(&args.types)?;
    let res = read_lines(&args.res)?;
    let scene = scene(global, STORAGE_SCENE)?;
    let out = out_dir(global)?;
    let mut store = match out {
        Some(dir) => FactStore::open(dir.join("facts.jsonl")).or_exit(CONFIG)?,
        None => FactStore::in_memory(),
    };
    if let Some(seed) = &args.facts {
        for a in FactStore::open(seed).or_exit(CONFIG)?.assertions() {
            store.assert(a.clone(), true).or_exit(PIPELINE)?;
        }
    }
    let client = client(global)?;
    let prompt = build_storage_prompt(&scene, &types, &res).or_exit(CONFIG)?;
    let response = client.complete(&prompt).or_exit(PIPELINE)?;

    let policy = args.confirmation.policy();
    let mut input = std::io::stdin().lock();
    let (mut rejected, mut failed) = (0, 0);
    for line in parse_storage_response(&response) {
        let s = match line {
            StorageLine::Suggestion(s) => s,
            StorageLine::Unparsed { line } => {
                eprintln!("warning: could not read `{line}`");
                continue;
            }
        };
        let head = format!("{}: {} -> {}", s.re_text, s.objects.join(", "), s.locations.join(", "));
        let verdict = match verify_suggestion(&s, &scene, &store) {
            Ok(v) => v,
            Err(e) => {
                println!("{head}: error: {e}");
                failed += 1;
                continue;
            }
        };
        let first = StorageSuggestion { locations: s.locations[..1].to_vec(), ..s.clone() };
        let outcome = match verdict {
            Verdict::Accept { reason } => format!("accepted, {reason}"),
            Verdict::NeedsConfirmation { .. } => {
                let question = format!("Store {} in {}?", s.objects.join(", "), first.locations[0]);
                if confirm(policy, &question, &mut input) {
                    commit_fact(&mut store, &first, &scene, true, false).or_exit(PIPELINE)?;
                    format!("stored in {}", first.locations[0])
                } else if args.provisional {
                    commit_fact(&mut store, &s, &scene, false, false).or_exit(PIPELINE)?;
                    "recorded provisionally".into()
                } else {
                    "skipped".into()
                }
            }
            Verdict::Reject { reason, conflict } => {
                let question = format!("Replace {conflict} with {}?", first.locations[0]);
                if args.override_confirmed && confirm(policy, &question, &mut input) {
                    commit_fact(&mut store, &first, &scene, true, true).or_exit(PIPELINE)?;
                    format!("overrode, now stored in {}", first.locations[0])
                } else {
                    rejected += 1;
                    format!("rejected, {reason}")
                }
            }
        };
        println!("{head}: {outcome}");
    }
    if out.is_some() {
        store.compact().or_exit(PIPELINE)?;
    }
    if failed > 0 {
        return Err(Failure::quiet(PIPELINE));
    }
    if rejected > 0 && policy != Policy::Ask {
        return Err(Failure::msg(REJECTED, format!("{rejected} suggestion(s) rejected")));
    }
    Ok(())
}
