//! Regenerates `fixtures/paper.transcript` and `fixtures/golden/`.
//!
//! The transcript holds fixed answers for the eight grounding variants, the
//! storage prompt and the recipe prompt, keyed by the digests of the prompts
//! built from the fixtures. Run after any change to prompt wording:
//!
//!     cargo run -p groundkit --example record_fixtures

use std::path::Path;

use groundkit::cmd_lang::VerbTable;
use groundkit::eval_harness::GoldSet;
use groundkit::llm_bridge::{
    build_grounding_prompt, build_simplify_prompt, build_storage_prompt, PromptDoc, PromptVariant, Transcript,
    TranscriptEntry,
};
use groundkit::world_model::{anonymize, load_scene};

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures");
const RECORDED_AT: u64 = 1_700_000_000;

/// Answer suffixes per variant, in expression order.
const ANSWERS: [(&str, [u32; 10]); 8] = [
    ("A", [14, 8, 30, 29, 27, 9, 12, 24, 31, 7]),
    ("B", [14, 8, 30, 29, 23, 13, 12, 24, 31, 8]),
    ("C", [15, 7, 30, 29, 27, 9, 12, 26, 31, 8]),
    ("D", [15, 7, 30, 29, 23, 9, 12, 26, 31, 8]),
    ("E", [14, 7, 30, 29, 27, 9, 12, 26, 31, 8]),
    ("F", [15, 7, 30, 29, 27, 9, 12, 26, 31, 8]),
    ("G", [14, 8, 30, 29, 23, 13, 12, 28, 31, 14]),
    ("H", [14, 8, 30, 29, 23, 13, 12, 24, 27, 7]),
];

fn full_id(suffix: u32) -> String {
    let category = if suffix < 20 { "Cabinet" } else { "Drawer" };
    format!("{category}{suffix}")
}

fn read(name: &str) -> String {
    std::fs::read_to_string(format!("{FIXTURES}/{name}")).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn lines(name: &str) -> Vec<String> {
    read(name).lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect()
}

/// Each variant gets a slightly different answer layout so replay exercises
/// the parser's tolerance for list markers, separators and chatter.
fn grounding_response(label: &str, answers: &[(String, String)]) -> String {
    let mut out = String::new();
    if matches!(label, "E" | "H") {
        out.push_str("Sure! Here are the groundings for each referring expression.\n\n");
    }
    for (i, (re, id)) in answers.iter().enumerate() {
        let line = match label {
            "B" | "H" => format!("{}. {re} → {id}", i + 1),
            "C" => format!("{re}: {id}"),
            "D" => format!("- {re} -> {id}"),
            "F" => format!("{re} - {id}"),
            _ => format!("{re} → {id}"),
        };
        out.push_str(&line);
        out.push('\n');
    }
    if matches!(label, "E" | "H") {
        out.push_str("\nLet me know if you need anything else.\n");
    }
    out
}

fn main() {
    let scene = load_scene(format!("{FIXTURES}/kitchen_scene.json")).expect("kitchen scene");
    let (_, mapping) = anonymize(&scene).expect("anonymize");
    let gold = GoldSet::load(format!("{FIXTURES}/gold.json")).expect("gold set");
    let texts = gold.texts();

    let mut recorded: Vec<(PromptDoc, String)> = Vec::new();
    for (label, suffixes) in ANSWERS {
        let variant = PromptVariant::by_label(label).expect("standard variant");
        let prompt = build_grounding_prompt(&scene, "South", &variant, &texts).expect("grounding prompt");
        let answers: Vec<(String, String)> = texts
            .iter()
            .zip(suffixes)
            .map(|(re, s)| {
                let id = full_id(s);
                let shown =
                    if variant.anonymized() { mapping.anonymized(&id).expect("mapped id").to_string() } else { id };
                (re.clone(), shown)
            })
            .collect();
        let response = grounding_response(label, &answers);
        recorded.push((prompt, response));
    }

    let storage_scene = load_scene(format!("{FIXTURES}/storage_scene.json")).expect("storage scene");
    let storage = build_storage_prompt(&storage_scene, &lines("storage_types.txt"), &lines("storage_res.txt"))
        .expect("storage prompt");
    recorded.push((storage.clone(), read("storage_response.txt")));

    let table = VerbTable::standard();
    let simplify = build_simplify_prompt(&table.templates(), &read("scrambled_eggs.txt"), "scrambled eggs")
        .expect("simplify prompt");
    recorded.push((simplify.clone(), read("scrambled_eggs.cmds")));

    let path = Path::new(FIXTURES).join("paper.transcript");
    if path.exists() {
        std::fs::remove_file(&path).expect("remove old transcript");
    }
    let mut transcript = Transcript::open(&path).expect("transcript");
    for (prompt, response) in &recorded {
        transcript
            .append(TranscriptEntry {
                digest: prompt.inputs_digest.clone(),
                prompt: prompt.text.clone(),
                response: response.clone(),
                timestamp: RECORDED_AT,
                label: prompt.label.clone(),
            })
            .expect("append");
    }

    let golden = Path::new(FIXTURES).join("golden");
    std::fs::create_dir_all(&golden).expect("golden dir");
    for (label, (prompt, _)) in ANSWERS.iter().map(|(l, _)| *l).zip(&recorded) {
        if matches!(label, "A" | "E" | "H") {
            std::fs::write(golden.join(format!("grounding_{label}.txt")), &prompt.text).expect("write golden");
        }
    }
    std::fs::write(golden.join("storage.txt"), &storage.text).expect("write golden");
    std::fs::write(golden.join("simplify.txt"), &simplify.text).expect("write golden");
    println!("recorded {} responses to {}", recorded.len(), path.display());
}
