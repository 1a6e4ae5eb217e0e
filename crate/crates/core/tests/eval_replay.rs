use groundkit::eval_harness::{
    build_report, load_expected, run_variant, run_variants, DifficultyModel, GoldSet, VariantResult,
};
use groundkit::llm_bridge::{CompletionClient, PromptVariant, Transcript, TranscriptEntry};
use groundkit::world_model::{load_scene, SceneModel};

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures");

fn scene() -> SceneModel {
    load_scene(format!("{FIXTURES}/kitchen_scene.json")).unwrap()
}

fn gold() -> GoldSet {
    GoldSet::load(format!("{FIXTURES}/gold.json")).unwrap()
}

fn recorded() -> CompletionClient {
    CompletionClient::replay_file(format!("{FIXTURES}/paper.transcript")).unwrap()
}

fn run_all() -> Vec<VariantResult> {
    run_variants(&PromptVariant::standard(), &scene(), "South", &gold(), &recorded())
        .into_iter()
        .map(Result::unwrap)
        .collect()
}

fn suffixes(r: &VariantResult) -> Vec<String> {
    r.predictions.iter().map(|p| p.predicted.join(";").trim_start_matches(char::is_alphabetic).to_string()).collect()
}

#[test]
fn recorded_answers_line_up_with_expressions() {
    let results = run_all();
    let a = &results[0];
    assert!(!a.incomplete);
    assert_eq!(suffixes(a), ["14", "8", "30", "29", "27", "9", "12", "24", "31", "7"]);
    let h = &results[7];
    assert_eq!(h.label, "H");
    assert_eq!(h.predictions[5].predicted, ["Cabinet13"]);
    assert_eq!(suffixes(h), ["14", "8", "30", "29", "23", "13", "12", "24", "27", "7"]);
}

#[test]
fn full_report_matches_expected_counts_and_is_stable() {
    let model = DifficultyModel::load(format!("{FIXTURES}/difficulty.toml")).unwrap();
    let first = build_report(&run_all(), &gold(), &model).unwrap();
    let second = build_report(&run_all(), &gold(), &model).unwrap();
    assert_eq!(first.to_csv().unwrap(), second.to_csv().unwrap());
    assert_eq!(first.summary_json(), second.summary_json());
    assert_eq!(first.rows.len(), 80);
    let expected = load_expected(format!("{FIXTURES}/expected.json")).unwrap();
    assert!(first.deviations(&expected).is_empty(), "{:?}", first.deviations(&expected));
    let t = &first.summary.threshold;
    assert_eq!((t.misses_at_or_above, t.misses_below), (19, 6));
    assert_eq!((t.hits_at_or_above, t.hits_below), (25, 30));
    assert_eq!(t.lowest_missed_difficulty, Some(8));
}

#[test]
fn correct_answers_score_perfectly() {
    let gold = gold();
    let scene = scene();
    let variant = PromptVariant::by_label("A").unwrap();
    let prompt = groundkit::llm_bridge::build_grounding_prompt(&scene, "South", &variant, &gold.texts()).unwrap();
    let response: String = gold.entries.iter().map(|g| format!("{} → {}\n", g.text, g.correct)).collect();
    let mut t = Transcript::in_memory();
    t.append(TranscriptEntry {
        digest: prompt.inputs_digest,
        prompt: prompt.text,
        response,
        timestamp: 0,
        label: None,
    })
    .unwrap();
    let result = run_variant(&variant, &scene, "South", &gold, &CompletionClient::replay(t)).unwrap();
    let model = DifficultyModel::load(format!("{FIXTURES}/difficulty.toml")).unwrap();
    let report = build_report(&[result], &gold, &model).unwrap();
    assert_eq!(report.rows.len(), 10);
    assert_eq!(report.summary.variants["A"].hits, 10);
}

#[test]
fn shuffled_and_chatty_answers_fall_back_to_text_matching() {
    let gold = gold();
    let scene = scene();
    let variant = PromptVariant::by_label("B").unwrap();
    let prompt = groundkit::llm_bridge::build_grounding_prompt(&scene, "South", &variant, &gold.texts()).unwrap();
    let mut response = String::from("Here you go:\n");
    for g in gold.entries.iter().skip(1).rev() {
        response.push_str(&format!("\"{}\" -> {}\n", g.text.to_uppercase(), g.correct));
    }
    response.push_str("the high cabinet to the left of the microwave. → no idea\n");
    let mut t = Transcript::in_memory();
    t.append(TranscriptEntry {
        digest: prompt.inputs_digest,
        prompt: prompt.text,
        response,
        timestamp: 0,
        label: None,
    })
    .unwrap();
    let result = run_variant(&variant, &scene, "South", &gold, &CompletionClient::replay(t)).unwrap();
    assert!(result.incomplete);
    assert!(result.predictions[0].unparsed);
    assert!(result.predictions[1..].iter().zip(&gold.entries[1..]).all(|(p, g)| p.predicted == [g.correct.clone()]));
}

#[test]
fn missing_recording_is_reported_per_variant() {
    let empty = CompletionClient::replay(Transcript::in_memory());
    let out = run_variants(&PromptVariant::standard()[..2], &scene(), "South", &gold(), &empty);
    assert_eq!(out.len(), 2);
    assert!(out.iter().all(|r| r.is_err()));
}
