use groundkit::grounding::{brute_oracle, parse_query, resolve, GroundingError};
use groundkit::neighbor_graph::build_graph;
use groundkit::world_model::load_scene;
use serde::Deserialize;

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures");

#[derive(Deserialize)]
struct Gold {
    id: String,
    correct: String,
    dsl: String,
}

#[test]
fn every_gold_expression_resolves_to_its_target() {
    let scene = load_scene(format!("{FIXTURES}/kitchen_scene.json")).unwrap();
    let graph = build_graph(&scene, "South").unwrap();
    let gold: Vec<Gold> =
        serde_json::from_str(&std::fs::read_to_string(format!("{FIXTURES}/gold.json")).unwrap()).unwrap();
    assert_eq!(gold.len(), 10);
    for g in gold {
        let q = parse_query(&g.dsl).unwrap();
        let r = resolve(&q, &scene, &graph).unwrap();
        assert_eq!(r.matches, vec![g.correct.clone()], "{}", g.id);
        assert!(!r.ambiguous);
        assert_eq!(brute_oracle(&q, &scene, "South").unwrap(), r.matches, "{}", g.id);
    }
}

#[test]
fn trace_shows_each_filter() {
    let scene = load_scene(format!("{FIXTURES}/kitchen_scene.json")).unwrap();
    let graph = build_graph(&scene, "South").unwrap();
    let q = parse_query("(select (category Cabinet) (rel below (select (category Sink))))").unwrap();
    let r = resolve(&q, &scene, &graph).unwrap();
    let top: Vec<&str> = r.trace.iter().filter(|t| t.depth == 0).map(|t| t.constraint.as_str()).collect();
    assert_eq!(top, ["(category Cabinet)", "(rel below (select (category Sink)))"]);
    assert_eq!(r.trace.last().unwrap().survivors, ["Cabinet12"]);
}

#[test]
fn missing_anchor_is_unresolvable() {
    let scene = load_scene(format!("{FIXTURES}/kitchen_scene.json")).unwrap();
    let graph = build_graph(&scene, "South").unwrap();
    let q = parse_query("(select (category Drawer) (rel next-to (select (category Oven))))").unwrap();
    let err = resolve(&q, &scene, &graph).unwrap_err();
    assert_eq!(err, GroundingError::Unresolvable { anchor: "(select (category Oven))".into() });
    assert_eq!(brute_oracle(&q, &scene, "South").unwrap_err(), err);
}

#[test]
fn facts_narrow_candidates() {
    let scene = load_scene(format!("{FIXTURES}/kitchen_scene.json")).unwrap();
    let graph = build_graph(&scene, "South").unwrap();
    let q = parse_query("(select (category Drawer) (fact contains silverware))").unwrap();
    assert_eq!(resolve(&q, &scene, &graph).unwrap().matches, ["Drawer30"]);
}
