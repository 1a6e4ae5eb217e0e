use groundkit::knowledge::{commit_fact, verify_suggestion, Assertion, FactStore, Provenance, Verdict, STORAGE_KEY};
use groundkit::llm_bridge::{parse_storage_response, StorageLine, StorageSuggestion};
use groundkit::world_model::{load_scene, SceneModel};
use proptest::prelude::*;

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures");

fn scene() -> SceneModel {
    load_scene(format!("{FIXTURES}/storage_scene.json")).unwrap()
}

fn suggestions() -> Vec<StorageSuggestion> {
    let text = std::fs::read_to_string(format!("{FIXTURES}/storage_response.txt")).unwrap();
    parse_storage_response(&text)
        .into_iter()
        .map(|l| match l {
            StorageLine::Suggestion(s) => s,
            StorageLine::Unparsed { line } => panic!("unparsed: {line}"),
        })
        .collect()
}

fn find<'a>(all: &'a [StorageSuggestion], re: &str) -> &'a StorageSuggestion {
    all.iter().find(|s| s.re_text == re).unwrap()
}

#[test]
fn recorded_response_parses_fully() {
    let all = suggestions();
    assert_eq!(all.len(), 12);
    let fork = find(&all, "a fork");
    assert_eq!(fork.objects, ["object39"]);
    let drawers: Vec<String> = (27..=35).map(|n| format!("object{n}")).collect();
    assert_eq!(fork.locations, drawers);
    assert_eq!(fork.type_class, Some(3));
    assert_eq!(find(&all, "potatoes").objects, ["object54", "object55"]);
    assert_eq!(find(&all, "something to slice the bread").objects, ["object44"]);
    let vase = find(&all, "a vase");
    assert_eq!(vase.locations.len(), 3 + 9);
    let scene = scene();
    for s in &all {
        for id in s.objects.iter().chain(&s.locations) {
            assert!(scene.contains_id(id), "{id}");
        }
    }
}

#[test]
fn verification_against_known_facts() {
    let all = suggestions();
    let scene = scene();
    let mut store = FactStore::in_memory();
    store
        .assert(
            Assertion {
                object: "potato".into(),
                key: STORAGE_KEY.into(),
                value: "cabinet".into(),
                provenance: Provenance::Human,
                confirmed: true,
            },
            false,
        )
        .unwrap();
    let v = verify_suggestion(find(&all, "potatoes"), &scene, &store).unwrap();
    assert!(matches!(v, Verdict::Reject { ref conflict, .. } if conflict.object == "potato"), "{v:?}");
    let v = verify_suggestion(find(&all, "my favorite plant"), &scene, &store).unwrap();
    assert!(matches!(v, Verdict::NeedsConfirmation { .. }));
}

fn commit_op() -> impl Strategy<Value = (usize, usize, bool, bool)> {
    (0usize..3, 0usize..4, any::<bool>(), any::<bool>())
}

proptest! {
    #[test]
    fn one_confirmed_value_per_key(ops in prop::collection::vec(commit_op(), 1..30)) {
        let scene = scene();
        let objects = ["object39", "object6", "object66"];
        let places = ["object27", "object28", "object7", "object58"];
        let mut store = FactStore::in_memory();
        for (o, p, confirmed, force) in ops {
            let s = StorageSuggestion {
                re_text: "x".into(),
                objects: vec![objects[o].into()],
                locations: vec![places[p].into()],
                type_class: None,
            };
            let _ = commit_fact(&mut store, &s, &scene, confirmed, force);
            if confirmed && commit_fact(&mut store, &s, &scene, true, true).is_ok() {
                let accepted = matches!(verify_suggestion(&s, &scene, &store).unwrap(), Verdict::Accept { .. });
                prop_assert!(accepted);
            }
            for obj in objects {
                let n = store.values(obj, STORAGE_KEY).iter().filter(|a| a.confirmed).count();
                prop_assert!(n <= 1);
            }
        }
    }
}
