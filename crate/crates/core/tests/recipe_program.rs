use groundkit::cmd_lang::{parse_program, run_program, validate_program, ExecError, KitchenSetup, VerbTable};
use groundkit::world_model::load_scene;
use proptest::prelude::*;

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures");

fn program_text() -> String {
    std::fs::read_to_string(format!("{FIXTURES}/scrambled_eggs.cmds")).unwrap()
}

fn setup() -> KitchenSetup {
    KitchenSetup::load(format!("{FIXTURES}/kitchen_setup.toml")).unwrap()
}

#[test]
fn every_line_parses_and_prints_back() {
    let table = VerbTable::standard();
    let text = program_text();
    let cmds = parse_program(&text, &table).unwrap();
    assert_eq!(cmds.len(), 28);
    assert_eq!(cmds.iter().filter(|c| c.optional).count(), 2);
    for (cmd, line) in cmds.iter().zip(text.lines()) {
        assert_eq!(table.render(cmd), line);
        assert_eq!(&table.parse(&table.render(cmd)).unwrap(), cmd);
    }
}

#[test]
fn validates_cleanly_without_optional_steps() {
    let table = VerbTable::standard();
    let cmds = parse_program(&program_text(), &table).unwrap();
    let scene = load_scene(format!("{FIXTURES}/kitchen_scene.json")).unwrap();
    let report = validate_program(&cmds, &scene, &setup(), &table, true);
    assert!(report.errors.is_empty(), "{:?}", report.errors);
    assert!(report.warnings.is_empty(), "{:?}", report.warnings);
}

#[test]
fn runs_to_served_eggs() {
    let table = VerbTable::standard();
    let cmds = parse_program(&program_text(), &table).unwrap();
    let start = setup().initial_state();
    let (end, log) = run_program(&cmds, &start, true, &table).unwrap();
    assert_eq!(log.len(), 26);
    assert_eq!(end.describe("eggs"), "eggs: cooked, served");
    assert!(!end.object("stove").unwrap().on);
    assert_eq!(end.holding, None);
    // Same input, same result.
    assert_eq!(run_program(&cmds, &start, true, &table).unwrap(), (end, log));
}

#[test]
fn optional_milk_leaves_the_hand_full() {
    let table = VerbTable::standard();
    let cmds = parse_program(&program_text(), &table).unwrap();
    let err = run_program(&cmds, &setup().initial_state(), false, &table).unwrap_err();
    assert_eq!(err.line, 13);
    assert_eq!(err.error, ExecError::HandFull("milk".into()));
}

proptest! {
    #[test]
    fn random_command_sequences_are_deterministic(picks in prop::collection::vec(0usize..28, 0..40)) {
        let table = VerbTable::standard();
        let cmds = parse_program(&program_text(), &table).unwrap();
        let mut state = setup().initial_state();
        for i in picks {
            let a = groundkit::cmd_lang::execute(&cmds[i], &state, &table);
            let b = groundkit::cmd_lang::execute(&cmds[i], &state, &table);
            prop_assert_eq!(&a, &b);
            if let Ok(next) = a {
                if cmds[i].verb == groundkit::cmd_lang::Verb::PickUp {
                    prop_assert!(state.holding.is_none());
                }
                state = next;
            }
        }
    }
}
