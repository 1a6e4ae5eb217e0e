use serde::{Deserialize, Serialize};

use super::exec::{execute, KitchenSetup};
use super::{ActionCommand, Verb, VerbTable};
use crate::world_model::SceneModel;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    /// 1-based position in the program.
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Sequencing violations: the command could not run in the simulated kitchen.
    pub errors: Vec<Issue>,
    /// Unknown nouns and conditions the executor cannot observe.
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.errors.is_empty()
    }
}

fn known_noun(noun: &str, scene: &SceneModel, setup: &KitchenSetup) -> bool {
    let n = noun.trim().to_lowercase();
    setup.objects.keys().any(|k| k.to_lowercase() == n)
        || setup.aliases.keys().any(|k| k.to_lowercase() == n)
        || scene.objects.iter().any(|o| o.id.to_lowercase() == n || o.category.to_lowercase() == n)
}

/// Dry-runs a program, collecting problems instead of stopping at the first.
/// A failed command leaves the simulated state unchanged.
pub fn validate_program(
    cmds: &[ActionCommand],
    scene: &SceneModel,
    setup: &KitchenSetup,
    table: &VerbTable,
    skip_optional: bool,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut state = setup.initial_state();
    for (i, cmd) in cmds.iter().enumerate() {
        let line = i + 1;
        if skip_optional && cmd.optional {
            continue;
        }
        match cmd.verb {
            Verb::WaitFor => {}
            Verb::WaitUntil => {
                let cond = cmd.args[0].to_lowercase();
                if !table.conditions.contains_key(&cond) {
                    report.warnings.push(Issue {
                        line,
                        message: format!("condition `{}` is not modeled; waiting a fixed time", cmd.args[0]),
                    });
                }
            }
            _ => {
                for a in &cmd.args {
                    if !known_noun(a, scene, setup) {
                        report.warnings.push(Issue { line, message: format!("unknown noun `{a}`") });
                    }
                }
            }
        }
        match execute(cmd, &state, table) {
            Ok(next) => state = next,
            Err(e) => report.errors.push(Issue { line, message: e.to_string() }),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmd_lang::parse_command;

    fn check(lines: &[&str]) -> ValidationReport {
        let setup = KitchenSetup::from_toml(
            "location = \"counter\"\n[objects]\neggs = \"counter\"\nbowl = \"counter\"\n[aliases]\ncounter = \"CounterTop\"\n",
        )
        .unwrap();
        let scene = SceneModel { counter_height: 0.9, objects: vec![], viewpoints: vec![] };
        let cmds: Vec<_> = lines.iter().map(|l| parse_command(l).unwrap()).collect();
        validate_program(&cmds, &scene, &setup, &VerbTable::standard(), true)
    }

    #[test]
    fn put_down_with_empty_hand_is_an_error() {
        let r = check(&["Put down eggs in bowl."]);
        assert_eq!(r.errors.len(), 1);
        assert_eq!(r.errors[0].line, 1);
    }

    #[test]
    fn unknown_noun_is_a_warning() {
        let r = check(&["Go to unicorn."]);
        assert!(r.is_clean());
        assert_eq!(r.warnings[0].message, "unknown noun `unicorn`");
    }

    #[test]
    fn unmodeled_wait_is_a_warning() {
        let r = check(&["Wait until the toast pops."]);
        assert!(r.is_clean());
        assert_eq!(r.warnings.len(), 1);
    }
}
