use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ActionCommand, VerbTable};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectState {
    /// Container, surface or heater the object rests in or on.
    pub place: Option<String>,
    pub on: bool,
    pub cracked: bool,
    pub stirred: u32,
    /// Ticks spent on a running heater.
    pub heat: u32,
    /// Ticks spent inside a warm vessel.
    pub heated: u32,
    pub flags: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KitchenState {
    pub location: String,
    pub holding: Option<String>,
    pub objects: BTreeMap<String, ObjectState>,
    pub heaters: BTreeSet<String>,
    pub clock: u64,
}

impl KitchenState {
    pub fn object(&self, name: &str) -> Option<&ObjectState> {
        self.objects.get(&key(name))
    }

    pub fn has_flag(&self, name: &str, flag: &str) -> bool {
        self.object(name).is_some_and(|o| o.flags.contains(flag))
    }

    /// One-line summary such as `eggs: cooked, served`.
    pub fn describe(&self, name: &str) -> String {
        let flags: Vec<&str> =
            self.object(name).map(|o| o.flags.iter().map(String::as_str).collect()).unwrap_or_default();
        format!("{}: {}", key(name), if flags.is_empty() { "-".to_string() } else { flags.join(", ") })
    }

    fn obj(&mut self, name: &str) -> &mut ObjectState {
        self.objects.entry(key(name)).or_default()
    }

    fn tick(&mut self, table: &VerbTable) {
        self.clock += 1;
        let running: BTreeSet<String> =
            self.heaters.iter().filter(|h| self.objects.get(*h).is_some_and(|o| o.on)).cloned().collect();
        for o in self.objects.values_mut() {
            match &o.place {
                Some(p) if running.contains(p) => {
                    o.heat += 1;
                    if o.heat >= table.heat.warm_after {
                        o.flags.insert("warm".into());
                    }
                }
                _ => {
                    o.heat = 0;
                    o.flags.remove("warm");
                }
            }
        }
        let warm: BTreeSet<String> =
            self.objects.iter().filter(|(_, o)| o.flags.contains("warm")).map(|(n, _)| n.clone()).collect();
        for (name, o) in self.objects.iter_mut() {
            if !o.place.as_ref().is_some_and(|p| warm.contains(p)) {
                continue;
            }
            o.heated += 1;
            for rule in &table.heat.rules {
                if rule.objects.iter().any(|r| key(r) == *name)
                    && o.heated >= rule.ticks
                    && o.stirred >= rule.min_stirred
                {
                    o.flags.insert(rule.flag.clone());
                }
            }
        }
    }
}

fn key(name: &str) -> String {
    name.trim().to_lowercase()
}

/// Initial kitchen and the nouns a program may use.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KitchenSetup {
    pub location: String,
    #[serde(default)]
    pub heaters: Vec<String>,
    /// Object name to where it starts; empty means nowhere in particular.
    pub objects: BTreeMap<String, String>,
    /// Program noun to scene category.
    #[serde(default)]
    pub aliases: BTreeMap<String, String>,
}

impl KitchenSetup {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, String> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn initial_state(&self) -> KitchenState {
        KitchenState {
            location: self.location.clone(),
            holding: None,
            objects: self
                .objects
                .iter()
                .map(|(name, place)| {
                    let place = (!place.is_empty()).then(|| key(place));
                    (key(name), ObjectState { place, ..Default::default() })
                })
                .collect(),
            heaters: self.heaters.iter().map(|h| key(h)).collect(),
            clock: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("hands are full (holding {0})")]
    HandFull(String),
    #[error("not holding {expected}")]
    NotHolding { expected: String, holding: Option<String> },
    #[error("{0} is already on")]
    AlreadyOn(String),
    #[error("{0} is already off")]
    AlreadyOff(String),
    #[error("{0} is neither held nor in a held container")]
    NotAvailable(String),
    #[error("{dish} is not ready: needs {missing}")]
    NotReady { dish: String, missing: String },
    #[error("{0} was already served")]
    AlreadyServed(String),
    #[error("`{condition}` did not happen within {ticks} ticks")]
    ConditionNeverMet { condition: String, ticks: u64 },
    #[error("bad table token `{0}`")]
    BadToken(String),
}

fn arg<'a>(cmd: &'a ActionCommand, tok: &str) -> Result<&'a str, ExecError> {
    tok.strip_prefix('$')
        .and_then(|n| n.parse::<usize>().ok())
        .and_then(|i| cmd.args.get(i))
        .map(String::as_str)
        .ok_or_else(|| ExecError::BadToken(tok.to_string()))
}

fn check(token: &str, cmd: &ActionCommand, s: &KitchenState, table: &VerbTable) -> Result<(), ExecError> {
    let parts: Vec<&str> = token.split_whitespace().collect();
    match parts.as_slice() {
        ["hand_empty"] => match &s.holding {
            Some(h) => Err(ExecError::HandFull(h.clone())),
            None => Ok(()),
        },
        ["holding", a] => {
            let x = key(arg(cmd, a)?);
            if s.holding.as_deref() == Some(x.as_str()) {
                Ok(())
            } else {
                Err(ExecError::NotHolding { expected: x, holding: s.holding.clone() })
            }
        }
        ["off", a] => {
            let x = arg(cmd, a)?;
            if s.object(x).is_some_and(|o| o.on) {
                Err(ExecError::AlreadyOn(key(x)))
            } else {
                Ok(())
            }
        }
        ["on", a] => {
            let x = arg(cmd, a)?;
            if s.object(x).is_some_and(|o| o.on) {
                Ok(())
            } else {
                Err(ExecError::AlreadyOff(key(x)))
            }
        }
        ["has", a] => {
            let x = key(arg(cmd, a)?);
            let held = s.holding.as_deref();
            let inside_held = held.is_some() && s.objects.get(&x).and_then(|o| o.place.as_deref()) == held;
            if held == Some(x.as_str()) || inside_held {
                Ok(())
            } else {
                Err(ExecError::NotAvailable(x))
            }
        }
        ["ready", a] => {
            let x = key(arg(cmd, a)?);
            let missing: Vec<&str> =
                table.dishes.get(&x).into_iter().flatten().filter(|f| !s.has_flag(&x, f)).map(String::as_str).collect();
            if missing.is_empty() {
                Ok(())
            } else {
                Err(ExecError::NotReady { dish: x, missing: missing.join(", ") })
            }
        }
        ["unserved", a] => {
            let x = arg(cmd, a)?;
            if s.has_flag(x, "served") {
                Err(ExecError::AlreadyServed(key(x)))
            } else {
                Ok(())
            }
        }
        _ => Err(ExecError::BadToken(token.to_string())),
    }
}

fn leading_count(text: &str) -> u64 {
    text.split_whitespace().next().and_then(|w| w.parse().ok()).unwrap_or(1).max(1)
}

/// Applies one command, returning the next state. The input is untouched.
pub fn execute(cmd: &ActionCommand, state: &KitchenState, table: &VerbTable) -> Result<KitchenState, ExecError> {
    let spec = table.spec(cmd.verb);
    for token in &spec.requires {
        check(token, cmd, state, table)?;
    }
    let mut s = state.clone();
    let mut extra_ticks = 0;
    let mut until: Option<String> = None;
    for token in &spec.effects {
        let parts: Vec<&str> = token.split_whitespace().collect();
        match parts.as_slice() {
            ["take", a] => s.obj(arg(cmd, a)?).place = None,
            ["hold", a] => s.holding = Some(key(arg(cmd, a)?)),
            ["release"] => s.holding = None,
            ["place", a, b] => {
                let target = key(arg(cmd, b)?);
                s.obj(arg(cmd, a)?).place = Some(target);
            }
            ["goto", a] => s.location = key(arg(cmd, a)?),
            ["switch_on", a] => s.obj(arg(cmd, a)?).on = true,
            ["switch_off", a] => s.obj(arg(cmd, a)?).on = false,
            ["crack", a] => s.obj(arg(cmd, a)?).cracked = true,
            ["stir", a] => s.obj(arg(cmd, a)?).stirred += 1,
            ["serve", a] => {
                s.obj(arg(cmd, a)?).flags.insert("served".into());
            }
            ["delay", a] => extra_ticks = leading_count(arg(cmd, a)?).min(table.timing.max_wait) - 1,
            ["until", a] => until = Some(key(arg(cmd, a)?)),
            _ => return Err(ExecError::BadToken(token.clone())),
        }
    }
    s.tick(table);
    for _ in 0..extra_ticks {
        s.tick(table);
    }
    if let Some(cond) = until {
        match table.conditions.get(&cond) {
            Some((obj, flag)) => {
                let mut spent = 1;
                while !s.has_flag(obj, flag) {
                    if spent >= table.timing.max_wait {
                        return Err(ExecError::ConditionNeverMet { condition: cond, ticks: spent });
                    }
                    s.tick(table);
                    spent += 1;
                }
            }
            None => {
                for _ in 1..table.timing.unmodeled_wait {
                    s.tick(table);
                }
            }
        }
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based position in the program.
    pub line: usize,
    pub command: String,
    pub clock: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {error}")]
pub struct RunError {
    pub line: usize,
    pub error: ExecError,
    pub log: Vec<StepRecord>,
}

/// Runs commands in order, stopping at the first failure.
pub fn run_program(
    cmds: &[ActionCommand],
    state: &KitchenState,
    skip_optional: bool,
    table: &VerbTable,
) -> Result<(KitchenState, Vec<StepRecord>), RunError> {
    let mut s = state.clone();
    let mut log = Vec::new();
    for (i, cmd) in cmds.iter().enumerate() {
        if skip_optional && cmd.optional {
            continue;
        }
        s = execute(cmd, &s, table).map_err(|error| RunError { line: i + 1, error, log: log.clone() })?;
        log.push(StepRecord { line: i + 1, command: table.render(cmd), clock: s.clock });
    }
    Ok((s, log))
}
