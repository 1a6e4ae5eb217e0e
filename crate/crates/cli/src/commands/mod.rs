pub mod eval;
pub mod exec;
pub mod ground;
pub mod repl;
pub mod simplify;
pub mod store;

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use groundkit::llm_bridge::{CompletionClient, HttpTransport, LiveConfig, Transcript};
use groundkit::world_model::{load_scene, SceneModel};

use crate::failure::{Failure, OrExit, CONFIG};
use crate::{Global, Policy};

pub const KITCHEN_SCENE: &str = "fixtures/kitchen_scene.json";
pub const STORAGE_SCENE: &str = "fixtures/storage_scene.json";
pub const GOLD: &str = "fixtures/gold.json";
pub const DIFFICULTY: &str = "fixtures/difficulty.toml";
pub const SETUP: &str = "fixtures/kitchen_setup.toml";

pub fn scene(global: &Global, default: &str) -> Result<SceneModel, Failure> {
    let path = global.scene.clone().unwrap_or_else(|| PathBuf::from(default));
    load_scene(&path).or_exit(CONFIG)
}

/// The output directory, created on first use.
pub fn out_dir(global: &Global) -> Result<Option<&Path>, Failure> {
    match &global.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Failure::msg(CONFIG, format!("{}: {e}", dir.display())))?;
            Ok(Some(dir))
        }
        None => Ok(None),
    }
}

pub fn client(global: &Global) -> Result<CompletionClient, Failure> {
    if let Some(path) = &global.replay {
        return CompletionClient::replay_file(path).or_exit(CONFIG);
    }
    if !global.live {
        return Err(Failure::msg(CONFIG, "this command needs --replay <TRANSCRIPT> or --live"));
    }
    let Some(dir) = out_dir(global)? else {
        return Err(Failure::msg(CONFIG, "--live records a transcript and needs --out <DIR>"));
    };
    let config = LiveConfig::load(global.config.as_deref()).or_exit(CONFIG)?;
    let transcript = Transcript::open(dir.join("transcript.jsonl")).or_exit(CONFIG)?;
    Ok(CompletionClient::live(config, Box::new(HttpTransport), transcript))
}

pub fn read_lines(path: &Path) -> Result<Vec<String>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::msg(CONFIG, format!("{}: {e}", path.display())))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

/// Asks a yes/no question on stdout and reads the answer from `input`.
/// End of input counts as no.
pub fn confirm(policy: Policy, question: &str, input: &mut dyn BufRead) -> bool {
    match policy {
        Policy::Yes => true,
        Policy::No => false,
        Policy::Ask => {
            print!("{question} [y/n] ");
            let _ = std::io::stdout().flush();
            let mut answer = String::new();
            if input.read_line(&mut answer).unwrap_or(0) == 0 {
                println!();
                return false;
            }
            matches!(answer.trim().to_ascii_lowercase().as_str(), "y" | "yes")
        }
    }
}
