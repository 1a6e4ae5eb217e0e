//! Runs prompt variants over the gold expressions and scores the answers.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::llm_bridge::{
    build_grounding_prompt, parse_grounding_response, BridgeError, CompletionClient, GroundingLine, PromptVariant,
};
use crate::world_model::{anonymize, SceneModel};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{path}: {message}")]
    Load { path: String, message: String },
    #[error("unknown expression `{0}`")]
    UnknownRe(String),
    #[error("unknown variant `{0}`")]
    UnknownVariant(String),
    #[error("variant {variant}: {source}")]
    Bridge { variant: String, source: BridgeError },
    #[error("report: {0}")]
    Report(String),
}

fn load_text(path: &Path) -> Result<String, EvalError> {
    std::fs::read_to_string(path)
        .map_err(|e| EvalError::Load { path: path.display().to_string(), message: e.to_string() })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldEntry {
    pub id: String,
    pub text: String,
    pub challenges: Vec<String>,
    pub correct: String,
    pub dsl: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldSet {
    pub entries: Vec<GoldEntry>,
}

impl GoldSet {
    pub fn from_json(text: &str) -> Result<Self, String> {
        let entries: Vec<GoldEntry> = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if entries.is_empty() {
            return Err("gold set is empty".into());
        }
        let ids: BTreeSet<&str> = entries.iter().map(|e| e.id.as_str()).collect();
        if ids.len() != entries.len() {
            return Err("duplicate expression id".into());
        }
        Ok(GoldSet { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EvalError> {
        let path = path.as_ref();
        Self::from_json(&load_text(path)?)
            .map_err(|message| EvalError::Load { path: path.display().to_string(), message })
    }

    pub fn texts(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.text.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifficultyModel {
    pub failure_threshold: u32,
    pub re_base: BTreeMap<String, u32>,
    pub variant_bonus: BTreeMap<String, u32>,
}

impl DifficultyModel {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EvalError> {
        let path = path.as_ref();
        Self::from_toml(&load_text(path)?)
            .map_err(|message| EvalError::Load { path: path.display().to_string(), message })
    }

    pub fn difficulty(&self, re_id: &str, variant: &str) -> Result<u32, EvalError> {
        let base = self.re_base.get(re_id).ok_or_else(|| EvalError::UnknownRe(re_id.into()))?;
        let bonus = self.variant_bonus.get(variant).ok_or_else(|| EvalError::UnknownVariant(variant.into()))?;
        Ok(base + bonus)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Prediction {
    pub re_id: String,
    /// Meaningful ids, as answered.
    pub predicted: Vec<String>,
    /// The answer line was missing or had no recognizable id.
    pub unparsed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantResult {
    pub label: String,
    pub predictions: Vec<Prediction>,
    pub incomplete: bool,
}

fn normalize(text: &str) -> String {
    text.to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect::<String>()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Asks for all of `res` in one prompt and returns, per expression, the
/// meaningful ids answered, or `None` when no usable answer line was found.
pub fn ask_variant(
    variant: &PromptVariant,
    scene: &SceneModel,
    viewpoint: &str,
    res: &[String],
    client: &CompletionClient,
) -> Result<Vec<Option<Vec<String>>>, EvalError> {
    let wrap = |source| EvalError::Bridge { variant: variant.label.clone(), source };
    let prompt = build_grounding_prompt(scene, viewpoint, variant, res).map_err(wrap)?;
    let response = client.complete(&prompt).map_err(wrap)?;
    let (_, mapping) = anonymize(scene).map_err(|e| wrap(e.into()))?;

    let mut vocabulary: BTreeSet<String> = scene.objects.iter().map(|o| o.id.clone()).collect();
    if variant.anonymized() {
        vocabulary.extend(mapping.iter().map(|(_, anon)| anon.to_string()));
    }
    let lines = parse_grounding_response(&response, &vocabulary);
    let to_meaningful = |id: &String| mapping.meaningful(id).map_or_else(|| id.clone(), str::to_string);
    let answer = |line: &GroundingLine| match line {
        GroundingLine::Parsed { ids, .. } => Some(ids.iter().map(to_meaningful).collect()),
        GroundingLine::Unparsed { .. } => None,
    };

    // Answers normally come back one per expression, in order. If a line's
    // text names a different expression the order is not trusted.
    let line_text = |l: &GroundingLine| match l {
        GroundingLine::Parsed { re, .. } => normalize(re),
        GroundingLine::Unparsed { line } => normalize(line),
    };
    let wanted: Vec<String> = res.iter().map(|r| normalize(r)).collect();
    let in_order = lines.len() == res.len()
        && lines.iter().enumerate().all(|(i, l)| {
            let text = line_text(l);
            wanted.iter().enumerate().all(|(j, w)| j == i || !text.starts_with(w.as_str()))
        });
    if in_order {
        return Ok(lines.iter().map(answer).collect());
    }
    Ok(wanted
        .iter()
        .map(|want| {
            lines
                .iter()
                .find(|l| match l {
                    GroundingLine::Parsed { re, .. } => &normalize(re) == want,
                    GroundingLine::Unparsed { line } => normalize(line).starts_with(want.as_str()),
                })
                .and_then(answer)
        })
        .collect())
}

/// Runs one variant over the whole gold set.
pub fn run_variant(
    variant: &PromptVariant,
    scene: &SceneModel,
    viewpoint: &str,
    gold: &GoldSet,
    client: &CompletionClient,
) -> Result<VariantResult, EvalError> {
    let answers = ask_variant(variant, scene, viewpoint, &gold.texts(), client)?;
    let predictions: Vec<Prediction> = gold
        .entries
        .iter()
        .zip(answers)
        .map(|(g, a)| Prediction { re_id: g.id.clone(), unparsed: a.is_none(), predicted: a.unwrap_or_default() })
        .collect();
    let incomplete = predictions.iter().any(|p| p.unparsed);
    Ok(VariantResult { label: variant.label.clone(), predictions, incomplete })
}

/// Runs variants concurrently; results come back in the order given.
pub fn run_variants(
    variants: &[PromptVariant],
    scene: &SceneModel,
    viewpoint: &str,
    gold: &GoldSet,
    client: &CompletionClient,
) -> Vec<Result<VariantResult, EvalError>> {
    std::thread::scope(|s| {
        let handles: Vec<_> =
            variants.iter().map(|v| s.spawn(move || run_variant(v, scene, viewpoint, gold, client))).collect();
        handles.into_iter().map(|h| h.join().expect("variant worker panicked")).collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReScore {
    pub re_id: String,
    pub hit: bool,
    pub multi_match: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub per_re: Vec<ReScore>,
    pub hits: usize,
    pub total: usize,
    pub accuracy: f64,
}

/// A hit needs the predicted set to be exactly the correct object.
pub fn score(result: &VariantResult, gold: &GoldSet) -> Score {
    let per_re: Vec<ReScore> = gold
        .entries
        .iter()
        .map(|g| {
            let predicted: BTreeSet<&str> = result
                .predictions
                .iter()
                .find(|p| p.re_id == g.id)
                .map(|p| p.predicted.iter().map(String::as_str).collect())
                .unwrap_or_default();
            ReScore {
                re_id: g.id.clone(),
                hit: predicted.len() == 1 && predicted.contains(g.correct.as_str()),
                multi_match: predicted.len() > 1,
            }
        })
        .collect();
    let hits = per_re.iter().filter(|r| r.hit).count();
    let total = per_re.len();
    Score { per_re, hits, total, accuracy: hits as f64 / total as f64 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub hits: usize,
    pub total: usize,
    pub accuracy: f64,
    pub incomplete: bool,
}

/// How well "difficulty at or above the threshold" predicts a miss.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ThresholdAnalysis {
    pub failure_threshold: u32,
    pub misses_at_or_above: usize,
    pub misses_below: usize,
    pub hits_at_or_above: usize,
    pub hits_below: usize,
    pub lowest_missed_difficulty: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub variants: BTreeMap<String, VariantSummary>,
    pub threshold: ThresholdAnalysis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub re_id: String,
    pub variant: String,
    pub predicted: String,
    pub correct: String,
    pub hit: bool,
    pub multi_match: bool,
    pub difficulty: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
    pub summary: Summary,
}

/// Joins results with the gold set and difficulty model. Rows are ordered by
/// expression, then by variant label, whatever order results arrive in.
pub fn build_report(
    results: &[VariantResult],
    gold: &GoldSet,
    model: &DifficultyModel,
) -> Result<EvalReport, EvalError> {
    if results.is_empty() {
        return Err(EvalError::Report("no variant results".into()));
    }
    let mut sorted: Vec<&VariantResult> = results.iter().collect();
    sorted.sort_by(|a, b| a.label.cmp(&b.label));
    let scores: Vec<Score> = sorted.iter().map(|r| score(r, gold)).collect();

    let mut rows = Vec::new();
    let mut threshold = ThresholdAnalysis { failure_threshold: model.failure_threshold, ..Default::default() };
    for (gi, g) in gold.entries.iter().enumerate() {
        for (r, s) in sorted.iter().zip(&scores) {
            let difficulty = model.difficulty(&g.id, &r.label)?;
            let predicted =
                r.predictions.iter().find(|p| p.re_id == g.id).map(|p| p.predicted.join(";")).unwrap_or_default();
            let ReScore { hit, multi_match, .. } = s.per_re[gi].clone();
            let hard = difficulty >= model.failure_threshold;
            match (hit, hard) {
                (false, true) => threshold.misses_at_or_above += 1,
                (false, false) => threshold.misses_below += 1,
                (true, true) => threshold.hits_at_or_above += 1,
                (true, false) => threshold.hits_below += 1,
            }
            if !hit {
                threshold.lowest_missed_difficulty =
                    Some(threshold.lowest_missed_difficulty.map_or(difficulty, |d| d.min(difficulty)));
            }
            rows.push(ReportRow {
                re_id: g.id.clone(),
                variant: r.label.clone(),
                predicted,
                correct: g.correct.clone(),
                hit,
                multi_match,
                difficulty,
            });
        }
    }
    let variants = sorted
        .iter()
        .zip(&scores)
        .map(|(r, s)| {
            let v = VariantSummary { hits: s.hits, total: s.total, accuracy: s.accuracy, incomplete: r.incomplete };
            (r.label.clone(), v)
        })
        .collect();
    Ok(EvalReport { rows, summary: Summary { variants, threshold } })
}

impl EvalReport {
    pub fn to_csv(&self) -> Result<String, EvalError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).map_err(|e| EvalError::Report(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| EvalError::Report(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| EvalError::Report(e.to_string()))
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("summary serializes") + "\n"
    }

    /// Writes `report.csv` and `summary.json` into `dir`.
    pub fn emit(&self, dir: impl AsRef<Path>) -> Result<(), EvalError> {
        let dir = dir.as_ref();
        let io = |e: std::io::Error| EvalError::Report(format!("{}: {e}", dir.display()));
        std::fs::create_dir_all(dir).map_err(io)?;
        std::fs::write(dir.join("report.csv"), self.to_csv()?).map_err(io)?;
        std::fs::write(dir.join("summary.json"), self.summary_json()).map_err(io)
    }

    /// Variants whose hit count differs from `expected`, as `(label, expected, got)`.
    pub fn deviations(&self, expected: &BTreeMap<String, usize>) -> Vec<(String, usize, Option<usize>)> {
        expected
            .iter()
            .filter_map(|(label, want)| {
                let got = self.summary.variants.get(label).map(|v| v.hits);
                (got != Some(*want)).then(|| (label.clone(), *want, got))
            })
            .collect()
    }
}

pub fn load_expected(path: impl AsRef<Path>) -> Result<BTreeMap<String, usize>, EvalError> {
    let path = path.as_ref();
    serde_json::from_str(&load_text(path)?)
        .map_err(|e| EvalError::Load { path: path.display().to_string(), message: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gold() -> GoldSet {
        GoldSet::from_json(
            r#"[{"id":"RE1","text":"the cup.","challenges":[],"correct":"Cup1","dsl":"(select (category Cup))"},
                {"id":"RE2","text":"the pot.","challenges":[],"correct":"Pot2","dsl":"(select (category Pot))"}]"#,
        )
        .unwrap()
    }

    fn result(label: &str, preds: &[&[&str]]) -> VariantResult {
        VariantResult {
            label: label.into(),
            predictions: preds
                .iter()
                .enumerate()
                .map(|(i, p)| Prediction {
                    re_id: format!("RE{}", i + 1),
                    predicted: p.iter().map(|s| s.to_string()).collect(),
                    unparsed: p.is_empty(),
                })
                .collect(),
            incomplete: false,
        }
    }

    fn model() -> DifficultyModel {
        DifficultyModel::from_toml(
            "failure_threshold = 10\n[re_base]\nRE1 = 6\nRE2 = 9\n[variant_bonus]\nA = 2\nB = 1\n",
        )
        .unwrap()
    }

    #[test]
    fn multi_match_is_a_flagged_miss() {
        let s = score(&result("A", &[&["Cup1", "Cup3"], &["Pot2"]]), &gold());
        assert_eq!(s.hits, 1);
        assert!(!s.per_re[0].hit && s.per_re[0].multi_match);
        assert_eq!(s.accuracy, 0.5);
    }

    #[test]
    fn score_ignores_order_and_duplicates() {
        let a = score(&result("A", &[&["Cup1", "Cup1"], &["Pot2"]]), &gold());
        assert_eq!(a.hits, 2);
    }

    #[test]
    fn difficulty_adds_base_and_bonus() {
        assert_eq!(model().difficulty("RE2", "A").unwrap(), 11);
        assert!(matches!(model().difficulty("RE9", "A"), Err(EvalError::UnknownRe(_))));
        assert!(matches!(model().difficulty("RE1", "Z"), Err(EvalError::UnknownVariant(_))));
    }

    #[test]
    fn report_is_expression_major_and_order_independent() {
        let a = result("A", &[&["Cup1"], &["Pot9"]]);
        let b = result("B", &[&[], &["Pot2"]]);
        let r1 = build_report(&[a.clone(), b.clone()], &gold(), &model()).unwrap();
        let r2 = build_report(&[b, a], &gold(), &model()).unwrap();
        assert_eq!(r1, r2);
        let order: Vec<(&str, &str)> = r1.rows.iter().map(|r| (r.re_id.as_str(), r.variant.as_str())).collect();
        assert_eq!(order, [("RE1", "A"), ("RE1", "B"), ("RE2", "A"), ("RE2", "B")]);
        let csv = r1.to_csv().unwrap();
        assert!(csv.starts_with("re_id,variant,predicted,correct,hit,multi_match,difficulty\n"));
        assert_eq!(r1.summary.threshold.misses_at_or_above, 1);
        assert_eq!(r1.summary.threshold.misses_below, 1);
        assert_eq!(r1.summary.threshold.lowest_missed_difficulty, Some(7));
        let expected: BTreeMap<String, usize> = [("A".to_string(), 1), ("B".to_string(), 2)].into();
        assert_eq!(r1.deviations(&expected), vec![("B".to_string(), 2, Some(1))]);
    }

    #[test]
    fn empty_results_rejected() {
        assert!(matches!(build_report(&[], &gold(), &model()), Err(EvalError::Report(_))));
    }
}
