use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::BridgeError;
use crate::neighbor_graph::{build_graph, render_graph, GraphEncoding};
use crate::world_model::{anonymize, render_category_list, IdStyle, SceneModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PromptKind {
    Grounding,
    Storage,
    Simplify,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptDoc {
    pub kind: PromptKind,
    pub text: String,
    /// Hex SHA-256 of `text`; doubles as the transcript key.
    pub inputs_digest: String,
    /// Run label recorded alongside the response; not part of the digest.
    pub label: Option<String>,
}

impl PromptDoc {
    pub fn new(kind: PromptKind, text: String) -> Self {
        let inputs_digest = hex::encode(Sha256::digest(text.as_bytes()));
        PromptDoc { kind, text, inputs_digest, label: None }
    }

    pub fn with_label(self, label: impl Into<String>) -> Self {
        PromptDoc { label: Some(label.into()), ..self }
    }
}

/// One way of presenting the scene to the model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptVariant {
    pub label: String,
    /// `None` leaves the category list out; `Anonymized` also hides
    /// meaningful ids in the graph.
    pub id_style: Option<IdStyle>,
    pub encoding: GraphEncoding,
    pub explanation: Option<String>,
    pub dual_viewpoint: bool,
}

pub const AXIS_NOTE: &str = "In this neighbor graph +x is to the left and +y is to the right.";
pub const CARDINAL_NOTE: &str = "(N:North S:South W:West E:East U:Up D:Down)";
pub const VIEWPOINT_NOTE: &str = "spatial relations are viewpoint dependent";

impl PromptVariant {
    /// The eight standard variants, labelled A to H.
    pub fn standard() -> Vec<PromptVariant> {
        let v = |label: &str, id_style, encoding, explanation: Option<String>, dual| PromptVariant {
            label: label.into(),
            id_style,
            encoding,
            explanation,
            dual_viewpoint: dual,
        };
        use GraphEncoding::*;
        use IdStyle::*;
        vec![
            v("A", Some(Meaningful), Language, None, false),
            v("B", None, Language, None, false),
            v("C", Some(Meaningful), SignedAxis, None, false),
            v("D", None, SignedAxis, None, false),
            v("E", Some(Meaningful), SignedAxis, Some(AXIS_NOTE.into()), false),
            v("F", None, SignedAxis, None, false),
            v("G", Some(Anonymized), CardinalJson, Some(CARDINAL_NOTE.into()), false),
            v("H", Some(Anonymized), CardinalJson, Some(format!("{CARDINAL_NOTE} {VIEWPOINT_NOTE}")), true),
        ]
    }

    pub fn by_label(label: &str) -> Option<PromptVariant> {
        Self::standard().into_iter().find(|v| v.label.eq_ignore_ascii_case(label))
    }

    pub fn anonymized(&self) -> bool {
        self.id_style == Some(IdStyle::Anonymized)
    }
}

const GROUNDING_OPENING: &str = "I am a robot trying to talk with a human, and I need help understanding the human's language. Specifically, I need help ground referring expressions to objects I can see in my world.";

/// Grounding prompt for `res`, with the graph seen from `viewpoint` (and,
/// for dual-viewpoint variants, from every other viewpoint too).
pub fn build_grounding_prompt(
    scene: &SceneModel,
    viewpoint: &str,
    variant: &PromptVariant,
    res: &[String],
) -> Result<PromptDoc, BridgeError> {
    if res.is_empty() {
        return Err(BridgeError::EmptyInput("referring expressions"));
    }
    if variant.dual_viewpoint && variant.encoding != GraphEncoding::CardinalJson {
        return Err(BridgeError::VariantMismatch(format!(
            "variant {} labels viewpoints but does not use compass directions",
            variant.label
        )));
    }
    let anon;
    let shown = if variant.anonymized() {
        anon = anonymize(scene)?.0;
        &anon
    } else {
        scene
    };

    let mut views = vec![viewpoint.to_string()];
    if variant.dual_viewpoint {
        views.extend(shown.viewpoints.iter().map(|v| v.name.clone()).filter(|n| n != viewpoint));
        if views.len() < 2 {
            return Err(BridgeError::VariantMismatch(format!("variant {} needs two viewpoints", variant.label)));
        }
    }

    let mut t = String::new();
    t.push_str(GROUNDING_OPENING);
    t.push_str("\n\n");
    if let Some(style) = variant.id_style {
        t.push_str(&render_category_list(shown, style));
        t.push('\n');
    }
    for name in &views {
        let graph = build_graph(shown, name)?;
        if variant.dual_viewpoint {
            t.push_str(&format!("Neighbors seen from the {name} viewpoint:\n"));
        }
        t.push_str(&render_graph(&graph, variant.encoding));
        t.push('\n');
    }
    if let Some(note) = &variant.explanation {
        t.push_str(note);
        t.push_str("\n\n");
    }
    let example = if variant.anonymized() { "Object17" } else { "CounterTop17" };
    t.push_str("If I give you a referring expression, I want you to return the object id of the correct object.\n");
    t.push_str("Example:\n");
    t.push_str("Input: 'the countertop left to the microwave'\n");
    t.push_str(&format!("Output: {example}\n\n"));
    t.push_str("Here are the referring expressions I would like you to ground for me.\n");
    t.push_str("For each give me a single line of text with the referring expression followed by the object id it refers to.\n");
    t.push_str("If more than one matches, give all the matches.\n\n");
    t.push_str("Input referring expressions:\n\n");
    for re in res {
        t.push_str(re);
        t.push('\n');
    }
    t.push_str("\nPlease give me your answers:\n");
    Ok(PromptDoc::new(PromptKind::Grounding, t).with_label(&variant.label))
}

pub fn build_storage_prompt(
    scene: &SceneModel,
    type_classes: &[String],
    res: &[String],
) -> Result<PromptDoc, BridgeError> {
    if type_classes.is_empty() {
        return Err(BridgeError::EmptyInput("type classes"));
    }
    if res.is_empty() {
        return Err(BridgeError::EmptyInput("referring expressions"));
    }
    let mut t = String::from(
        "I am a robot trying to talk with a human, and I need help understanding the human's language. Specifically, the human has asked me to store things, and I don't know what store means. Here are the objects I can see:\n\nWorld State:\n\n",
    );
    for o in scene.ordered_objects() {
        t.push_str(&format!("{}: category {}\n", o.id, o.category));
    }
    t.push_str("\nHere are some referring expression for things the human wants me to store. For each give me a single line of text with the referring expression followed by the object id of the object to be stored and the object id of the location to store it. If more than one matches, give all the matches.\n\n");
    t.push_str("There are several types of objects that I want to be able to store:\n\n");
    for (i, class) in type_classes.iter().enumerate() {
        t.push_str(&format!("Type {}: {class}\n", i + 1));
    }
    t.push_str("\nInput referring expressions:\n\n");
    for re in res {
        t.push_str(re);
        t.push('\n');
    }
    t.push_str("\nPlease tell me where would be a good place to store each of these objects:\n");
    Ok(PromptDoc::new(PromptKind::Storage, t))
}

/// Procedure lines of a recipe: everything after the `Steps:` heading, with
/// list markers, numbering and bold markers removed.
pub fn recipe_steps(recipe: &str) -> Vec<String> {
    let mut lines = recipe.lines().skip_while(|l| l.trim() != "Steps:");
    lines.next();
    lines
        .map(|l| {
            let l = l.trim().trim_start_matches("- ").trim_start();
            let l = match l.split_once(". ") {
                Some((n, rest)) if !n.is_empty() && n.chars().all(|c| c.is_ascii_digit()) => rest,
                _ => l,
            };
            l.replace("**", "")
        })
        .filter(|l| !l.is_empty())
        .collect()
}

pub fn build_simplify_prompt(templates: &[String], recipe: &str, dish: &str) -> Result<PromptDoc, BridgeError> {
    if templates.is_empty() {
        return Err(BridgeError::EmptyInput("verb templates"));
    }
    let steps = recipe_steps(recipe);
    if steps.is_empty() {
        return Err(BridgeError::EmptyInput("recipe steps"));
    }
    let mut t = String::new();
    t.push_str("I am a robot trying to understand human instructions. My language abilities are very limited\n");
    t.push_str(&format!(
        "I've been given a recipe for making {dish}. I can sort of understand the list of ingredients,\n"
    ));
    t.push_str("but the language in the steps are too complicated for me.\n");
    t.push_str("I'd like you to translate it into a series of short commands, one per line.\n");
    t.push_str("Each line should have a simple action verb followed by one or two arguments.\n\n");
    t.push_str("Here are the list of action verbs and their arguments that I can easily understand:\n\n");
    for line in templates {
        t.push_str(line);
        t.push('\n');
    }
    t.push_str(&format!("\nHere is the procedure for making {dish}:\n\nSteps:\n"));
    for s in steps {
        t.push_str(&s);
        t.push('\n');
    }
    t.push_str(&format!(
        "\nPlease give me a list of steps to make {dish} I can understand with no additional comments:\n"
    ));
    Ok(PromptDoc::new(PromptKind::Simplify, t))
}
