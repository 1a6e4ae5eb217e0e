//! Scene model: labeled objects with geometry, observer viewpoints, and the
//! category listings handed to prompts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("malformed scene document: {0}")]
    Malformed(String),
    #[error("duplicate object id `{0}`")]
    DuplicateId(String),
    #[error("scene defines no viewpoint")]
    MissingViewpoint,
    #[error("duplicate viewpoint `{0}`")]
    DuplicateViewpoint(String),
    #[error("object `{0}` has an empty category")]
    EmptyCategory(String),
    #[error("object `{id}`: position lies outside its bounding box")]
    PositionOutsideBox { id: String },
    #[error("object `{id}`: bounding box min exceeds max")]
    InvertedBox { id: String },
    #[error("viewpoint `{0}` has no horizontal facing component")]
    DegenerateFacing(String),
    #[error("object id `{0}` has no numeric suffix")]
    NonNumericSuffix(String),
    #[error("ids `{first}` and `{second}` both anonymize to `{anonymized}`")]
    SuffixCollision { first: String, second: String, anonymized: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// A point in meters. `x` east, `y` north, `z` up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn component(self, axis: usize) -> f64 {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }
}

impl std::ops::Sub for Vec3 {
    type Output = Vec3;

    fn sub(self, other: Vec3) -> Vec3 {
        Vec3::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(v: [f64; 3]) -> Self {
        Vec3::new(v[0], v[1], v[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        [v.x, v.y, v.z]
    }
}

/// Axis-aligned bounding box in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn contains(&self, p: Vec3) -> bool {
        (0..3).all(|i| self.min.component(i) <= p.component(i) && p.component(i) <= self.max.component(i))
    }

    pub fn center(&self) -> Vec3 {
        Vec3::new((self.min.x + self.max.x) / 2.0, (self.min.y + self.max.y) / 2.0, (self.min.z + self.max.z) / 2.0)
    }

    /// Interval covered by the box when projected onto `axis`.
    pub fn project(&self, axis: Vec3) -> (f64, f64) {
        let mut lo = 0.0;
        let mut hi = 0.0;
        for i in 0..3 {
            let a = axis.component(i);
            let p = a * self.min.component(i);
            let q = a * self.max.component(i);
            lo += p.min(q);
            hi += p.max(q);
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Fact {
    pub key: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectRecord {
    pub id: String,
    pub category: String,
    pub position: Vec3,
    pub bbox: Aabb,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub facts: Vec<Fact>,
}

impl ObjectRecord {
    pub fn has_fact(&self, key: &str, value: &str) -> bool {
        self.facts.iter().any(|f| f.key == key && f.value == value)
    }
}

/// Names used when a graph is rendered with compass directions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardinalMap {
    pub left: String,
    pub right: String,
    #[serde(default = "default_up")]
    pub above: String,
    #[serde(default = "default_down")]
    pub below: String,
}

fn default_up() -> String {
    "U".into()
}

fn default_down() -> String {
    "D".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Viewpoint {
    pub name: String,
    pub position: Vec3,
    /// Direction the observer looks in; only the horizontal part is used.
    pub facing: Vec3,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cardinal: Option<CardinalMap>,
}

/// The agent's world model. Immutable once loaded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneModel {
    /// Height (meters) separating "high" from "low" objects.
    #[serde(default = "default_counter_height")]
    pub counter_height: f64,
    pub objects: Vec<ObjectRecord>,
    pub viewpoints: Vec<Viewpoint>,
}

fn default_counter_height() -> f64 {
    0.9
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IdStyle {
    Meaningful,
    Anonymized,
}

/// Bijection between meaningful and anonymized identifiers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdMapping {
    forward: BTreeMap<String, String>,
    backward: BTreeMap<String, String>,
}

impl IdMapping {
    pub fn anonymized(&self, meaningful: &str) -> Option<&str> {
        self.forward.get(meaningful).map(String::as_str)
    }

    pub fn meaningful(&self, anonymized: &str) -> Option<&str> {
        self.backward.get(anonymized).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.forward.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }
}

/// Suffix of an id starting at its first ASCII digit, e.g. `19a` for `CounterTop19a`.
pub fn id_suffix(id: &str) -> Option<&str> {
    id.find(|c: char| c.is_ascii_digit()).map(|i| &id[i..])
}

/// Sort key that orders ids by the number in their suffix, then lexically.
pub fn id_order_key(id: &str) -> (u64, String, String) {
    let suffix = id_suffix(id).unwrap_or("");
    let digits: String = suffix.chars().take_while(char::is_ascii_digit).collect();
    let n = digits.parse::<u64>().unwrap_or(u64::MAX);
    (n, suffix[digits.len()..].to_string(), id.to_string())
}

impl SceneModel {
    pub fn from_json(text: &str) -> Result<Self, SceneError> {
        let scene: SceneModel = serde_json::from_str(text).map_err(|e| SceneError::Malformed(e.to_string()))?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        if self.viewpoints.is_empty() {
            return Err(SceneError::MissingViewpoint);
        }
        let mut names = BTreeSet::new();
        for vp in &self.viewpoints {
            if !names.insert(vp.name.as_str()) {
                return Err(SceneError::DuplicateViewpoint(vp.name.clone()));
            }
            if vp.facing.x == 0.0 && vp.facing.y == 0.0 {
                return Err(SceneError::DegenerateFacing(vp.name.clone()));
            }
        }
        let mut ids = BTreeSet::new();
        for obj in &self.objects {
            if !ids.insert(obj.id.as_str()) {
                return Err(SceneError::DuplicateId(obj.id.clone()));
            }
            if obj.category.trim().is_empty() {
                return Err(SceneError::EmptyCategory(obj.id.clone()));
            }
            if (0..3).any(|i| obj.bbox.min.component(i) > obj.bbox.max.component(i)) {
                return Err(SceneError::InvertedBox { id: obj.id.clone() });
            }
            if !obj.bbox.contains(obj.position) {
                return Err(SceneError::PositionOutsideBox { id: obj.id.clone() });
            }
        }
        Ok(())
    }

    pub fn object(&self, id: &str) -> Option<&ObjectRecord> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn viewpoint(&self, name: &str) -> Option<&Viewpoint> {
        self.viewpoints.iter().find(|v| v.name == name)
    }

    pub fn contains_id(&self, id: &str) -> bool {
        self.object(id).is_some()
    }

    /// Objects ordered by ascending numeric suffix.
    pub fn ordered_objects(&self) -> Vec<&ObjectRecord> {
        let mut objs: Vec<&ObjectRecord> = self.objects.iter().collect();
        objs.sort_by_cached_key(|o| id_order_key(&o.id));
        objs
    }
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<SceneModel, SceneError> {
    let path = path.as_ref();
    let text =
        std::fs::read_to_string(path).map_err(|source| SceneError::Io { path: path.display().to_string(), source })?;
    SceneModel::from_json(&text)
}

/// Replaces every `<Category><n>` id with `Object<n>`, keeping geometry and categories.
pub fn anonymize(scene: &SceneModel) -> Result<(SceneModel, IdMapping), SceneError> {
    let mut mapping = IdMapping::default();
    for obj in &scene.objects {
        let suffix =
            id_suffix(&obj.id).filter(|s| !s.is_empty()).ok_or_else(|| SceneError::NonNumericSuffix(obj.id.clone()))?;
        let anon = format!("Object{suffix}");
        if let Some(first) = mapping.backward.get(&anon) {
            return Err(SceneError::SuffixCollision { first: first.clone(), second: obj.id.clone(), anonymized: anon });
        }
        mapping.forward.insert(obj.id.clone(), anon.clone());
        mapping.backward.insert(anon, obj.id.clone());
    }
    let mut out = scene.clone();
    for obj in &mut out.objects {
        obj.id = mapping.forward[&obj.id].clone();
    }
    Ok((out, mapping))
}

/// Restores meaningful ids using a mapping produced by [`anonymize`].
pub fn deanonymize(scene: &SceneModel, mapping: &IdMapping) -> SceneModel {
    let mut out = scene.clone();
    for obj in &mut out.objects {
        if let Some(orig) = mapping.meaningful(&obj.id) {
            obj.id = orig.to_string();
        }
    }
    out
}

pub fn render_category_list(scene: &SceneModel, style: IdStyle) -> String {
    let sep = match style {
        IdStyle::Meaningful => " : ",
        IdStyle::Anonymized => ": ",
    };
    let mut out = String::new();
    for obj in scene.ordered_objects() {
        let _ = writeln!(out, "{}{sep}category {}", obj.id, obj.category);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obj(id: &str, cat: &str, x: f64) -> ObjectRecord {
        ObjectRecord {
            id: id.into(),
            category: cat.into(),
            position: Vec3::new(x, 0.0, 0.5),
            bbox: Aabb { min: Vec3::new(x - 0.2, -0.2, 0.0), max: Vec3::new(x + 0.2, 0.2, 1.0) },
            facts: vec![],
        }
    }

    fn scene(objects: Vec<ObjectRecord>) -> SceneModel {
        SceneModel {
            counter_height: 0.9,
            objects,
            viewpoints: vec![Viewpoint {
                name: "South".into(),
                position: Vec3::new(0.0, 3.0, 1.5),
                facing: Vec3::new(0.0, -1.0, 0.0),
                cardinal: None,
            }],
        }
    }

    #[test]
    fn minimal_document_loads() {
        let s = scene(vec![obj("Microwave43", "Microwave", 0.0), obj("Cabinet14", "Cabinet", 1.0)]);
        let loaded = SceneModel::from_json(&s.to_json()).unwrap();
        assert_eq!(loaded.objects.len(), 2);
        assert_eq!(loaded, s);
    }

    #[test]
    fn duplicate_id_rejected() {
        let s = scene(vec![obj("Cabinet14", "Cabinet", 0.0), obj("Cabinet14", "Cabinet", 1.0)]);
        assert!(matches!(
            SceneModel::from_json(&s.to_json()),
            Err(SceneError::DuplicateId(id)) if id == "Cabinet14"
        ));
    }

    #[test]
    fn missing_viewpoint_rejected() {
        let mut s = scene(vec![obj("Cabinet14", "Cabinet", 0.0)]);
        s.viewpoints.clear();
        assert!(matches!(SceneModel::from_json(&s.to_json()), Err(SceneError::MissingViewpoint)));
    }

    #[test]
    fn malformed_document_rejected() {
        assert!(matches!(SceneModel::from_json("{\"objects\": 3}"), Err(SceneError::Malformed(_))));
    }

    #[test]
    fn position_must_lie_in_box() {
        let mut o = obj("Cabinet14", "Cabinet", 0.0);
        o.position.z = 4.0;
        assert!(matches!(scene(vec![o]).validate(), Err(SceneError::PositionOutsideBox { .. })));
    }

    #[test]
    fn anonymize_keeps_suffix() {
        let s = scene(vec![
            obj("Cabinet7", "Cabinet", 0.0),
            obj("Microwave43", "Microwave", 1.0),
            obj("CounterTop19a", "CounterTop", 2.0),
        ]);
        let (anon, map) = anonymize(&s).unwrap();
        assert_eq!(map.anonymized("Cabinet7"), Some("Object7"));
        assert_eq!(map.anonymized("Microwave43"), Some("Object43"));
        assert_eq!(map.anonymized("CounterTop19a"), Some("Object19a"));
        assert_eq!(anon.objects[1].category, "Microwave");
        assert_eq!(deanonymize(&anon, &map), s);
    }

    #[test]
    fn anonymize_detects_collision() {
        let s = scene(vec![obj("Cabinet7", "Cabinet", 0.0), obj("Drawer7", "Drawer", 1.0)]);
        assert!(matches!(anonymize(&s), Err(SceneError::SuffixCollision { .. })));
    }

    #[test]
    fn anonymize_rejects_missing_suffix() {
        let s = scene(vec![obj("Sink", "Sink", 0.0)]);
        assert!(matches!(anonymize(&s), Err(SceneError::NonNumericSuffix(_))));
    }

    #[test]
    fn category_list_formats() {
        let s = scene(vec![obj("Stove78", "Stove", 0.0), obj("Cabinet7", "Cabinet", 1.0)]);
        assert_eq!(
            render_category_list(&s, IdStyle::Meaningful),
            "Cabinet7 : category Cabinet\nStove78 : category Stove\n"
        );
        let (anon, _) = anonymize(&s).unwrap();
        assert_eq!(
            render_category_list(&anon, IdStyle::Anonymized),
            "Object7: category Cabinet\nObject78: category Stove\n"
        );
    }

    #[test]
    fn single_object_renders_one_line_in_both_styles() {
        let s = scene(vec![obj("Stove78", "Stove", 0.0)]);
        let (anon, _) = anonymize(&s).unwrap();
        assert_eq!(render_category_list(&s, IdStyle::Meaningful).lines().count(), 1);
        assert_eq!(render_category_list(&anon, IdStyle::Anonymized).lines().count(), 1);
    }

    #[test]
    fn suffix_ordering_is_numeric() {
        let mut ids = vec!["Drawer23", "Cabinet7", "CounterTop19a", "Cabinet14", "CounterTop17"];
        ids.sort_by_key(|id| id_order_key(id));
        assert_eq!(ids, ["Cabinet7", "Cabinet14", "CounterTop17", "CounterTop19a", "Drawer23"]);
    }
}
