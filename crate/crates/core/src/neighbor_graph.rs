//! Directional adjacency derived from object geometry, as seen from one viewpoint.
//!
//! Two boxes are related along the frame axis on which they are separated by
//! the widest gap. A separation along the viewing (depth) axis yields no
//! relation, and neither do intersecting boxes. Every object keeps only its
//! nearest neighbor per direction; the inverse edge is always added, so a
//! neighbor list may hold several ids when several objects share the same
//! nearest neighbor.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::world_model::{id_order_key, Aabb, CardinalMap, SceneModel, Vec3, Viewpoint};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum GraphError {
    #[error("unknown viewpoint `{0}`")]
    UnknownViewpoint(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("chain {relation} from `{start}` ends after {reached} of {requested} steps")]
    ChainTooShort { start: String, relation: Relation, requested: usize, reached: usize },
    #[error("relation `{0}` has no single direction to walk")]
    NotDirectional(Relation),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Relation {
    Left,
    Right,
    Above,
    Below,
    NextTo,
}

impl Relation {
    pub const DIRECTIONS: [Relation; 4] = [Relation::Left, Relation::Right, Relation::Above, Relation::Below];

    pub fn inverse(self) -> Relation {
        match self {
            Relation::Left => Relation::Right,
            Relation::Right => Relation::Left,
            Relation::Above => Relation::Below,
            Relation::Below => Relation::Above,
            Relation::NextTo => Relation::NextTo,
        }
    }

    fn slot(self) -> usize {
        match self {
            Relation::Left => 0,
            Relation::Right => 1,
            Relation::Above => 2,
            Relation::Below => 3,
            Relation::NextTo => unreachable!("next-to is derived"),
        }
    }

    pub fn word(self) -> &'static str {
        match self {
            Relation::Left => "left",
            Relation::Right => "right",
            Relation::Above => "above",
            Relation::Below => "below",
            Relation::NextTo => "next-to",
        }
    }

    pub fn signed_axis(self) -> &'static str {
        match self {
            Relation::Left => "+x",
            Relation::Right => "-x",
            Relation::Above => "+z",
            Relation::Below => "-z",
            Relation::NextTo => "x",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.word())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphEncoding {
    Language,
    SignedAxis,
    CardinalJson,
}

/// Separation between two objects: gap between their boxes, then distance
/// between their reference points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distance {
    pub gap: f64,
    pub point: f64,
}

impl Distance {
    pub fn compare(&self, other: &Distance) -> Ordering {
        self.gap.total_cmp(&other.gap).then(self.point.total_cmp(&other.point))
    }
}

/// Observer frame: lateral axis points to the observer's left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub left: Vec3,
    pub forward: Vec3,
    pub up: Vec3,
}

impl Frame {
    pub fn from_viewpoint(vp: &Viewpoint) -> Frame {
        let len = (vp.facing.x * vp.facing.x + vp.facing.y * vp.facing.y).sqrt();
        let fx = vp.facing.x / len;
        let fy = vp.facing.y / len;
        Frame { left: Vec3::new(-fy, fx, 0.0), forward: Vec3::new(fx, fy, 0.0), up: Vec3::new(0.0, 0.0, 1.0) }
    }

    pub fn lateral(&self, p: Vec3) -> f64 {
        self.left.dot(p)
    }

    pub fn intervals(&self, b: &Aabb) -> [(f64, f64); 3] {
        [b.project(self.left), b.project(self.forward), b.project(self.up)]
    }

    /// Direction of `other` as seen from `from`, if the boxes are separated
    /// laterally or vertically.
    pub fn classify(&self, from: (&Aabb, Vec3), other: (&Aabb, Vec3)) -> Option<(Relation, Distance)> {
        let a = self.intervals(from.0);
        let b = self.intervals(other.0);
        let gaps: [f64; 3] = std::array::from_fn(|i| (b[i].0 - a[i].1).max(a[i].0 - b[i].1));
        let (lat, depth, vert) = (gaps[0], gaps[1], gaps[2]);
        let centre = |iv: (f64, f64)| iv.0 + iv.1;
        let relation = if lat > depth && lat > vert && lat >= 0.0 {
            if centre(b[0]) > centre(a[0]) {
                Relation::Left
            } else {
                Relation::Right
            }
        } else if vert > lat && vert > depth && vert >= 0.0 {
            if centre(b[2]) > centre(a[2]) {
                Relation::Above
            } else {
                Relation::Below
            }
        } else {
            return None;
        };
        let gap = gaps.iter().map(|g| g.max(0.0).powi(2)).sum::<f64>().sqrt();
        let point = (other.1 - from.1).norm();
        Some((relation, Distance { gap, point }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub id: String,
    pub distance: Distance,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct NodeEdges {
    lists: [Vec<Neighbor>; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborGraph {
    pub viewpoint: String,
    pub cardinal: Option<CardinalMap>,
    order: Vec<String>,
    nodes: BTreeMap<String, NodeEdges>,
    /// Directions whose nearest neighbor was a distance tie.
    pub ambiguous: Vec<(String, Relation)>,
}

pub fn build_graph(scene: &SceneModel, viewpoint: &str) -> Result<NeighborGraph, GraphError> {
    let vp = scene.viewpoint(viewpoint).ok_or_else(|| GraphError::UnknownViewpoint(viewpoint.to_string()))?;
    let frame = Frame::from_viewpoint(vp);
    let objects = scene.ordered_objects();

    let mut lists: BTreeMap<&str, [BTreeMap<&str, Distance>; 4]> =
        objects.iter().map(|o| (o.id.as_str(), Default::default())).collect();
    let mut ambiguous = Vec::new();

    for a in &objects {
        let mut best: [Vec<(&str, Distance)>; 4] = Default::default();
        for b in &objects {
            if a.id == b.id {
                continue;
            }
            if let Some((rel, d)) = frame.classify((&a.bbox, a.position), (&b.bbox, b.position)) {
                let slot = &mut best[rel.slot()];
                match slot.first().map(|(_, cur)| d.compare(cur)) {
                    None | Some(Ordering::Equal) => slot.push((&b.id, d)),
                    Some(Ordering::Less) => *slot = vec![(&b.id, d)],
                    Some(Ordering::Greater) => {}
                }
            }
        }
        for rel in Relation::DIRECTIONS {
            let nearest = &best[rel.slot()];
            if nearest.len() > 1 {
                ambiguous.push((a.id.clone(), rel));
            }
            for (b, d) in nearest {
                lists.get_mut(a.id.as_str()).unwrap()[rel.slot()].insert(b, *d);
                lists.get_mut(b).unwrap()[rel.inverse().slot()].insert(&a.id, *d);
            }
        }
    }

    let nodes = lists
        .into_iter()
        .map(|(id, per_dir)| {
            let lists = per_dir.map(|m| {
                let mut v: Vec<Neighbor> =
                    m.into_iter().map(|(id, distance)| Neighbor { id: id.to_string(), distance }).collect();
                v.sort_by(|x, y| {
                    x.distance.compare(&y.distance).then_with(|| id_order_key(&x.id).cmp(&id_order_key(&y.id)))
                });
                v
            });
            (id.to_string(), NodeEdges { lists })
        })
        .collect();

    Ok(NeighborGraph {
        viewpoint: vp.name.clone(),
        cardinal: vp.cardinal.clone(),
        order: objects.iter().map(|o| o.id.clone()).collect(),
        nodes,
        ambiguous,
    })
}

impl NeighborGraph {
    /// Object ids in rendering order.
    pub fn ids(&self) -> &[String] {
        &self.order
    }

    pub fn contains(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    /// Neighbors of `id` in direction `rel`, nearest first. `NextTo` merges
    /// the left and right lists.
    pub fn neighbors(&self, id: &str, rel: Relation) -> Vec<&Neighbor> {
        let Some(node) = self.nodes.get(id) else {
            return Vec::new();
        };
        match rel {
            Relation::NextTo => {
                let mut all: Vec<&Neighbor> = node.lists[0].iter().chain(&node.lists[1]).collect();
                all.sort_by(|x, y| {
                    x.distance.compare(&y.distance).then_with(|| id_order_key(&x.id).cmp(&id_order_key(&y.id)))
                });
                all
            }
            dir => node.lists[dir.slot()].iter().collect(),
        }
    }

    pub fn nearest(&self, id: &str, rel: Relation) -> Option<&str> {
        self.neighbors(id, rel).first().map(|n| n.id.as_str())
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.values().map(|n| n.lists.iter().map(Vec::len).sum::<usize>()).sum()
    }

    /// Every stored edge as `(from, relation, to)`.
    pub fn edges(&self) -> impl Iterator<Item = (&str, Relation, &str)> {
        self.nodes.iter().flat_map(|(id, node)| {
            Relation::DIRECTIONS
                .into_iter()
                .flat_map(move |rel| node.lists[rel.slot()].iter().map(move |n| (id.as_str(), rel, n.id.as_str())))
        })
    }

    fn sorted_entries(&self, id: &str) -> Vec<(Relation, &Neighbor)> {
        let node = &self.nodes[id];
        let mut entries: Vec<(Relation, &Neighbor)> = Relation::DIRECTIONS
            .into_iter()
            .flat_map(|rel| node.lists[rel.slot()].iter().map(move |n| (rel, n)))
            .collect();
        entries.sort_by(|(ra, a), (rb, b)| {
            a.distance.compare(&b.distance).then(ra.cmp(rb)).then_with(|| id_order_key(&a.id).cmp(&id_order_key(&b.id)))
        });
        entries
    }
}

/// Follows the nearest edge of `rel` `k` times.
pub fn chain_walk(graph: &NeighborGraph, start: &str, rel: Relation, k: usize) -> Result<String, GraphError> {
    if rel == Relation::NextTo {
        return Err(GraphError::NotDirectional(rel));
    }
    if !graph.contains(start) {
        return Err(GraphError::UnknownObject(start.to_string()));
    }
    let mut current = start;
    for step in 0..k {
        current = graph.nearest(current, rel).ok_or_else(|| GraphError::ChainTooShort {
            start: start.to_string(),
            relation: rel,
            requested: k,
            reached: step,
        })?;
    }
    Ok(current.to_string())
}

const CARDINAL_ORDER: [&str; 6] = ["N", "S", "E", "W", "U", "D"];

fn cardinal_name(map: Option<&CardinalMap>, rel: Relation) -> String {
    match (map, rel) {
        (Some(m), Relation::Left) => m.left.clone(),
        (Some(m), Relation::Right) => m.right.clone(),
        (Some(m), Relation::Above) => m.above.clone(),
        (Some(m), Relation::Below) => m.below.clone(),
        (None, Relation::Left) => "L".into(),
        (None, Relation::Right) => "R".into(),
        (None, Relation::Above) => "U".into(),
        (None, Relation::Below) => "D".into(),
        (_, Relation::NextTo) => unreachable!(),
    }
}

pub fn render_graph(graph: &NeighborGraph, encoding: GraphEncoding) -> String {
    let mut out = String::new();
    match encoding {
        GraphEncoding::Language | GraphEncoding::SignedAxis => {
            for id in &graph.order {
                let entries = graph.sorted_entries(id);
                if entries.is_empty() {
                    continue;
                }
                let parts: Vec<String> = entries
                    .iter()
                    .map(|(rel, n)| {
                        let key = match encoding {
                            GraphEncoding::Language => rel.word(),
                            _ => rel.signed_axis(),
                        };
                        format!("{key}= {}", n.id)
                    })
                    .collect();
                let _ = writeln!(out, "{id} ({})", parts.join(", "));
            }
        }
        GraphEncoding::CardinalJson => {
            let rows: Vec<String> = graph
                .order
                .iter()
                .filter_map(|id| {
                    let node = &graph.nodes[id];
                    let mut dirs: Vec<(String, &Vec<Neighbor>)> = Relation::DIRECTIONS
                        .into_iter()
                        .filter(|rel| !node.lists[rel.slot()].is_empty())
                        .map(|rel| (cardinal_name(graph.cardinal.as_ref(), rel), &node.lists[rel.slot()]))
                        .collect();
                    if dirs.is_empty() {
                        return None;
                    }
                    dirs.sort_by_key(|(name, _)| {
                        CARDINAL_ORDER.iter().position(|c| c == name).unwrap_or(CARDINAL_ORDER.len())
                    });
                    let body: Vec<String> = dirs
                        .iter()
                        .map(|(name, list)| {
                            let ids: Vec<String> = list.iter().map(|n| json_str(&n.id)).collect();
                            format!("{}:[{}]", json_str(name), ids.join(","))
                        })
                        .collect();
                    Some(format!("  {}:{{ {} }}", json_str(id), body.join(", ")))
                })
                .collect();
            out.push_str("{\n");
            out.push_str(&rows.join(",\n"));
            if !rows.is_empty() {
                out.push('\n');
            }
            out.push_str("}\n");
        }
    }
    out
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serializes")
}
