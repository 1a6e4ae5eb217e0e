use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::dsl::{Band, Constraint, Query, StackPos};
use super::GroundingError;
use crate::neighbor_graph::{chain_walk, Frame, GraphError, NeighborGraph, Relation};
use crate::world_model::{id_order_key, ObjectRecord, SceneModel};

/// Objects whose reference points are this close laterally share a stack.
pub const STACK_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub depth: usize,
    pub constraint: String,
    pub survivors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    /// Best candidate first.
    pub matches: Vec<String>,
    pub ambiguous: bool,
    pub trace: Vec<TraceStep>,
}

/// Evaluates a query against the scene through its neighbor graph.
pub fn resolve(query: &Query, scene: &SceneModel, graph: &NeighborGraph) -> Result<Resolution, GroundingError> {
    let vp = scene
        .viewpoint(&graph.viewpoint)
        .ok_or_else(|| GroundingError::Graph(GraphError::UnknownViewpoint(graph.viewpoint.clone())))?;
    let ctx = Ctx { scene, graph, frame: Frame::from_viewpoint(vp) };
    let mut trace = Vec::new();
    let matches = ctx.eval(query, 0, &mut trace)?;
    Ok(Resolution { ambiguous: matches.len() > 1, matches, trace })
}

struct Ctx<'a> {
    scene: &'a SceneModel,
    graph: &'a NeighborGraph,
    frame: Frame,
}

impl Ctx<'_> {
    fn eval(&self, q: &Query, depth: usize, trace: &mut Vec<TraceStep>) -> Result<Vec<String>, GroundingError> {
        let mut alive: Vec<&ObjectRecord> = self.scene.ordered_objects();
        let mut rank_anchors: Option<Vec<String>> = None;
        for c in &q.constraints {
            match c {
                Constraint::Category(cat) => alive.retain(|o| o.category.eq_ignore_ascii_case(cat)),
                Constraint::Band(band) => {
                    let h = self.scene.counter_height;
                    alive.retain(|o| match band {
                        Band::High => o.position.z > h,
                        Band::Low => o.position.z < h,
                    })
                }
                Constraint::Fact { key, value } => alive.retain(|o| o.has_fact(key, value)),
                Constraint::Stack(pos) => alive.retain(|o| self.stack_matches(o, *pos)),
                Constraint::Rel { relation, anchor, ordinal } => {
                    let anchors = self.eval(anchor, depth + 1, trace)?;
                    if anchors.is_empty() {
                        return Err(GroundingError::Unresolvable { anchor: anchor.to_string() });
                    }
                    let targets = self.targets(&anchors, *relation, *ordinal)?;
                    alive.retain(|o| targets.contains(o.id.as_str()));
                    rank_anchors.get_or_insert(anchors);
                }
            }
            trace.push(TraceStep {
                depth,
                constraint: c.to_string(),
                survivors: alive.iter().map(|o| o.id.clone()).collect(),
            });
        }
        let mut ranked: Vec<(f64, &ObjectRecord)> = alive
            .into_iter()
            .map(|o| {
                let d = rank_anchors.as_ref().map_or(0.0, |anchors| {
                    anchors
                        .iter()
                        .filter_map(|a| self.scene.object(a))
                        .map(|a| (o.position - a.position).norm())
                        .fold(f64::INFINITY, f64::min)
                });
                (d, o)
            })
            .collect();
        ranked.sort_by(|(da, a), (db, b)| da.total_cmp(db).then_with(|| id_order_key(&a.id).cmp(&id_order_key(&b.id))));
        Ok(ranked.into_iter().map(|(_, o)| o.id.clone()).collect())
    }

    fn targets(&self, anchors: &[String], rel: Relation, k: usize) -> Result<BTreeSet<String>, GroundingError> {
        let mut out = BTreeSet::new();
        for a in anchors {
            if rel == Relation::NextTo {
                if k == 1 {
                    out.extend(self.graph.neighbors(a, rel).into_iter().map(|n| n.id.clone()));
                } else {
                    for dir in [Relation::Left, Relation::Right] {
                        if let Some(id) = walk(self.graph, a, dir, k)? {
                            out.insert(id);
                        }
                    }
                }
            } else if let Some(id) = walk(self.graph, a, rel, k)? {
                out.insert(id);
            }
        }
        Ok(out)
    }

    fn stack_matches(&self, o: &ObjectRecord, pos: StackPos) -> bool {
        let stack = stack_of(self.scene, &self.frame, o);
        let Some(i) = stack.iter().position(|s| s.id == o.id) else {
            return false;
        };
        let n = stack.len();
        match pos {
            StackPos::Top => i == 0,
            StackPos::Bottom => i == n - 1,
            StackPos::Middle => n >= 3 && i > 0 && i < n - 1,
            StackPos::NthFromTop(k) => i + 1 == k,
        }
    }
}

fn walk(g: &NeighborGraph, start: &str, rel: Relation, k: usize) -> Result<Option<String>, GroundingError> {
    match chain_walk(g, start, rel, k) {
        Ok(id) => Ok(Some(id)),
        Err(GraphError::ChainTooShort { .. }) => Ok(None),
        Err(e) => Err(GroundingError::Graph(e)),
    }
}

/// Objects stacked with `o`, highest first.
pub fn stack_of<'a>(scene: &'a SceneModel, frame: &Frame, o: &ObjectRecord) -> Vec<&'a ObjectRecord> {
    let lat = frame.lateral(o.position);
    let depth = o.bbox.project(frame.forward);
    let mut stack: Vec<&ObjectRecord> = scene
        .objects
        .iter()
        .filter(|p| {
            let d = p.bbox.project(frame.forward);
            p.id == o.id
                || ((frame.lateral(p.position) - lat).abs() <= STACK_TOLERANCE && d.0 < depth.1 && depth.0 < d.1)
        })
        .collect();
    stack.sort_by(|a, b| {
        b.position.z.total_cmp(&a.position.z).then_with(|| id_order_key(&a.id).cmp(&id_order_key(&b.id)))
    });
    stack
}
