//! Reference evaluator that works straight from object geometry.
//!
//! It never builds or consults a neighbor graph: every relation is
//! recomputed from boxes on demand. Slow, but small enough to audit, and
//! used to cross-check [`super::resolve`].

use std::cmp::Ordering;
use std::collections::BTreeSet;

use super::dsl::{Band, Constraint, Query, StackPos};
use super::resolve::STACK_TOLERANCE;
use super::GroundingError;
use crate::neighbor_graph::{GraphError, Relation};
use crate::world_model::{id_order_key, ObjectRecord, SceneModel};

struct View<'a> {
    objects: Vec<&'a ObjectRecord>,
    counter_height: f64,
    left: [f64; 3],
    ahead: [f64; 3],
}

fn span(o: &ObjectRecord, axis: [f64; 3]) -> (f64, f64) {
    let lo = [o.bbox.min.x, o.bbox.min.y, o.bbox.min.z];
    let hi = [o.bbox.max.x, o.bbox.max.y, o.bbox.max.z];
    let mut a = 0.0;
    let mut b = 0.0;
    for i in 0..3 {
        let (p, q) = (axis[i] * lo[i], axis[i] * hi[i]);
        a += if p < q { p } else { q };
        b += if p < q { q } else { p };
    }
    (a, b)
}

fn along(axis: [f64; 3], o: &ObjectRecord) -> f64 {
    axis[0] * o.position.x + axis[1] * o.position.y + axis[2] * o.position.z
}

fn separation(a: (f64, f64), b: (f64, f64)) -> f64 {
    let x = b.0 - a.1;
    let y = a.0 - b.1;
    if x > y {
        x
    } else {
        y
    }
}

fn point_distance(a: &ObjectRecord, b: &ObjectRecord) -> f64 {
    let dx = b.position.x - a.position.x;
    let dy = b.position.y - a.position.y;
    let dz = b.position.z - a.position.z;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

impl<'a> View<'a> {
    /// Relation of `b` seen from `a` and the two-level distance key.
    fn relate(&self, a: &ObjectRecord, b: &ObjectRecord) -> Option<(Relation, (f64, f64))> {
        let up = [0.0, 0.0, 1.0];
        let (al, bl) = (span(a, self.left), span(b, self.left));
        let (ad, bd) = (span(a, self.ahead), span(b, self.ahead));
        let (av, bv) = (span(a, up), span(b, up));
        let gl = separation(al, bl);
        let gd = separation(ad, bd);
        let gv = separation(av, bv);
        let rel = if gl >= 0.0 && gl > gd && gl > gv {
            if bl.0 + bl.1 > al.0 + al.1 {
                Relation::Left
            } else {
                Relation::Right
            }
        } else if gv >= 0.0 && gv > gd && gv > gl {
            if bv.0 + bv.1 > av.0 + av.1 {
                Relation::Above
            } else {
                Relation::Below
            }
        } else {
            return None;
        };
        let sq = |g: f64| if g > 0.0 { g.powi(2) } else { 0.0 };
        Some((rel, ((sq(gl) + sq(gd) + sq(gv)).sqrt(), point_distance(a, b))))
    }

    fn closest(&self, a: &ObjectRecord, rel: Relation) -> Vec<&'a ObjectRecord> {
        let mut best: Option<(f64, f64)> = None;
        let mut out = Vec::new();
        for b in &self.objects {
            if b.id == a.id {
                continue;
            }
            let Some((r, d)) = self.relate(a, b) else { continue };
            if r != rel {
                continue;
            }
            match best.map(|cur| key_cmp(d, cur)) {
                Some(Ordering::Greater) => {}
                Some(Ordering::Equal) => out.push(*b),
                _ => {
                    best = Some(d);
                    out = vec![*b];
                }
            }
        }
        out
    }

    /// Everything adjacent to `a` in direction `rel`, nearest first.
    fn adjacent(&self, a: &ObjectRecord, rel: Relation) -> Vec<&'a ObjectRecord> {
        let mut found: Vec<&ObjectRecord> = self.closest(a, rel);
        for b in &self.objects {
            if b.id != a.id
                && !found.iter().any(|f| f.id == b.id)
                && self.closest(b, rel.inverse()).iter().any(|c| c.id == a.id)
            {
                found.push(b);
            }
        }
        found.sort_by(|x, y| {
            let dx = self.relate(a, x).map(|r| r.1).unwrap_or((0.0, 0.0));
            let dy = self.relate(a, y).map(|r| r.1).unwrap_or((0.0, 0.0));
            key_cmp(dx, dy).then_with(|| id_order_key(&x.id).cmp(&id_order_key(&y.id)))
        });
        found
    }

    fn step(&self, start: &'a ObjectRecord, rel: Relation, k: usize) -> Option<&'a ObjectRecord> {
        let mut at = start;
        for _ in 0..k {
            at = *self.adjacent(at, rel).first()?;
        }
        Some(at)
    }

    fn column(&self, o: &ObjectRecord) -> Vec<&'a ObjectRecord> {
        let here = along(self.left, o);
        let depth = span(o, self.ahead);
        let mut col: Vec<&ObjectRecord> = self
            .objects
            .iter()
            .copied()
            .filter(|p| {
                if p.id == o.id {
                    return true;
                }
                let d = span(p, self.ahead);
                (along(self.left, p) - here).abs() <= STACK_TOLERANCE && d.0 < depth.1 && d.1 > depth.0
            })
            .collect();
        col.sort_by(|a, b| {
            b.position.z.total_cmp(&a.position.z).then_with(|| id_order_key(&a.id).cmp(&id_order_key(&b.id)))
        });
        col
    }

    fn run(&self, q: &Query) -> Result<Vec<String>, GroundingError> {
        let mut keep: Vec<bool> = vec![true; self.objects.len()];
        let mut ranking: Option<Vec<&ObjectRecord>> = None;
        for c in &q.constraints {
            let test: Box<dyn Fn(&ObjectRecord) -> bool> = match c {
                Constraint::Category(name) => {
                    let name = name.to_ascii_lowercase();
                    Box::new(move |o| o.category.to_ascii_lowercase() == name)
                }
                Constraint::Band(Band::High) => {
                    let h = self.counter_height;
                    Box::new(move |o| o.position.z > h)
                }
                Constraint::Band(Band::Low) => {
                    let h = self.counter_height;
                    Box::new(move |o| o.position.z < h)
                }
                Constraint::Fact { key, value } => {
                    Box::new(move |o| o.facts.iter().any(|f| &f.key == key && &f.value == value))
                }
                Constraint::Stack(pos) => {
                    let pos = *pos;
                    Box::new(move |o| {
                        let col = self.column(o);
                        let i = col.iter().position(|p| p.id == o.id).unwrap();
                        let last = col.len() - 1;
                        match pos {
                            StackPos::Top => i == 0,
                            StackPos::Bottom => i == last,
                            StackPos::Middle => col.len() >= 3 && i != 0 && i != last,
                            StackPos::NthFromTop(n) => i == n - 1,
                        }
                    })
                }
                Constraint::Rel { relation, anchor, ordinal } => {
                    let found = self.run(anchor)?;
                    if found.is_empty() {
                        return Err(GroundingError::Unresolvable { anchor: anchor.to_string() });
                    }
                    let anchors: Vec<&ObjectRecord> =
                        found.iter().map(|id| *self.objects.iter().find(|o| &o.id == id).unwrap()).collect();
                    let mut hits: BTreeSet<&str> = BTreeSet::new();
                    for a in &anchors {
                        match (relation, ordinal) {
                            (Relation::NextTo, 1) => {
                                for r in [Relation::Left, Relation::Right] {
                                    hits.extend(self.adjacent(a, r).iter().map(|o| o.id.as_str()));
                                }
                            }
                            (Relation::NextTo, k) => {
                                for r in [Relation::Left, Relation::Right] {
                                    if let Some(o) = self.step(a, r, *k) {
                                        hits.insert(&o.id);
                                    }
                                }
                            }
                            (r, k) => {
                                if let Some(o) = self.step(a, *r, *k) {
                                    hits.insert(&o.id);
                                }
                            }
                        }
                    }
                    if ranking.is_none() {
                        ranking = Some(anchors);
                    }
                    let hits: BTreeSet<String> = hits.into_iter().map(String::from).collect();
                    Box::new(move |o| hits.contains(&o.id))
                }
            };
            for (i, o) in self.objects.iter().enumerate() {
                keep[i] = keep[i] && test(o);
            }
        }
        let mut out: Vec<(f64, &ObjectRecord)> = self
            .objects
            .iter()
            .zip(&keep)
            .filter(|(_, k)| **k)
            .map(|(o, _)| {
                let d = match &ranking {
                    None => 0.0,
                    Some(anchors) => anchors.iter().map(|a| point_distance(a, o)).fold(f64::INFINITY, f64::min),
                };
                (d, *o)
            })
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| id_order_key(&a.1.id).cmp(&id_order_key(&b.1.id))));
        Ok(out.into_iter().map(|(_, o)| o.id.clone()).collect())
    }
}

fn key_cmp(a: (f64, f64), b: (f64, f64)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1))
}

/// Matches for `query` seen from `viewpoint`, best first.
pub fn brute_oracle(query: &Query, scene: &SceneModel, viewpoint: &str) -> Result<Vec<String>, GroundingError> {
    let vp = scene
        .viewpoints
        .iter()
        .find(|v| v.name == viewpoint)
        .ok_or_else(|| GroundingError::Graph(GraphError::UnknownViewpoint(viewpoint.to_string())))?;
    let len = (vp.facing.x * vp.facing.x + vp.facing.y * vp.facing.y).sqrt();
    let (fx, fy) = (vp.facing.x / len, vp.facing.y / len);
    let view = View {
        objects: scene.objects.iter().collect(),
        counter_height: scene.counter_height,
        left: [-fy, fx, 0.0],
        ahead: [fx, fy, 0.0],
    };
    view.run(query)
}
