//! Random scene and query generators shared by the property suites.

use groundkit::grounding::{Band, Constraint, Query, StackPos};
use groundkit::neighbor_graph::Relation;
use groundkit::world_model::{Aabb, Fact, ObjectRecord, SceneModel, Vec3, Viewpoint};
use proptest::prelude::*;

pub const FACINGS: [[f64; 3]; 4] = [[0.0, -1.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]];
pub const CATEGORIES: [&str; 3] = ["Cabinet", "Drawer", "Shelf"];

pub fn object() -> impl Strategy<Value = (usize, [u8; 3], [u8; 3], bool)> {
    (0..CATEGORIES.len(), [0u8..16, 0u8..4, 0u8..12], [1u8..5, 1u8..3, 1u8..4], any::<bool>())
}

pub fn scene() -> impl Strategy<Value = SceneModel> {
    (prop::collection::vec(object(), 1..=20), 0..FACINGS.len()).prop_map(|(objs, f)| {
        let objects = objs
            .into_iter()
            .enumerate()
            .map(|(i, (cat, at, size, fact))| {
                let min = Vec3::new(at[0] as f64 * 0.5, at[1] as f64 * 0.25, at[2] as f64 * 0.25);
                let max = Vec3::new(
                    min.x + size[0] as f64 * 0.25,
                    min.y + size[1] as f64 * 0.25,
                    min.z + size[2] as f64 * 0.25,
                );
                let bbox = Aabb { min, max };
                ObjectRecord {
                    id: format!("Thing{}", i + 1),
                    category: CATEGORIES[cat].into(),
                    position: bbox.center(),
                    bbox,
                    facts: if fact { vec![Fact { key: "holds".into(), value: "cups".into() }] } else { vec![] },
                }
            })
            .collect();
        let facing = FACINGS[f];
        SceneModel {
            counter_height: 1.5,
            objects,
            viewpoints: vec![viewpoint("Front", facing), viewpoint("Back", [-facing[0], -facing[1], 0.0])],
        }
    })
}

pub fn viewpoint(name: &str, facing: [f64; 3]) -> Viewpoint {
    Viewpoint { name: name.into(), position: Vec3::new(0.0, 0.0, 1.0), facing: facing.into(), cardinal: None }
}

pub fn relation() -> impl Strategy<Value = Relation> {
    prop_oneof![
        Just(Relation::Left),
        Just(Relation::Right),
        Just(Relation::Above),
        Just(Relation::Below),
        Just(Relation::NextTo),
    ]
}

pub fn leaf() -> impl Strategy<Value = Constraint> {
    prop_oneof![
        3 => prop::sample::select(&CATEGORIES[..]).prop_map(|c| Constraint::Category(c.to_string())),
        1 => prop_oneof![Just(Band::High), Just(Band::Low)].prop_map(Constraint::Band),
        1 => prop_oneof![
            Just(StackPos::Top),
            Just(StackPos::Middle),
            Just(StackPos::Bottom),
            (1usize..4).prop_map(StackPos::NthFromTop),
        ]
        .prop_map(Constraint::Stack),
        1 => Just(Constraint::Fact { key: "holds".into(), value: "cups".into() }),
    ]
}

pub fn query() -> impl Strategy<Value = Query> {
    let flat = prop::collection::vec(leaf(), 1..3).prop_map(|constraints| Query { constraints });
    flat.prop_recursive(2, 12, 3, |inner| {
        let rel = (relation(), inner, 1usize..4).prop_map(|(relation, anchor, ordinal)| Constraint::Rel {
            relation,
            anchor: Box::new(anchor),
            ordinal,
        });
        prop::collection::vec(prop_oneof![2 => leaf(), 1 => rel], 1..4).prop_map(|constraints| Query { constraints })
    })
}
