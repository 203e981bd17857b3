//! The JSON group document.
//!
//! ```json
//! {"vertices":[{"id":"v","basis":[["1","0"],["0","1"]]}],
//!  "edges":[{"id":"s","minus":"v","plus":"v","u":["1","0"],"v":["2","2"]}]}
//! ```
//!
//! All numbers are rational strings. An omitted `basis` means Z²; a given
//! basis may be any generating set and is emitted back in canonical form.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Edge, TubularGroup, Vertex};
use crate::exactlat::{Lattice2, QVec2};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexDoc {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<QVec2>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub id: String,
    pub minus: String,
    pub plus: String,
    pub u: QVec2,
    pub v: QVec2,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDoc {
    pub vertices: Vec<VertexDoc>,
    #[serde(default)]
    pub edges: Vec<EdgeDoc>,
}

impl GroupDoc {
    pub fn into_group(self) -> TubularGroup {
        let vertices = self
            .vertices
            .into_iter()
            .map(|v| Vertex {
                id: v.id,
                lattice: match v.basis {
                    None => Lattice2::z2(),
                    Some(gens) => Lattice2::span(gens.iter()),
                },
            })
            .collect();
        let edges = self
            .edges
            .into_iter()
            .map(|e| Edge::new(e.id, e.minus, e.plus, e.u, e.v))
            .collect();
        TubularGroup::new(vertices, edges)
    }
}

impl From<&TubularGroup> for GroupDoc {
    fn from(g: &TubularGroup) -> Self {
        GroupDoc {
            vertices: g
                .vertices()
                .iter()
                .map(|v| VertexDoc {
                    id: v.id.clone(),
                    basis: Some(v.lattice.basis().to_vec()),
                })
                .collect(),
            edges: g
                .edges()
                .iter()
                .map(|e| EdgeDoc {
                    id: e.id.clone(),
                    minus: e.minus.clone(),
                    plus: e.plus.clone(),
                    u: e.u.clone(),
                    v: e.v.clone(),
                })
                .collect(),
        }
    }
}

impl Serialize for TubularGroup {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        GroupDoc::from(self).serialize(serializer)
    }
}

/// Deserialization validates the group.
impl<'de> Deserialize<'de> for TubularGroup {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let g = GroupDoc::deserialize(deserializer)?.into_group();
        g.ensure_valid().map_err(serde::de::Error::custom)?;
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{snowflake, ModelError, Violation};

    #[test]
    fn snowflake_round_trips() {
        let g = snowflake(3, 2).unwrap();
        let text = g.to_json();
        assert_eq!(TubularGroup::from_json(&text).unwrap(), g);
        assert_eq!(
            text,
            r#"{"vertices":[{"id":"v","basis":[["1","0"],["0","1"]]}],"edges":[{"id":"s","minus":"v","plus":"v","u":["2","0"],"v":["3","1"]},{"id":"t","minus":"v","plus":"v","u":["2","0"],"v":["3","-1"]}]}"#
        );
    }

    #[test]
    fn unknown_vertex_is_a_semantic_error() {
        let text = r#"{"vertices":[{"id":"v"}],"edges":[{"id":"s","minus":"v","plus":"w","u":["1","0"],"v":["2","2"]}]}"#;
        match TubularGroup::from_json(text) {
            Err(ModelError::Semantic(vs)) => assert_eq!(
                vs,
                vec![Violation::UnknownVertex {
                    edge: "s".into(),
                    vertex: "w".into()
                }]
            ),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rational_forms_and_default_basis() {
        let text = r#"{"vertices":[{"id":"v","basis":[["1/2","0"],["0","1"],["1","1"]]}],
            "edges":[{"id":"s","minus":"v","plus":"v","u":["1/2","0"],"v":["-4","2/2"]}]}"#;
        let g = TubularGroup::from_json(text).unwrap();
        assert_eq!(g.lattice("v").basis()[0].x.to_string(), "1/2");
        assert_eq!(g.edge("s").unwrap().v.x.to_string(), "-4");
        assert_eq!(g.edge("s").unwrap().v.y.to_string(), "1");
        let default = TubularGroup::from_json(r#"{"vertices":[{"id":"v"}]}"#).unwrap();
        assert_eq!(default.lattice("v"), &Lattice2::z2());
    }

    #[test]
    fn syntax_errors_carry_a_location() {
        match TubularGroup::from_json("{\"vertices\": [\n  {\"id\": 3}]}") {
            Err(ModelError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            TubularGroup::from_json(r#"{"vertices":[{"id":"v","basis":[["x","0"]]}]}"#),
            Err(ModelError::Syntax { .. })
        ));
    }
}
