//! File formats: JSON documents for BY forests and hyperelliptic graphs,
//! with strict field validation and lossless round trips.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cover::{GraphEdge, GraphMap, HyperellipticGraph, MetricGraph};
use crate::forest::{
    BYForest, Edge, LengthForm, MetricForest, Parity, SignedAutomorphism, SubgraphS,
};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
}

// ---------------------------------------------------------------------
// BY forest documents

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForestDoc {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeDoc>,
    #[serde(rename = "S")]
    pub s: SDoc,
    #[serde(rename = "F")]
    pub f: FDoc,
    pub signs: Vec<SignDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub id: String,
    pub ends: [String; 2],
    pub length: LengthDoc,
}

/// Either a concrete positive integer or a linear form with per-variable
/// parity declarations (used only in forest documents).
#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LengthDoc {
    Int(u64),
    Form {
        #[serde(default)]
        constant: u64,
        terms: BTreeMap<String, TermDoc>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub coeff: u64,
    pub parity: ParityDoc,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParityDoc {
    Even,
    Odd,
    Unknown,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SDoc {
    #[serde(default)]
    pub vertices: Vec<String>,
    #[serde(default)]
    pub edges: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FDoc {
    pub vertex_map: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignDoc {
    pub component_rep_edge: String,
    pub sign: i8,
}

impl From<ParityDoc> for Parity {
    fn from(p: ParityDoc) -> Parity {
        match p {
            ParityDoc::Even => Parity::Even,
            ParityDoc::Odd => Parity::Odd,
            ParityDoc::Unknown => Parity::Unknown,
        }
    }
}

impl From<Parity> for ParityDoc {
    fn from(p: Parity) -> ParityDoc {
        match p {
            Parity::Even => ParityDoc::Even,
            Parity::Odd => ParityDoc::Odd,
            Parity::Unknown => ParityDoc::Unknown,
        }
    }
}

fn length_from_doc(d: &LengthDoc) -> Result<LengthForm, IoError> {
    match d {
        LengthDoc::Int(n) => {
            if *n == 0 {
                return Err(IoError::Validation("edge length must be positive".into()));
            }
            Ok(LengthForm { constant: *n, terms: BTreeMap::new() })
        }
        LengthDoc::Form { constant, terms } => {
            if terms.is_empty() {
                return Err(IoError::Validation(
                    "symbolic length must have at least one term".into(),
                ));
            }
            let mut out = BTreeMap::new();
            for (v, t) in terms {
                if t.coeff == 0 {
                    return Err(IoError::Validation(format!(
                        "variable {v} has zero coefficient"
                    )));
                }
                out.insert(v.clone(), (t.coeff, t.parity.into()));
            }
            Ok(LengthForm { constant: *constant, terms: out })
        }
    }
}

fn length_to_doc(l: &LengthForm) -> LengthDoc {
    if l.terms.is_empty() {
        LengthDoc::Int(l.constant)
    } else {
        LengthDoc::Form {
            constant: l.constant,
            terms: l
                .terms
                .iter()
                .map(|(v, &(c, p))| (v.clone(), TermDoc { coeff: c, parity: p.into() }))
                .collect(),
        }
    }
}

/// Parse a BY forest document, rejecting malformed documents (ParseError)
/// and well-formed documents violating the forest invariants
/// (ValidationError with the core diagnostics).
pub fn parse_forest(text: &str) -> Result<BYForest, IoError> {
    let doc: ForestDoc =
        serde_json::from_str(text).map_err(|e| IoError::Parse(e.to_string()))?;
    forest_from_doc(&doc)
}

pub fn forest_from_doc(doc: &ForestDoc) -> Result<BYForest, IoError> {
    let mut edges = BTreeMap::new();
    for e in &doc.edges {
        if edges
            .insert(
                e.id.clone(),
                Edge {
                    ends: (e.ends[0].clone(), e.ends[1].clone()),
                    length: length_from_doc(&e.length)?,
                },
            )
            .is_some()
        {
            return Err(IoError::Validation(format!("duplicate edge id {}", e.id)));
        }
    }
    let p = BYForest {
        forest: MetricForest { vertices: doc.vertices.iter().cloned().collect(), edges },
        s: SubgraphS {
            vertices: doc.s.vertices.iter().cloned().collect(),
            edges: doc.s.edges.iter().cloned().collect(),
        },
        aut: SignedAutomorphism {
            vertex_map: doc.f.vertex_map.clone(),
            signs: doc.signs.iter().map(|s| (s.component_rep_edge.clone(), s.sign)).collect(),
        },
    };
    let diags = p.validate();
    if !diags.is_empty() {
        return Err(IoError::Validation(diags.join("; ")));
    }
    Ok(p)
}

pub fn forest_to_doc(p: &BYForest) -> ForestDoc {
    ForestDoc {
        vertices: p.forest.vertices.iter().cloned().collect(),
        edges: p
            .forest
            .edges
            .iter()
            .map(|(id, e)| EdgeDoc {
                id: id.clone(),
                ends: [e.ends.0.clone(), e.ends.1.clone()],
                length: length_to_doc(&e.length),
            })
            .collect(),
        s: SDoc {
            vertices: p.s.vertices.iter().cloned().collect(),
            edges: p.s.edges.iter().cloned().collect(),
        },
        f: FDoc { vertex_map: p.aut.vertex_map.clone() },
        signs: p
            .aut
            .signs
            .iter()
            .map(|(k, &sign)| SignDoc { component_rep_edge: k.clone(), sign })
            .collect(),
    }
}

pub fn serialize_forest(p: &BYForest) -> String {
    serde_json::to_string_pretty(&forest_to_doc(p)).expect("forest documents serialize")
}

// ---------------------------------------------------------------------
// hyperelliptic graph documents

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub vertices: Vec<String>,
    pub edges: Vec<GraphEdgeDoc>,
    pub iota: MapDoc,
    pub frob: MapDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphEdgeDoc {
    pub id: String,
    pub ends: [String; 2],
    /// Integer or rational length as a string "p/q"; rationals are allowed
    /// only in graph documents.
    pub length: RationalDoc,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalDoc {
    Int(u64),
    Ratio(String),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc {
    pub vertex_map: BTreeMap<String, String>,
    pub edge_map: BTreeMap<String, String>,
}

fn rational_from_doc(d: &RationalDoc) -> Result<BigRational, IoError> {
    match d {
        RationalDoc::Int(n) => Ok(BigRational::from_integer(BigInt::from(*n))),
        RationalDoc::Ratio(s) => s
            .parse::<BigRational>()
            .map_err(|e| IoError::Parse(format!("bad rational '{s}': {e}"))),
    }
}

fn rational_to_doc(r: &BigRational) -> RationalDoc {
    if r.denom().is_one() {
        if let Ok(n) = u64::try_from(r.numer().clone()) {
            return RationalDoc::Int(n);
        }
    }
    RationalDoc::Ratio(r.to_string())
}

pub fn parse_graph(text: &str) -> Result<HyperellipticGraph, IoError> {
    let doc: GraphDoc =
        serde_json::from_str(text).map_err(|e| IoError::Parse(e.to_string()))?;
    graph_from_doc(&doc)
}

pub fn graph_from_doc(doc: &GraphDoc) -> Result<HyperellipticGraph, IoError> {
    let mut edges = BTreeMap::new();
    for e in &doc.edges {
        if edges
            .insert(
                e.id.clone(),
                GraphEdge {
                    ends: (e.ends[0].clone(), e.ends[1].clone()),
                    length: rational_from_doc(&e.length)?,
                },
            )
            .is_some()
        {
            return Err(IoError::Validation(format!("duplicate edge id {}", e.id)));
        }
    }
    let g = HyperellipticGraph {
        graph: MetricGraph { vertices: doc.vertices.iter().cloned().collect(), edges },
        iota: GraphMap {
            vertex_map: doc.iota.vertex_map.clone(),
            edge_map: doc.iota.edge_map.clone(),
        },
        frob: GraphMap {
            vertex_map: doc.frob.vertex_map.clone(),
            edge_map: doc.frob.edge_map.clone(),
        },
    };
    let diags = g.validate();
    if !diags.is_empty() {
        return Err(IoError::Validation(diags.join("; ")));
    }
    Ok(g)
}

pub fn graph_to_doc(g: &HyperellipticGraph) -> GraphDoc {
    GraphDoc {
        vertices: g.graph.vertices.iter().cloned().collect(),
        edges: g
            .graph
            .edges
            .iter()
            .map(|(id, e)| GraphEdgeDoc {
                id: id.clone(),
                ends: [e.ends.0.clone(), e.ends.1.clone()],
                length: rational_to_doc(&e.length),
            })
            .collect(),
        iota: MapDoc {
            vertex_map: g.iota.vertex_map.clone(),
            edge_map: g.iota.edge_map.clone(),
        },
        frob: MapDoc {
            vertex_map: g.frob.vertex_map.clone(),
            edge_map: g.frob.edge_map.clone(),
        },
    }
}

pub fn serialize_graph(g: &HyperellipticGraph) -> String {
    serde_json::to_string_pretty(&graph_to_doc(g)).expect("graph documents serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::to_double_cover;
    use crate::forest::{quad_fixture, quad_fixture_const, LengthForm, Parity};

    #[test]
    fn quad_round_trip() {
        let p = quad_fixture(
            LengthForm::variable("a", Parity::Unknown),
            LengthForm::variable("b", Parity::Even),
            LengthForm::constant(3),
            -1,
        );
        let text = serialize_forest(&p);
        let q = parse_forest(&text).unwrap();
        assert_eq!(serialize_forest(&q), text);
        assert_eq!(p.forest.edges, q.forest.edges);
        assert_eq!(p.aut.vertex_map, q.aut.vertex_map);
        assert_eq!(p.aut.signs, q.aut.signs);
    }

    #[test]
    fn missing_sign_is_a_validation_error() {
        let p = quad_fixture_const(2, 3, 4, 1);
        let mut doc = forest_to_doc(&p);
        doc.signs.clear();
        let text = serde_json::to_string(&doc).unwrap();
        let err = parse_forest(&text).unwrap_err();
        assert!(matches!(err, IoError::Validation(_)), "{err}");
        assert!(err.to_string().contains("missing sign"), "{err}");
    }

    #[test]
    fn unknown_field_is_a_parse_error() {
        let p = quad_fixture_const(2, 3, 4, 1);
        let mut v: serde_json::Value =
            serde_json::from_str(&serialize_forest(&p)).unwrap();
        v["extra"] = serde_json::json!(1);
        let err = parse_forest(&v.to_string()).unwrap_err();
        assert!(matches!(err, IoError::Parse(_)), "{err}");
    }

    #[test]
    fn rational_length_rejected_in_forest_documents() {
        let text = r#"{
            "vertices": ["a", "b"],
            "edges": [{"id": "e", "ends": ["a", "b"], "length": "3/2"}],
            "S": {"vertices": ["a", "b"]},
            "F": {"vertex_map": {"a": "a", "b": "b"}},
            "signs": [{"component_rep_edge": "e", "sign": 1}]
        }"#;
        let err = parse_forest(text).unwrap_err();
        assert!(matches!(err, IoError::Parse(_)), "{err}");
    }

    #[test]
    fn graph_round_trip_with_rationals() {
        let g = to_double_cover(&quad_fixture_const(2, 3, 5, -1)).unwrap();
        let text = serialize_graph(&g);
        let h = parse_graph(&text).unwrap();
        assert_eq!(serialize_graph(&h), text);
    }
}
