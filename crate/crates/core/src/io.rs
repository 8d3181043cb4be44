//! JSON wire formats for graphs, rules, overlaps, vectors and chain specs.
//!
//! Graphs are addressed by their string ids; morphisms are objects mapping
//! source ids to target ids. Vectors are lists of terms sorted by key with
//! coefficients written as `"p/q"` strings.

use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::RuleVector;
use crate::compose::RuleOverlap;
use crate::error::{Error, Result};
use crate::graph::{GraphKind, GraphMorphism, Multigraph};
use crate::rep::ExactState;
use crate::rule::LinearRule;
use crate::stochastic::{CtmcSpec, Transition};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphJson {
    kind: GraphKind,
    vertices: Vec<String>,
    edges: Vec<EdgeJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeJson {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    src: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tgt: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ends: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MorphismJson {
    vmap: BTreeMap<String, String>,
    emap: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleJson {
    output: GraphJson,
    context: GraphJson,
    input: GraphJson,
    o: MorphismJson,
    i: MorphismJson,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OverlapJson {
    apex: GraphJson,
    into_input2: MorphismJson,
    into_output1: MorphismJson,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RuleTermJson {
    coefficient: String,
    rule: RuleJson,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateTermJson {
    coefficient: String,
    graph: GraphJson,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionJson {
    rule: RuleJson,
    rate: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CtmcJson {
    transitions: Vec<TransitionJson>,
    initial: GraphJson,
}

fn graph_to_json(g: &Multigraph) -> GraphJson {
    let id = |v: usize| g.vertex_id(v).to_string();
    let edges = g
        .edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            let mut out = EdgeJson {
                id: g.edge_id(e).to_string(),
                src: None,
                tgt: None,
                ends: None,
            };
            match g.kind() {
                GraphKind::Directed => {
                    out.src = Some(id(edge.src));
                    out.tgt = Some(id(edge.tgt));
                }
                GraphKind::Undirected if edge.is_loop() => out.ends = Some(vec![id(edge.src)]),
                GraphKind::Undirected => out.ends = Some(vec![id(edge.src), id(edge.tgt)]),
            }
            out
        })
        .collect();
    GraphJson {
        kind: g.kind(),
        vertices: g.vertex_ids().to_vec(),
        edges,
    }
}

fn graph_from_json(j: GraphJson) -> Result<Multigraph> {
    let index: BTreeMap<&str, usize> = j.vertices.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
    let lookup = |edge: &str, v: &str| {
        index
            .get(v)
            .copied()
            .ok_or_else(|| Error::MalformedGraph(format!("edge {edge:?} has undeclared endpoint {v:?}")))
    };
    let mut edges = Vec::with_capacity(j.edges.len());
    for e in &j.edges {
        let (a, b) = match (j.kind, &e.src, &e.tgt, &e.ends) {
            (GraphKind::Directed, Some(s), Some(t), None) => (lookup(&e.id, s)?, lookup(&e.id, t)?),
            (GraphKind::Undirected, None, None, Some(ends)) => match ends.as_slice() {
                [a] => {
                    let a = lookup(&e.id, a)?;
                    (a, a)
                }
                [a, b] if a != b => (lookup(&e.id, a)?, lookup(&e.id, b)?),
                _ => {
                    return Err(Error::MalformedGraph(format!(
                        "edge {:?} needs an incidence set of one or two distinct vertices",
                        e.id
                    )))
                }
            },
            (GraphKind::Directed, ..) => {
                return Err(Error::MalformedGraph(format!("directed edge {:?} needs exactly src and tgt", e.id)))
            }
            (GraphKind::Undirected, ..) => {
                return Err(Error::MalformedGraph(format!("undirected edge {:?} needs exactly ends", e.id)))
            }
        };
        edges.push((e.id.clone(), a, b));
    }
    Multigraph::from_parts(j.kind, j.vertices, edges)
}

fn morphism_to_json(f: &GraphMorphism, source: &Multigraph, target: &Multigraph) -> MorphismJson {
    MorphismJson {
        vmap: (0..source.vertex_count())
            .map(|v| (source.vertex_id(v).to_string(), target.vertex_id(f.vmap[v]).to_string()))
            .collect(),
        emap: (0..source.edge_count())
            .map(|e| (source.edge_id(e).to_string(), target.edge_id(f.emap[e]).to_string()))
            .collect(),
    }
}

/// Resolves an id-keyed morphism; it must be total and structure preserving.
fn morphism_from_json(j: &MorphismJson, source: &Multigraph, target: &Multigraph) -> Result<GraphMorphism> {
    let f = GraphMorphism {
        vmap: resolve(&j.vmap, source.vertex_ids(), |id| target.vertex_index(id), "vertex")?,
        emap: resolve(&j.emap, source.edge_ids(), |id| target.edge_index(id), "edge")?,
    };
    f.validate(source, target)?;
    Ok(f)
}

fn resolve(
    map: &BTreeMap<String, String>,
    source_ids: &[String],
    target: impl Fn(&str) -> Option<usize>,
    what: &str,
) -> Result<Vec<usize>> {
    if map.len() != source_ids.len() {
        return Err(Error::InvalidMorphism(format!(
            "{what} map must list exactly the {} source items",
            source_ids.len()
        )));
    }
    source_ids
        .iter()
        .map(|id| {
            let image = map
                .get(id)
                .ok_or_else(|| Error::InvalidMorphism(format!("{what} {id:?} is not mapped")))?;
            target(image).ok_or_else(|| Error::InvalidMorphism(format!("{what} image {image:?} is not in the target")))
        })
        .collect()
}

fn rule_to_json(p: &LinearRule) -> RuleJson {
    RuleJson {
        output: graph_to_json(p.output()),
        context: graph_to_json(p.context()),
        input: graph_to_json(p.input()),
        o: morphism_to_json(p.o(), p.context(), p.output()),
        i: morphism_to_json(p.i(), p.context(), p.input()),
    }
}

fn rule_from_json(j: RuleJson) -> Result<LinearRule> {
    let output = graph_from_json(j.output)?;
    let context = graph_from_json(j.context)?;
    let input = graph_from_json(j.input)?;
    context.kind().ensure(output.kind())?;
    context.kind().ensure(input.kind())?;
    let o = morphism_from_json(&j.o, &context, &output)?;
    let i = morphism_from_json(&j.i, &context, &input)?;
    LinearRule::new(output, context, input, o, i)
}

/// Writes `p/q` with the denominator always present.
pub fn format_rational(c: &BigRational) -> String {
    format!("{}/{}", c.numer(), c.denom())
}

/// Parses `p/q` or an integer `p`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("{s:?} is not a rational p/q"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n = BigInt::from_str(n).map_err(|_| bad())?;
    let d = BigInt::from_str(d).map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::Parse(format!("{s:?} has a zero denominator")));
    }
    Ok(BigRational::new(n, d))
}

pub fn graph_to_string(g: &Multigraph) -> String {
    to_pretty(&graph_to_json(g))
}

pub fn graph_from_str(s: &str) -> Result<Multigraph> {
    graph_from_json(serde_json::from_str(s)?)
}

pub fn rule_to_string(p: &LinearRule) -> String {
    to_pretty(&rule_to_json(p))
}

pub fn rule_from_str(s: &str) -> Result<LinearRule> {
    rule_from_json(serde_json::from_str(s)?)
}

/// Overlap of `p2` with `p1`, its legs written against `p2`'s input and
/// `p1`'s output.
pub fn overlap_to_value(ov: &RuleOverlap, p2: &LinearRule, p1: &LinearRule) -> serde_json::Value {
    let j = OverlapJson {
        apex: graph_to_json(&ov.apex),
        into_input2: morphism_to_json(&ov.into_input2, &ov.apex, p2.input()),
        into_output1: morphism_to_json(&ov.into_output1, &ov.apex, p1.output()),
    };
    serde_json::to_value(j).expect("overlap serializes")
}

pub fn overlap_from_str(s: &str, p2: &LinearRule, p1: &LinearRule) -> Result<RuleOverlap> {
    let j: OverlapJson = serde_json::from_str(s)?;
    let apex = graph_from_json(j.apex)?;
    let into_input2 = morphism_from_json(&j.into_input2, &apex, p2.input())?;
    let into_output1 = morphism_from_json(&j.into_output1, &apex, p1.output())?;
    if !into_input2.is_mono() || !into_output1.is_mono() {
        return Err(Error::NotMono("overlap leg"));
    }
    Ok(RuleOverlap {
        apex,
        into_input2,
        into_output1,
    })
}

pub fn rule_to_value(p: &LinearRule) -> serde_json::Value {
    serde_json::to_value(rule_to_json(p)).expect("rule serializes")
}

pub fn rule_vector_to_string(v: &RuleVector) -> String {
    let terms: Vec<RuleTermJson> = v
        .iter()
        .map(|(_, c, p)| RuleTermJson {
            coefficient: format_rational(c),
            rule: rule_to_json(p),
        })
        .collect();
    to_pretty(&terms)
}

/// Parses a rule vector. An empty list carries no kind, so `kind` is used
/// for it; non-empty lists must agree with `kind` when it is given.
pub fn rule_vector_from_str(s: &str, kind: Option<GraphKind>) -> Result<RuleVector> {
    let terms: Vec<RuleTermJson> = serde_json::from_str(s)?;
    let mut parsed = Vec::with_capacity(terms.len());
    for t in terms {
        parsed.push((parse_rational(&t.coefficient)?, rule_from_json(t.rule)?));
    }
    let kind = vector_kind(parsed.iter().map(|(_, p)| p.kind()), kind)?;
    Ok(RuleVector::from_terms(kind, parsed.iter().map(|(c, p)| (c.clone(), p))))
}

pub fn state_to_string(psi: &ExactState) -> String {
    let terms: Vec<StateTermJson> = psi
        .iter()
        .map(|(_, c, g)| StateTermJson {
            coefficient: format_rational(c),
            graph: graph_to_json(g),
        })
        .collect();
    to_pretty(&terms)
}

/// Parses a state vector; behaves like [`rule_vector_from_str`] on kinds.
pub fn state_from_str(s: &str, kind: Option<GraphKind>) -> Result<ExactState> {
    let terms: Vec<StateTermJson> = serde_json::from_str(s)?;
    let mut parsed = Vec::with_capacity(terms.len());
    for t in terms {
        parsed.push((parse_rational(&t.coefficient)?, graph_from_json(t.graph)?));
    }
    let kind = vector_kind(parsed.iter().map(|(_, g)| g.kind()), kind)?;
    let mut psi = ExactState::zero(kind);
    for (c, g) in &parsed {
        psi.add_graph(g, c.clone());
    }
    Ok(psi)
}

/// Reads either a state vector or a bare graph (taken with coefficient 1).
pub fn state_or_graph_from_str(s: &str, kind: Option<GraphKind>) -> Result<ExactState> {
    let value: serde_json::Value = serde_json::from_str(s)?;
    if value.is_object() {
        let g = graph_from_str(s)?;
        let mut psi = ExactState::zero(g.kind());
        psi.add_graph(&g, BigRational::one());
        Ok(psi)
    } else {
        state_from_str(s, kind)
    }
}

fn vector_kind(mut kinds: impl Iterator<Item = GraphKind>, hint: Option<GraphKind>) -> Result<GraphKind> {
    let first = match (kinds.next(), hint) {
        (Some(k), Some(h)) => {
            h.ensure(k)?;
            k
        }
        (Some(k), None) => k,
        (None, Some(h)) => return Ok(h),
        (None, None) => return Ok(GraphKind::Undirected),
    };
    for k in kinds {
        first.ensure(k)?;
    }
    Ok(first)
}

pub fn ctmc_to_string(spec: &CtmcSpec) -> String {
    let j = CtmcJson {
        transitions: spec
            .transitions()
            .iter()
            .map(|t| TransitionJson {
                rule: rule_to_json(&t.rule),
                rate: t.rate,
            })
            .collect(),
        initial: graph_to_json(spec.initial()),
    };
    to_pretty(&j)
}

pub fn ctmc_from_str(s: &str) -> Result<CtmcSpec> {
    let j: CtmcJson = serde_json::from_str(s)?;
    let initial = graph_from_json(j.initial)?;
    let mut transitions = Vec::with_capacity(j.transitions.len());
    for t in j.transitions {
        transitions.push(Transition {
            rule: rule_from_json(t.rule)?,
            rate: t.rate,
        });
    }
    CtmcSpec::new(transitions, initial)
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("wire types serialize")
}
