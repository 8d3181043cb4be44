//! Linear rules `O <-o- K -i-> I` and their isomorphism-class keys.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::canon::{canonical_labeling, ColoredGraph};
use crate::category::{pushout, Span};
use crate::error::{Error, Result};
use crate::graph::{Edge, GraphKind, GraphMorphism, Multigraph};

/// A linear rewriting rule: a span of monomorphisms from the context `K`
/// into the output `O` and the input `I`. Applying it to a match of `I`
/// deletes `I \ K` and creates `O \ K`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearRule {
    output: Multigraph,
    context: Multigraph,
    input: Multigraph,
    o: GraphMorphism,
    i: GraphMorphism,
}

/// Key of a rule's isomorphism class.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RuleKey {
    pub kind: GraphKind,
    pub code: Box<[u32]>,
}

/// A canonically labeled rule together with isomorphisms from the original
/// rule's graphs onto the canonical ones. The isomorphisms commute with the
/// rule legs.
#[derive(Clone, Debug)]
pub struct CanonicalRule {
    pub key: RuleKey,
    pub rule: LinearRule,
    pub output_iso: GraphMorphism,
    pub context_iso: GraphMorphism,
    pub input_iso: GraphMorphism,
}

const KEPT: u32 = 0;
const CREATED: u32 = 1;
const DELETED: u32 = 2;

impl LinearRule {
    pub fn new(
        output: Multigraph,
        context: Multigraph,
        input: Multigraph,
        o: GraphMorphism,
        i: GraphMorphism,
    ) -> Result<Self> {
        context.kind().ensure(output.kind())?;
        context.kind().ensure(input.kind())?;
        o.validate(&context, &output)?;
        i.validate(&context, &input)?;
        if !o.is_mono() {
            return Err(Error::NotMono("rule leg o"));
        }
        if !i.is_mono() {
            return Err(Error::NotMono("rule leg i"));
        }
        Ok(LinearRule {
            output,
            context,
            input,
            o,
            i,
        })
    }

    /// Builds a rule from a span `O <- K -> I` with mono legs.
    pub fn from_span(span: Span) -> Result<Self> {
        LinearRule::new(span.left_foot, span.apex, span.right_foot, span.left, span.right)
    }

    /// The identity rule `X <- X -> X`.
    pub fn identity(x: &Multigraph) -> Self {
        let id = GraphMorphism::identity(x);
        LinearRule {
            output: x.clone(),
            context: x.clone(),
            input: x.clone(),
            o: id.clone(),
            i: id,
        }
    }

    /// The rule `∅ <- ∅ -> ∅`, unit of the rule algebra.
    pub fn empty(kind: GraphKind) -> Self {
        LinearRule::identity(&Multigraph::empty(kind))
    }

    /// Rule with empty context: deletes all of `input`, creates all of `output`.
    pub fn discrete_replacement(output: Multigraph, input: Multigraph) -> Result<Self> {
        let k = Multigraph::empty(output.kind());
        LinearRule::new(
            output,
            k,
            input,
            GraphMorphism::from_empty(),
            GraphMorphism::from_empty(),
        )
    }

    /// `n` vertices created from nothing (`x†` for `n = 1`).
    pub fn vertex_creation(kind: GraphKind, n: usize) -> Self {
        LinearRule::discrete_replacement(Multigraph::discrete(kind, n), Multigraph::empty(kind))
            .expect("valid rule")
    }

    /// `n` vertices deleted (`x` for `n = 1`).
    pub fn vertex_deletion(kind: GraphKind, n: usize) -> Self {
        LinearRule::discrete_replacement(Multigraph::empty(kind), Multigraph::discrete(kind, n))
            .expect("valid rule")
    }

    /// `x†^r x^s`: deletes `s` vertices and creates `r`.
    pub fn hw_word(kind: GraphKind, r: usize, s: usize) -> Self {
        LinearRule::discrete_replacement(Multigraph::discrete(kind, r), Multigraph::discrete(kind, s))
            .expect("valid rule")
    }

    /// Creates an undirected edge between two kept vertices.
    pub fn edge_creation() -> Self {
        let two = Multigraph::discrete(GraphKind::Undirected, 2);
        let e = Multigraph::from_edges(GraphKind::Undirected, 2, &[(0, 1)]);
        let incl = GraphMorphism {
            vmap: vec![0, 1],
            emap: vec![],
        };
        let id = GraphMorphism::identity(&two);
        LinearRule::new(e, two.clone(), two, incl, id).expect("valid rule")
    }

    /// Deletes an undirected edge, keeping its endpoints.
    pub fn edge_deletion() -> Self {
        LinearRule::edge_creation().reversed()
    }

    /// The identity rule on two isolated vertices.
    pub fn vertex_pair_identity() -> Self {
        LinearRule::identity(&Multigraph::discrete(GraphKind::Undirected, 2))
    }

    pub fn kind(&self) -> GraphKind {
        self.context.kind()
    }

    pub fn output(&self) -> &Multigraph {
        &self.output
    }

    pub fn context(&self) -> &Multigraph {
        &self.context
    }

    pub fn input(&self) -> &Multigraph {
        &self.input
    }

    pub fn o(&self) -> &GraphMorphism {
        &self.o
    }

    pub fn i(&self) -> &GraphMorphism {
        &self.i
    }

    /// The rule read backwards, `I <- K -> O`.
    pub fn reversed(&self) -> Self {
        LinearRule {
            output: self.input.clone(),
            context: self.context.clone(),
            input: self.output.clone(),
            o: self.i.clone(),
            i: self.o.clone(),
        }
    }

    /// `I <- K -> I`, the rule whose application count matches this one's.
    pub fn input_identity(&self) -> Self {
        LinearRule {
            output: self.input.clone(),
            context: self.context.clone(),
            input: self.input.clone(),
            o: self.i.clone(),
            i: self.i.clone(),
        }
    }

    pub fn as_span(&self) -> Span {
        Span {
            apex: self.context.clone(),
            left_foot: self.output.clone(),
            right_foot: self.input.clone(),
            left: self.o.clone(),
            right: self.i.clone(),
        }
    }

    /// Vertex and edge count change caused by one application.
    pub fn delta(&self) -> (isize, isize) {
        (
            self.output.vertex_count() as isize - self.input.vertex_count() as isize,
            self.output.edge_count() as isize - self.input.edge_count() as isize,
        )
    }

    pub fn key(&self) -> RuleKey {
        let (u, _, _) = self.union_graph();
        RuleKey {
            kind: self.kind(),
            code: canonical_labeling(&u).code.into_boxed_slice(),
        }
    }

    pub fn is_isomorphic(&self, other: &LinearRule) -> bool {
        self.kind() == other.kind() && self.key() == other.key()
    }

    /// The colored graph `O +_K I`, with each item marked as kept, created
    /// or deleted. Its isomorphism class is the rule's. Also returns the
    /// injections of `O` and `I`.
    fn union_graph(&self) -> (ColoredGraph, GraphMorphism, GraphMorphism) {
        let po = pushout(&self.output, &self.input, &self.o, &self.i).expect("rule legs are mono");
        let u = &po.object;
        let mut vcolor = vec![DELETED; u.vertex_count()];
        let mut ecolor = vec![DELETED; u.edge_count()];
        for &v in &po.in_left.vmap {
            vcolor[v] = CREATED;
        }
        for &e in &po.in_left.emap {
            ecolor[e] = CREATED;
        }
        for &k in &self.o.vmap {
            vcolor[po.in_left.vmap[k]] = KEPT;
        }
        for &k in &self.o.emap {
            ecolor[po.in_left.emap[k]] = KEPT;
        }
        let colored = ColoredGraph {
            directed: u.kind().is_directed(),
            vcolor,
            edges: u
                .edges()
                .iter()
                .zip(&ecolor)
                .map(|(e, &c)| (c, e.src, e.tgt))
                .collect(),
        };
        (colored, po.in_left, po.in_right)
    }

    /// Canonically labeled representative of the rule's isomorphism class.
    pub fn canonical(&self) -> CanonicalRule {
        let (u, in_o, in_i) = self.union_graph();
        let labeling = canonical_labeling(&u);
        let nu = u.vcolor.len();
        let mut by_vpos = vec![0; nu];
        for (v, &p) in labeling.vertex_pos.iter().enumerate() {
            by_vpos[p] = v;
        }
        let mut by_epos = vec![0; u.edges.len()];
        for (e, &p) in labeling.edge_pos.iter().enumerate() {
            by_epos[p] = e;
        }

        // Canonical part of `U` selected by color, in canonical order.
        let part = |keep: &dyn Fn(u32) -> bool| -> (Multigraph, Vec<usize>, Vec<usize>) {
            let mut vlocal = vec![usize::MAX; nu];
            let mut n = 0;
            for &v in &by_vpos {
                if keep(u.vcolor[v]) {
                    vlocal[v] = n;
                    n += 1;
                }
            }
            let mut elocal = vec![usize::MAX; u.edges.len()];
            let mut edges = Vec::new();
            for &e in &by_epos {
                let (c, a, b) = u.edges[e];
                if keep(c) {
                    elocal[e] = edges.len();
                    edges.push(Edge {
                        src: vlocal[a],
                        tgt: vlocal[b],
                    });
                }
            }
            (Multigraph::with_fresh_ids(self.kind(), n, edges), vlocal, elocal)
        };
        let (co, ov, oe) = part(&|c| c != DELETED);
        let (ck, kv, ke) = part(&|c| c == KEPT);
        let (ci, iv, ie) = part(&|c| c != CREATED);

        let restrict = |local_v: &[usize], local_e: &[usize], from_v: &[usize], from_e: &[usize]| GraphMorphism {
            vmap: from_v.iter().map(|&x| local_v[x]).collect(),
            emap: from_e.iter().map(|&x| local_e[x]).collect(),
        };
        // `K` sits in `U` through `O`.
        let k_in_u = self.o.then(&in_o);
        let output_iso = restrict(&ov, &oe, &in_o.vmap, &in_o.emap);
        let input_iso = restrict(&iv, &ie, &in_i.vmap, &in_i.emap);
        let context_iso = restrict(&kv, &ke, &k_in_u.vmap, &k_in_u.emap);
        let kept_v: Vec<usize> = by_vpos.iter().copied().filter(|&v| u.vcolor[v] == KEPT).collect();
        let kept_e: Vec<usize> = by_epos.iter().copied().filter(|&e| u.edges[e].0 == KEPT).collect();
        let co_leg = restrict(&ov, &oe, &kept_v, &kept_e);
        let ci_leg = restrict(&iv, &ie, &kept_v, &kept_e);
        let rule = LinearRule {
            output: co,
            context: ck,
            input: ci,
            o: co_leg,
            i: ci_leg,
        };
        debug_assert!(rule.o.is_valid(&rule.context, &rule.output));
        debug_assert!(rule.i.is_valid(&rule.context, &rule.input));
        debug_assert!(output_iso.is_valid(&self.output, &rule.output));
        debug_assert!(input_iso.is_valid(&self.input, &rule.input));
        debug_assert!(context_iso.is_valid(&self.context, &rule.context));
        CanonicalRule {
            key: RuleKey {
                kind: self.kind(),
                code: labeling.code.into_boxed_slice(),
            },
            rule,
            output_iso,
            context_iso,
            input_iso,
        }
    }
}

impl fmt::Display for LinearRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <- {} -> {}", self.output, self.context, self.input)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use GraphKind::Undirected;

    #[test]
    fn named_rules_are_distinct() {
        let keys = [
            LinearRule::empty(Undirected).key(),
            LinearRule::vertex_creation(Undirected, 1).key(),
            LinearRule::vertex_deletion(Undirected, 1).key(),
            LinearRule::edge_creation().key(),
            LinearRule::edge_deletion().key(),
            LinearRule::vertex_pair_identity().key(),
        ];
        for a in 0..keys.len() {
            for b in 0..a {
                assert_ne!(keys[a], keys[b]);
            }
        }
    }

    #[test]
    fn relabeling_keeps_the_key() {
        let p = LinearRule::edge_creation();
        let swap = GraphMorphism {
            vmap: vec![1, 0],
            emap: vec![],
        };
        let o = p.o().then(&GraphMorphism { vmap: vec![1, 0], emap: vec![0] });
        let q = LinearRule::new(
            p.output().permuted(&[1, 0], &[0]),
            p.context().clone(),
            p.input().permuted(&[1, 0], &[]),
            o,
            p.i().then(&swap),
        )
        .unwrap();
        assert_eq!(p.key(), q.key());
    }

    #[test]
    fn key_sees_the_context() {
        // Delete-and-recreate an edge vs keep it.
        let e = Multigraph::from_edges(Undirected, 2, &[(0, 1)]);
        let two = Multigraph::discrete(Undirected, 2);
        let incl = GraphMorphism {
            vmap: vec![0, 1],
            emap: vec![],
        };
        let recreate = LinearRule::new(e.clone(), two, e.clone(), incl.clone(), incl).unwrap();
        assert_ne!(recreate.key(), LinearRule::identity(&e).key());
    }

    #[test]
    fn canonical_representative_is_stable() {
        let p = LinearRule::edge_deletion();
        let c = p.canonical();
        assert_eq!(c.rule.key(), c.key);
        let again = c.rule.canonical();
        assert_eq!(again.rule, c.rule);
        assert_eq!(c.key, p.key());
    }

    #[test]
    fn rejects_non_mono_legs() {
        let two = Multigraph::discrete(Undirected, 2);
        let one = Multigraph::discrete(Undirected, 1);
        let fold = GraphMorphism {
            vmap: vec![0, 0],
            emap: vec![],
        };
        let r = LinearRule::new(one, two.clone(), two.clone(), fold, GraphMorphism::identity(&two));
        assert!(matches!(r, Err(Error::NotMono(_))));
    }
}
