//! Sequential composition of rules along overlaps, and the two directions
//! of the correspondence between two-step derivations and one-step
//! derivations of composite rules.

use std::ops::ControlFlow;

use crate::category::{
    compose_spans, pullback, pushout, pushout_complement, pushout_mediator, Pushout, PushoutComplement, Span,
};
use crate::dpo::derive_detailed;
use crate::error::{Error, Result};
use crate::graph::{GraphMorphism, Multigraph, PartialMorphism};
use crate::monos::for_each_mono;
use crate::rule::{CanonicalRule, LinearRule};

/// A span `I₂ <- M -> O₁` of monos along which `p₂` is applied after `p₁`.
///
/// Overlaps are identified up to isomorphisms of `M` commuting with both
/// legs, so a class is determined by the relation it induces between `I₂`
/// and `O₁`. The stored representative has `M` equal to the subgraph of
/// `I₂` it covers (items in `I₂` order, ids kept) and `into_input2` the
/// inclusion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleOverlap {
    pub apex: Multigraph,
    pub into_input2: GraphMorphism,
    pub into_output1: GraphMorphism,
}

impl RuleOverlap {
    /// The empty overlap, giving the disjoint union of the two rules.
    pub fn trivial(p2: &LinearRule) -> Self {
        RuleOverlap {
            apex: Multigraph::empty(p2.kind()),
            into_input2: GraphMorphism::from_empty(),
            into_output1: GraphMorphism::from_empty(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.apex.vertex_count() == 0 && self.apex.edge_count() == 0
    }

    /// Brings an arbitrary mono span `I₂ <- M -> O₁` into the stored form.
    pub fn normalized(input2: &Multigraph, into_input2: &GraphMorphism, into_output1: &GraphMorphism) -> Result<Self> {
        if !into_input2.is_mono() || !into_output1.is_mono() {
            return Err(Error::NotMono("overlap leg"));
        }
        let mut vpairs: Vec<(usize, usize)> =
            into_input2.vmap.iter().copied().zip(into_output1.vmap.iter().copied()).collect();
        let mut epairs: Vec<(usize, usize)> =
            into_input2.emap.iter().copied().zip(into_output1.emap.iter().copied()).collect();
        vpairs.sort_unstable();
        epairs.sort_unstable();
        let vs: Vec<usize> = vpairs.iter().map(|p| p.0).collect();
        let es: Vec<usize> = epairs.iter().map(|p| p.0).collect();
        let (apex, into_input2) = input2.subgraph(&vs, &es)?;
        Ok(RuleOverlap {
            apex,
            into_input2,
            into_output1: GraphMorphism {
                vmap: vpairs.iter().map(|p| p.1).collect(),
                emap: epairs.iter().map(|p| p.1).collect(),
            },
        })
    }
}

/// Every object and morphism of the composition diagram.
#[derive(Clone, Debug)]
pub struct CompositionDiagram {
    /// `N₂₁` with `in_left: I₂ -> N₂₁` and `in_right: O₁ -> N₂₁`.
    pub glued: Pushout,
    /// `K̄₂`, complement of `K₂ -> I₂ -> N₂₁`.
    pub context2: PushoutComplement,
    /// `K̄₁`, complement of `K₁ -> O₁ -> N₂₁`.
    pub context1: PushoutComplement,
    /// `O₂₁` with `in_left: O₂ -> O₂₁` and `in_right: K̄₂ -> O₂₁`.
    pub output: Pushout,
    /// `I₂₁` with `in_left: I₁ -> I₂₁` and `in_right: K̄₁ -> I₂₁`.
    pub input: Pushout,
    /// `O₂₁ <- K₂₁ -> I₂₁`.
    pub span: Span,
    /// `K₂₁ -> K̄₂` and `K₂₁ -> K̄₁`, the pullback projections.
    pub context_to_2: GraphMorphism,
    pub context_to_1: GraphMorphism,
    /// The composite, canonically labeled, with isos from `span`'s graphs.
    pub composite: CanonicalRule,
}

fn glue(p2: &LinearRule, ov: &RuleOverlap, p1: &LinearRule) -> Result<Pushout> {
    pushout(p2.input(), p1.output(), &ov.into_input2, &ov.into_output1)
}

/// Both pushout complements required for admissibility, if they exist.
fn complements(
    p2: &LinearRule,
    p1: &LinearRule,
    glued: &Pushout,
) -> Result<Option<(PushoutComplement, PushoutComplement)>> {
    let Some(c2) = pushout_complement(&glued.object, p2.i(), &glued.in_left)? else {
        return Ok(None);
    };
    let Some(c1) = pushout_complement(&glued.object, p1.o(), &glued.in_right)? else {
        return Ok(None);
    };
    Ok(Some((c2, c1)))
}

pub fn is_admissible_overlap(p2: &LinearRule, ov: &RuleOverlap, p1: &LinearRule) -> Result<bool> {
    let glued = glue(p2, ov, p1)?;
    Ok(complements(p2, p1, &glued)?.is_some())
}

/// One representative per class of admissible overlaps of `p₂` into `p₁`.
pub fn enumerate_rule_overlaps(p2: &LinearRule, p1: &LinearRule) -> Result<Vec<RuleOverlap>> {
    let mut out = Vec::new();
    for_each_overlap(p2, p1, |ov| {
        out.push(ov.clone());
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

/// Visits all admissible overlaps, ordered by covered vertex set, then
/// covered edge set, then the map into `O₁`.
pub fn for_each_overlap<F>(p2: &LinearRule, p1: &LinearRule, mut visit: F) -> Result<()>
where
    F: FnMut(&RuleOverlap) -> ControlFlow<()>,
{
    p2.kind().ensure(p1.kind())?;
    let i2 = p2.input();
    let o1 = p1.output();
    let nv = i2.vertex_count();
    if nv >= usize::BITS as usize || i2.edge_count() >= usize::BITS as usize {
        return Err(Error::Precondition("rule input too large for overlap enumeration".into()));
    }
    let max_v = nv.min(o1.vertex_count());
    let mut vsets: Vec<Vec<usize>> = (0..1usize << nv)
        .filter(|mask| (mask.count_ones() as usize) <= max_v)
        .map(|mask| (0..nv).filter(|v| mask >> v & 1 == 1).collect())
        .collect();
    vsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));

    for vs in vsets {
        let mut inside = vec![false; nv];
        for &v in &vs {
            inside[v] = true;
        }
        let candidates: Vec<usize> = (0..i2.edge_count())
            .filter(|&e| {
                let ed = i2.edge(e);
                inside[ed.src] && inside[ed.tgt]
            })
            .collect();
        let max_e = candidates.len().min(o1.edge_count());
        let mut esets: Vec<Vec<usize>> = (0..1usize << candidates.len())
            .filter(|mask| (mask.count_ones() as usize) <= max_e)
            .map(|mask| {
                (0..candidates.len())
                    .filter(|j| mask >> j & 1 == 1)
                    .map(|j| candidates[j])
                    .collect()
            })
            .collect();
        esets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));

        for es in esets {
            let (apex, incl) = i2.subgraph(&vs, &es)?;
            let mut flow = ControlFlow::Continue(());
            let mut failure = None;
            for_each_mono(&apex, o1, |m| {
                let ov = RuleOverlap {
                    apex: apex.clone(),
                    into_input2: incl.clone(),
                    into_output1: m.clone(),
                };
                match is_admissible_overlap(p2, &ov, p1) {
                    Ok(true) => {
                        flow = visit(&ov);
                        flow
                    }
                    Ok(false) => ControlFlow::Continue(()),
                    Err(e) => {
                        failure = Some(e);
                        ControlFlow::Break(())
                    }
                }
            })?;
            if let Some(e) = failure {
                return Err(e);
            }
            if flow.is_break() {
                return Ok(());
            }
        }
    }
    Ok(())
}

/// The composite rule `p₂ ◁_ov p₁`, canonically labeled.
pub fn compose_rules(p2: &LinearRule, ov: &RuleOverlap, p1: &LinearRule) -> Result<LinearRule> {
    Ok(compose_rules_detailed(p2, ov, p1)?.composite.rule)
}

pub fn compose_rules_detailed(p2: &LinearRule, ov: &RuleOverlap, p1: &LinearRule) -> Result<CompositionDiagram> {
    p2.kind().ensure(p1.kind())?;
    ov.into_input2.validate(&ov.apex, p2.input())?;
    ov.into_output1.validate(&ov.apex, p1.output())?;
    let glued = glue(p2, ov, p1)?;
    let (context2, context1) = complements(p2, p1, &glued)?.ok_or(Error::InadmissibleOverlap)?;
    let output = pushout(p2.output(), &context2.object, p2.o(), &context2.k)?;
    let input = pushout(p1.input(), &context1.object, p1.i(), &context1.k)?;
    let left = Span {
        apex: context2.object.clone(),
        left_foot: output.object.clone(),
        right_foot: glued.object.clone(),
        left: output.in_right.clone(),
        right: context2.inclusion.clone(),
    };
    let right = Span {
        apex: context1.object.clone(),
        left_foot: glued.object.clone(),
        right_foot: input.object.clone(),
        left: context1.inclusion.clone(),
        right: input.in_right.clone(),
    };
    let pb = pullback(&left.apex, &right.apex, &glued.object, &left.right, &right.left)?;
    let span = compose_spans(&left, &right)?;
    debug_assert_eq!(span.apex, pb.object);
    let rule = LinearRule::from_span(span.clone())?;
    let composite = rule.canonical();
    Ok(CompositionDiagram {
        glued,
        context2,
        context1,
        output,
        input,
        span,
        context_to_2: pb.to_left,
        context_to_1: pb.to_right,
        composite,
    })
}

/// `p₂ ⊎ p₁`: composition along the empty overlap.
pub fn disjoint_union_rule(p2: &LinearRule, p1: &LinearRule) -> Result<LinearRule> {
    compose_rules(p2, &RuleOverlap::trivial(p2), p1)
}

/// Result of merging a two-step derivation into one step.
#[derive(Clone, Debug)]
pub struct Synthesis {
    pub overlap: RuleOverlap,
    /// Match of the canonical composite into the initial graph.
    pub matching: GraphMorphism,
    pub composite: LinearRule,
}

/// Given `m₁` admissible for `p₁` in `x0` and `m₂` admissible for `p₂` in
/// `derive(p₁, m₁, x0)`, returns the overlap the two steps share, the
/// composite rule and its match into `x0`.
pub fn synthesize(
    p2: &LinearRule,
    m2: &GraphMorphism,
    p1: &LinearRule,
    m1: &GraphMorphism,
    x0: &Multigraph,
) -> Result<Synthesis> {
    let step1 = derive_detailed(p1, m1, x0)?;
    let x1 = &step1.result;
    if !m2.is_mono() || !m2.is_valid(p2.input(), x1) {
        return Err(Error::InadmissibleMatch);
    }
    let pb = pullback(p2.input(), p1.output(), x1, m2, &step1.comatch)?;
    let overlap = RuleOverlap::normalized(p2.input(), &pb.to_left, &pb.to_right)?;
    let diagram = compose_rules_detailed(p2, &overlap, p1)?;

    // K̄₁ -> N₂₁ -> X₁ lands inside the part of X₁ kept from X₀.
    let glued_to_x1 =
        pushout_mediator(&diagram.glued, m2, &step1.comatch).ok_or(Error::InadmissibleMatch)?;
    let back = step1.context_in_result.inverse_on(x1);
    let context1_to_x0 = through_partial(
        &diagram.context1.inclusion.then(&glued_to_x1),
        &back,
        &step1.context_in_host,
    )
    .ok_or(Error::InadmissibleMatch)?;
    let n = pushout_mediator(&diagram.input, m1, &context1_to_x0).ok_or(Error::InadmissibleMatch)?;
    let matching = diagram.composite.input_iso.inverse().then(&n);
    Ok(Synthesis {
        overlap,
        matching,
        composite: diagram.composite.rule,
    })
}

/// Splits a match `n` of the composite `p₂ ◁_ov p₁` into `x0` back into the
/// matches `(m₁, m₂)` of the two-step derivation.
pub fn analyze(
    p2: &LinearRule,
    ov: &RuleOverlap,
    p1: &LinearRule,
    n: &GraphMorphism,
    x0: &Multigraph,
) -> Result<(GraphMorphism, GraphMorphism)> {
    let diagram = compose_rules_detailed(p2, ov, p1)?;
    let composite = &diagram.composite.rule;
    if !n.is_mono() || !n.is_valid(composite.input(), x0) {
        return Err(Error::InadmissibleMatch);
    }
    let n_raw = diagram.composite.input_iso.then(n);
    let m1 = diagram.input.in_left.then(&n_raw);
    let step1 = derive_detailed(p1, &m1, x0)?;
    let x1 = &step1.result;

    let back = step1.context_in_host.inverse_on(x0);
    let context1_to_x1 = through_partial(&diagram.input.in_right.then(&n_raw), &back, &step1.context_in_result)
        .ok_or(Error::InadmissibleMatch)?;
    // N₂₁ is also the pushout of O₁ <- K₁ -> K̄₁.
    let square = Pushout {
        object: diagram.glued.object.clone(),
        in_left: diagram.glued.in_right.clone(),
        in_right: diagram.context1.inclusion.clone(),
    };
    let glued_to_x1 = pushout_mediator(&square, &step1.comatch, &context1_to_x1).ok_or(Error::InadmissibleMatch)?;
    let m2 = diagram.glued.in_left.then(&glued_to_x1);
    debug_assert!(m2.is_valid(p2.input(), x1));
    Ok((m1, m2))
}

/// `f` followed by the partial map `back` and then `g`; `None` if `f`
/// leaves the domain of `back`.
fn through_partial(f: &GraphMorphism, back: &PartialMorphism, g: &GraphMorphism) -> Option<GraphMorphism> {
    let vmap = f
        .vmap
        .iter()
        .map(|&v| back.vmap[v].map(|w| g.vmap[w]))
        .collect::<Option<Vec<_>>>()?;
    let emap = f
        .emap
        .iter()
        .map(|&e| back.emap[e].map(|w| g.emap[w]))
        .collect::<Option<Vec<_>>>()?;
    Some(GraphMorphism { vmap, emap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::is_isomorphic;
    use crate::dpo::{derive, find_matches};
    use crate::graph::GraphKind::Undirected;

    fn x() -> LinearRule {
        LinearRule::vertex_deletion(Undirected, 1)
    }

    fn xdag() -> LinearRule {
        LinearRule::vertex_creation(Undirected, 1)
    }

    #[test]
    fn hw_overlap_counts() {
        assert_eq!(enumerate_rule_overlaps(&x(), &xdag()).unwrap().len(), 2);
        assert_eq!(enumerate_rule_overlaps(&xdag(), &x()).unwrap().len(), 1);
    }

    #[test]
    fn edge_overlap_classes() {
        let ovs = enumerate_rule_overlaps(&LinearRule::edge_deletion(), &LinearRule::edge_creation()).unwrap();
        let mut by_shape = [0usize; 4];
        for ov in &ovs {
            let idx = match (ov.apex.vertex_count(), ov.apex.edge_count()) {
                (0, 0) => 0,
                (1, 0) => 1,
                (2, 0) => 2,
                (2, 1) => 3,
                other => panic!("unexpected overlap {other:?}"),
            };
            by_shape[idx] += 1;
        }
        assert_eq!(by_shape, [1, 4, 2, 2]);
    }

    #[test]
    fn annihilating_a_created_vertex_gives_the_empty_rule() {
        let ovs = enumerate_rule_overlaps(&x(), &xdag()).unwrap();
        let full = ovs.iter().find(|o| !o.is_trivial()).unwrap();
        let q = compose_rules(&x(), full, &xdag()).unwrap();
        assert!(q.is_isomorphic(&LinearRule::empty(Undirected)));
    }

    #[test]
    fn trivial_overlap_is_disjoint_union() {
        let q = disjoint_union_rule(&xdag(), &xdag()).unwrap();
        assert!(q.is_isomorphic(&LinearRule::vertex_creation(Undirected, 2)));
        let q = disjoint_union_rule(&xdag(), &x()).unwrap();
        assert!(q.is_isomorphic(&LinearRule::hw_word(Undirected, 1, 1)));
    }

    #[test]
    fn deleting_a_created_edge_is_the_identity_on_two_vertices() {
        let del = LinearRule::edge_deletion();
        let create = LinearRule::edge_creation();
        let ov = RuleOverlap {
            apex: del.input().clone(),
            into_input2: GraphMorphism::identity(del.input()),
            into_output1: GraphMorphism::identity(create.output()),
        };
        let q = compose_rules(&del, &ov, &create).unwrap();
        assert!(q.is_isomorphic(&LinearRule::vertex_pair_identity()));
    }

    #[test]
    fn synthesis_examples() {
        let empty = Multigraph::empty(Undirected);
        let m = GraphMorphism::from_empty();
        let s = synthesize(&xdag(), &m, &xdag(), &m, &empty).unwrap();
        assert!(s.overlap.is_trivial());
        assert!(s.composite.is_isomorphic(&LinearRule::vertex_creation(Undirected, 2)));

        let one = derive(&xdag(), &m, &empty).unwrap();
        let m2 = find_matches(&x(), &one).unwrap().remove(0);
        let s = synthesize(&x(), &m2, &xdag(), &m, &empty).unwrap();
        assert_eq!(s.overlap.apex.vertex_count(), 1);
        assert!(s.composite.is_isomorphic(&LinearRule::empty(Undirected)));
        let (a1, a2) = analyze(&x(), &s.overlap, &xdag(), &s.matching, &empty).unwrap();
        assert_eq!((a1, a2), (m, m2));
    }

    #[test]
    fn edge_round_trip() {
        let two = Multigraph::discrete(Undirected, 2);
        let create = LinearRule::edge_creation();
        let del = LinearRule::edge_deletion();
        let m1 = find_matches(&create, &two).unwrap().remove(0);
        let x1 = derive(&create, &m1, &two).unwrap();
        for m2 in find_matches(&del, &x1).unwrap() {
            let s = synthesize(&del, &m2, &create, &m1, &two).unwrap();
            assert!(s.composite.is_isomorphic(&LinearRule::vertex_pair_identity()));
            let r = derive(&s.composite, &s.matching, &two).unwrap();
            assert!(is_isomorphic(&r, &two).unwrap());
            let back = analyze(&del, &s.overlap, &create, &s.matching, &two).unwrap();
            assert_eq!(back, (m1.clone(), m2.clone()));
        }
    }

    #[test]
    fn independent_deletions_split_into_singletons() {
        let two = Multigraph::discrete(Undirected, 2);
        let ov = RuleOverlap::trivial(&x());
        let q = compose_rules(&x(), &ov, &x()).unwrap();
        for n in find_matches(&q, &two).unwrap() {
            let (m1, m2) = analyze(&x(), &ov, &x(), &n, &two).unwrap();
            assert_eq!(m1.vmap.len(), 1);
            assert_eq!(m2.vmap.len(), 1);
            let x1 = derive(&x(), &m1, &two).unwrap();
            assert_eq!(x1.vertex_count(), 1);
        }
    }
}
