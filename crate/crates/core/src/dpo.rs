//! Admissible matches and double-pushout derivations.

use std::ops::ControlFlow;

use crate::canon::{canonical_form, CanonicalKey};
use crate::category::{pushout, pushout_complement};
use crate::error::{Error, Result};
use crate::graph::{GraphMorphism, Multigraph};
use crate::monos::for_each_mono;
use crate::rule::LinearRule;

/// The full double-pushout diagram of one derivation step. The result is
/// canonically labeled.
#[derive(Clone, Debug)]
pub struct Derivation {
    pub result: Multigraph,
    pub key: CanonicalKey,
    /// `O -> result`.
    pub comatch: GraphMorphism,
    /// The pushout complement `K̄` of `K -> I -> X`.
    pub context: Multigraph,
    /// `K -> K̄`.
    pub context_match: GraphMorphism,
    /// `K̄ -> X`.
    pub context_in_host: GraphMorphism,
    /// `K̄ -> result`.
    pub context_in_result: GraphMorphism,
}

/// Whether the mono `m: I -> X` satisfies the dangling condition for `p`.
pub fn is_admissible(p: &LinearRule, m: &GraphMorphism, x: &Multigraph) -> bool {
    let mut deleted = vec![false; x.vertex_count()];
    for &v in &m.vmap {
        deleted[v] = true;
    }
    for &k in &p.i().vmap {
        deleted[m.vmap[k]] = false;
    }
    let mut in_image = vec![false; x.edge_count()];
    for &e in &m.emap {
        in_image[e] = true;
    }
    x.edges()
        .iter()
        .enumerate()
        .all(|(e, edge)| in_image[e] || !(deleted[edge.src] || deleted[edge.tgt]))
}

/// Visits every admissible match of `p` in `x`.
pub fn for_each_match<F>(p: &LinearRule, x: &Multigraph, mut visit: F) -> Result<()>
where
    F: FnMut(&GraphMorphism) -> ControlFlow<()>,
{
    p.kind().ensure(x.kind())?;
    let deletes_vertices = p.context().vertex_count() < p.input().vertex_count();
    for_each_mono(p.input(), x, |m| {
        if !deletes_vertices || is_admissible(p, m, x) {
            visit(m)
        } else {
            ControlFlow::Continue(())
        }
    })
}

/// All admissible matches of `p` in `x`, as distinct morphisms.
pub fn find_matches(p: &LinearRule, x: &Multigraph) -> Result<Vec<GraphMorphism>> {
    let mut out = Vec::new();
    for_each_match(p, x, |m| {
        out.push(m.clone());
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

pub fn count_matches(p: &LinearRule, x: &Multigraph) -> Result<usize> {
    let mut n = 0;
    for_each_match(p, x, |_| {
        n += 1;
        ControlFlow::Continue(())
    })?;
    Ok(n)
}

/// Applies `p` to `x` along `m` and returns the canonically labeled result.
pub fn derive(p: &LinearRule, m: &GraphMorphism, x: &Multigraph) -> Result<Multigraph> {
    Ok(derive_detailed(p, m, x)?.result)
}

/// Applies `p` along `m` without relabeling the result; its items get
/// fresh ids in pushout order. Intended for hot loops on large graphs.
pub fn derive_unlabeled(p: &LinearRule, m: &GraphMorphism, x: &Multigraph) -> Result<Multigraph> {
    p.kind().ensure(x.kind())?;
    if !m.is_mono() || !m.is_valid(p.input(), x) {
        return Err(Error::InadmissibleMatch);
    }
    let poc = pushout_complement(x, p.i(), m)?.ok_or(Error::InadmissibleMatch)?;
    Ok(pushout(p.output(), &poc.object, p.o(), &poc.k)?.object)
}

pub fn derive_detailed(p: &LinearRule, m: &GraphMorphism, x: &Multigraph) -> Result<Derivation> {
    p.kind().ensure(x.kind())?;
    if !m.is_mono() || !m.is_valid(p.input(), x) {
        return Err(Error::InadmissibleMatch);
    }
    let poc = pushout_complement(x, p.i(), m)?.ok_or(Error::InadmissibleMatch)?;
    let po = pushout(p.output(), &poc.object, p.o(), &poc.k)?;
    let cf = canonical_form(&po.object);
    Ok(Derivation {
        result: cf.representative,
        key: cf.key,
        comatch: po.in_left.then(&cf.relabel),
        context_in_result: po.in_right.then(&cf.relabel),
        context: poc.object,
        context_match: poc.k,
        context_in_host: poc.inclusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::is_isomorphic;
    use crate::graph::GraphKind::Undirected;

    #[test]
    fn vertex_deletion_matches_every_vertex() {
        let x = LinearRule::vertex_deletion(Undirected, 1);
        for n in 0..6 {
            let g = Multigraph::discrete(Undirected, n);
            assert_eq!(count_matches(&x, &g).unwrap(), n);
        }
    }

    #[test]
    fn empty_input_matches_once() {
        let p = LinearRule::vertex_creation(Undirected, 2);
        let g = Multigraph::from_edges(Undirected, 3, &[(0, 1), (1, 2)]);
        assert_eq!(count_matches(&p, &g).unwrap(), 1);
    }

    #[test]
    fn edge_deletion_on_parallel_edges() {
        let p = LinearRule::edge_deletion();
        for n in 0..5 {
            let g = Multigraph::from_edges(Undirected, 2, &vec![(0, 1); n]);
            // Oracle: 2 vertex bijections times n edge choices.
            assert_eq!(count_matches(&p, &g).unwrap(), 2 * n);
        }
    }

    #[test]
    fn dangling_vertices_are_not_matched() {
        let x = LinearRule::vertex_deletion(Undirected, 1);
        let g = Multigraph::from_edges(Undirected, 3, &[(0, 1)]);
        let ms = find_matches(&x, &g).unwrap();
        assert_eq!(ms, vec![GraphMorphism { vmap: vec![2], emap: vec![] }]);
    }

    #[test]
    fn derivations() {
        let create = LinearRule::vertex_creation(Undirected, 1);
        let g = Multigraph::discrete(Undirected, 3);
        let m = GraphMorphism::from_empty();
        let r = derive(&create, &m, &g).unwrap();
        assert!(is_isomorphic(&r, &Multigraph::discrete(Undirected, 4)).unwrap());

        let tri = Multigraph::from_edges(Undirected, 3, &[(0, 1), (1, 2), (0, 2)]);
        let path = Multigraph::from_edges(Undirected, 3, &[(0, 1), (1, 2)]);
        let del = LinearRule::edge_deletion();
        for m in find_matches(&del, &tri).unwrap() {
            let d = derive_detailed(&del, &m, &tri).unwrap();
            assert!(is_isomorphic(&d.result, &path).unwrap());
            assert!(d.comatch.is_valid(del.output(), &d.result));
        }

        let id = LinearRule::identity(&tri);
        let r = derive(&id, &GraphMorphism::identity(&tri), &tri).unwrap();
        assert!(is_isomorphic(&r, &tri).unwrap());
    }

    #[test]
    fn inadmissible_match_is_an_error() {
        let x = LinearRule::vertex_deletion(Undirected, 1);
        let g = Multigraph::from_edges(Undirected, 2, &[(0, 1)]);
        let m = GraphMorphism { vmap: vec![0], emap: vec![] };
        assert!(matches!(derive(&x, &m, &g), Err(Error::InadmissibleMatch)));
    }
}
