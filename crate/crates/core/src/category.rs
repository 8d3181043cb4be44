//! Pushouts, pullbacks, pushout complements and span composition in the
//! categories of finite directed and undirected multigraphs.
//!
//! Morphisms are index maps; every construction takes the graphs it needs
//! explicitly. A morphism's domain sizes are its map lengths, which is all
//! a pushout needs to know about its apex.

use crate::error::{Error, Result};
use crate::graph::{Edge, GraphMorphism, Multigraph};

/// A pushout object with its two injections.
#[derive(Clone, Debug)]
pub struct Pushout {
    pub object: Multigraph,
    pub in_left: GraphMorphism,
    pub in_right: GraphMorphism,
}

/// A pullback object with its two projections.
#[derive(Clone, Debug)]
pub struct Pullback {
    pub object: Multigraph,
    pub to_left: GraphMorphism,
    pub to_right: GraphMorphism,
}

/// `complement --inclusion--> host` together with `K --k--> complement`.
#[derive(Clone, Debug)]
pub struct PushoutComplement {
    pub object: Multigraph,
    pub k: GraphMorphism,
    pub inclusion: GraphMorphism,
}

/// A span `left_foot <-left- apex -right-> right_foot`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Span {
    pub apex: Multigraph,
    pub left_foot: Multigraph,
    pub right_foot: Multigraph,
    pub left: GraphMorphism,
    pub right: GraphMorphism,
}

/// A cospan `left_foot -left-> target <-right- right_foot`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cospan {
    pub left_foot: Multigraph,
    pub right_foot: Multigraph,
    pub target: Multigraph,
    pub left: GraphMorphism,
    pub right: GraphMorphism,
}

impl Span {
    pub fn new(
        apex: Multigraph,
        left_foot: Multigraph,
        right_foot: Multigraph,
        left: GraphMorphism,
        right: GraphMorphism,
    ) -> Result<Self> {
        left.validate(&apex, &left_foot)?;
        right.validate(&apex, &right_foot)?;
        Ok(Span {
            apex,
            left_foot,
            right_foot,
            left,
            right,
        })
    }

    pub fn identity(g: &Multigraph) -> Self {
        let id = GraphMorphism::identity(g);
        Span {
            apex: g.clone(),
            left_foot: g.clone(),
            right_foot: g.clone(),
            left: id.clone(),
            right: id,
        }
    }

    pub fn is_mono(&self) -> bool {
        self.left.is_mono() && self.right.is_mono()
    }

    /// Relabels both feet onto their canonical representatives.
    pub fn canonically_aligned(&self) -> Span {
        let lf = crate::canon::canonical_form(&self.left_foot);
        let rf = crate::canon::canonical_form(&self.right_foot);
        Span {
            apex: self.apex.clone(),
            left_foot: lf.representative,
            right_foot: rf.representative,
            left: self.left.then(&lf.relabel),
            right: self.right.then(&rf.relabel),
        }
    }
}

/// Pushout of `left: A -> B` and `right: A -> C`. At least one leg must be
/// injective. The object is the quotient of `B ⊎ C` by `left(a) ~ right(a)`;
/// each class is indexed by its least element (all of `B` before `C`).
pub fn pushout(
    b: &Multigraph,
    c: &Multigraph,
    left: &GraphMorphism,
    right: &GraphMorphism,
) -> Result<Pushout> {
    b.kind().ensure(c.kind())?;
    if left.vmap.len() != right.vmap.len() || left.emap.len() != right.emap.len() {
        return Err(Error::Precondition("pushout legs have different domains".into()));
    }
    if !left.is_mono() && !right.is_mono() {
        return Err(Error::Precondition("pushout requires at least one mono leg".into()));
    }
    let (nb, nc) = (b.vertex_count(), c.vertex_count());
    let (mb, mc) = (b.edge_count(), c.edge_count());

    let mut vuf = UnionFind::new(nb + nc);
    for (x, y) in left.vmap.iter().zip(&right.vmap) {
        vuf.union(*x, nb + *y);
    }
    let mut euf = UnionFind::new(mb + mc);
    for (x, y) in left.emap.iter().zip(&right.emap) {
        euf.union(*x, mb + *y);
    }

    let vclass = vuf.dense_classes();
    let eclass = euf.dense_classes();
    let nv = vclass.iter().copied().max().map_or(0, |m| m + 1);
    let ne = eclass.iter().copied().max().map_or(0, |m| m + 1);

    let mut edges = vec![None; ne];
    for (e, edge) in b.edges().iter().enumerate() {
        edges[eclass[e]].get_or_insert(Edge {
            src: vclass[edge.src],
            tgt: vclass[edge.tgt],
        });
    }
    for (e, edge) in c.edges().iter().enumerate() {
        edges[eclass[mb + e]].get_or_insert(Edge {
            src: vclass[nb + edge.src],
            tgt: vclass[nb + edge.tgt],
        });
    }
    let edges: Vec<Edge> = edges.into_iter().map(|e| e.expect("every class has a member")).collect();
    let object = Multigraph::with_fresh_ids(b.kind(), nv, edges);
    let in_left = GraphMorphism {
        vmap: vclass[..nb].to_vec(),
        emap: eclass[..mb].to_vec(),
    };
    let in_right = GraphMorphism {
        vmap: vclass[nb..].to_vec(),
        emap: eclass[mb..].to_vec(),
    };
    debug_assert!(in_left.is_valid(b, &object) && in_right.is_valid(c, &object));
    Ok(Pushout {
        object,
        in_left,
        in_right,
    })
}

/// The mediating morphism out of a pushout induced by a commuting cocone
/// `f: B -> X`, `g: C -> X`. Returns `None` when the cocone does not commute.
pub fn pushout_mediator(po: &Pushout, f: &GraphMorphism, g: &GraphMorphism) -> Option<GraphMorphism> {
    let mut vmap = vec![usize::MAX; po.object.vertex_count()];
    let mut emap = vec![usize::MAX; po.object.edge_count()];
    fn put(slot: &mut usize, value: usize) -> bool {
        if *slot == usize::MAX {
            *slot = value;
            true
        } else {
            *slot == value
        }
    }
    for (x, &d) in po.in_left.vmap.iter().enumerate() {
        if !put(&mut vmap[d], f.vmap[x]) {
            return None;
        }
    }
    for (x, &d) in po.in_right.vmap.iter().enumerate() {
        if !put(&mut vmap[d], g.vmap[x]) {
            return None;
        }
    }
    for (x, &d) in po.in_left.emap.iter().enumerate() {
        if !put(&mut emap[d], f.emap[x]) {
            return None;
        }
    }
    for (x, &d) in po.in_right.emap.iter().enumerate() {
        if !put(&mut emap[d], g.emap[x]) {
            return None;
        }
    }
    Some(GraphMorphism { vmap, emap })
}

/// Pullback of `f: B -> D` and `g: C -> D` as the agreement subobject of
/// `B × C`. For undirected graphs an edge pair whose endpoint agreement set
/// has more than two elements has no incidence in the pullback; this only
/// happens when neither leg is injective and is reported as an error.
pub fn pullback(
    b: &Multigraph,
    c: &Multigraph,
    d: &Multigraph,
    f: &GraphMorphism,
    g: &GraphMorphism,
) -> Result<Pullback> {
    b.kind().ensure(c.kind())?;
    b.kind().ensure(d.kind())?;
    if f.vmap.iter().chain(&g.vmap).any(|&v| v >= d.vertex_count())
        || f.emap.iter().chain(&g.emap).any(|&e| e >= d.edge_count())
    {
        return Err(Error::Precondition("pullback legs do not share a target".into()));
    }
    let mut vfiber = vec![Vec::new(); d.vertex_count()];
    for (y, &t) in g.vmap.iter().enumerate() {
        vfiber[t].push(y);
    }
    let mut efiber = vec![Vec::new(); d.edge_count()];
    for (y, &t) in g.emap.iter().enumerate() {
        efiber[t].push(y);
    }

    let mut pairs = Vec::new();
    let mut index = std::collections::HashMap::new();
    for (x, &t) in f.vmap.iter().enumerate() {
        for &y in &vfiber[t] {
            index.insert((x, y), pairs.len());
            pairs.push((x, y));
        }
    }
    let mut epairs = Vec::new();
    let mut edges = Vec::new();
    for (x, &t) in f.emap.iter().enumerate() {
        for &y in &efiber[t] {
            let (ex, ey) = (b.edge(x), c.edge(y));
            let edge = if b.kind().is_directed() {
                Edge {
                    src: index[&(ex.src, ey.src)],
                    tgt: index[&(ex.tgt, ey.tgt)],
                }
            } else {
                let mut ends = Vec::with_capacity(4);
                for a in [ex.src, ex.tgt] {
                    for a2 in [ey.src, ey.tgt] {
                        if let Some(&p) = index.get(&(a, a2)) {
                            ends.push(p);
                        }
                    }
                }
                ends.sort_unstable();
                ends.dedup();
                match ends.as_slice() {
                    [p] => Edge { src: *p, tgt: *p },
                    [p, q] => Edge { src: *p, tgt: *q },
                    _ => {
                        return Err(Error::Precondition(
                            "undirected pullback along two non-injective legs".into(),
                        ))
                    }
                }
            };
            epairs.push((x, y));
            edges.push(edge);
        }
    }
    let object = Multigraph::with_fresh_ids(b.kind(), pairs.len(), edges);
    let to_left = GraphMorphism {
        vmap: pairs.iter().map(|p| p.0).collect(),
        emap: epairs.iter().map(|p| p.0).collect(),
    };
    let to_right = GraphMorphism {
        vmap: pairs.iter().map(|p| p.1).collect(),
        emap: epairs.iter().map(|p| p.1).collect(),
    };
    debug_assert!(to_left.is_valid(&object, b) && to_right.is_valid(&object, c));
    Ok(Pullback {
        object,
        to_left,
        to_right,
    })
}

/// Pushout complement of `K -i-> I -m-> X` for injective `i`, `m`.
///
/// With both maps injective only the dangling condition can fail: an edge
/// of `X` that survives may not touch a deleted vertex. The complement is
/// `X` minus the images of `I \ i(K)`, keeping `X`'s ids. Returns `None`
/// when no complement exists.
pub fn pushout_complement(
    host: &Multigraph,
    i: &GraphMorphism,
    m: &GraphMorphism,
) -> Result<Option<PushoutComplement>> {
    if !i.is_mono() {
        return Err(Error::NotMono("pushout complement leg i"));
    }
    if !m.is_mono() {
        return Err(Error::NotMono("match m"));
    }
    let mut del_v = vec![false; host.vertex_count()];
    let mut del_e = vec![false; host.edge_count()];
    for &v in &m.vmap {
        del_v[v] = true;
    }
    for &e in &m.emap {
        del_e[e] = true;
    }
    for &kv in &i.vmap {
        del_v[m.vmap[kv]] = false;
    }
    for &ke in &i.emap {
        del_e[m.emap[ke]] = false;
    }
    for (e, edge) in host.edges().iter().enumerate() {
        if !del_e[e] && (del_v[edge.src] || del_v[edge.tgt]) {
            return Ok(None);
        }
    }
    let kept_v: Vec<usize> = (0..host.vertex_count()).filter(|&v| !del_v[v]).collect();
    let kept_e: Vec<usize> = (0..host.edge_count()).filter(|&e| !del_e[e]).collect();
    let (object, inclusion) = host.subgraph(&kept_v, &kept_e)?;

    let mut vlocal = vec![usize::MAX; host.vertex_count()];
    for (idx, &v) in kept_v.iter().enumerate() {
        vlocal[v] = idx;
    }
    let mut elocal = vec![usize::MAX; host.edge_count()];
    for (idx, &e) in kept_e.iter().enumerate() {
        elocal[e] = idx;
    }
    let k = GraphMorphism {
        vmap: i.vmap.iter().map(|&kv| vlocal[m.vmap[kv]]).collect(),
        emap: i.emap.iter().map(|&ke| elocal[m.emap[ke]]).collect(),
    };
    let poc = PushoutComplement {
        object,
        k,
        inclusion,
    };
    debug_assert!(complement_square_is_pushout(host, i, m, &poc));
    Ok(Some(poc))
}

/// Re-checks a pushout complement: the mediator from `pushout(i, k)` to the
/// host must be a bijection.
pub fn complement_square_is_pushout(
    host: &Multigraph,
    i: &GraphMorphism,
    m: &GraphMorphism,
    poc: &PushoutComplement,
) -> bool {
    // `pushout` only needs the feet; `I` is rebuilt as the image of `m`.
    let i_vertices = m.vmap.len();
    let i_edges: Vec<Edge> = m
        .emap
        .iter()
        .map(|&e| {
            let he = host.edge(e);
            let pos = |v: usize| m.vmap.iter().position(|&x| x == v).expect("incident vertex in image");
            Edge {
                src: pos(he.src),
                tgt: pos(he.tgt),
            }
        })
        .collect();
    let input = Multigraph::with_fresh_ids(host.kind(), i_vertices, i_edges);
    let Ok(po) = pushout(&input, &poc.object, i, &poc.k) else {
        return false;
    };
    match pushout_mediator(&po, m, &poc.inclusion) {
        Some(med) => med.is_bijective_onto(host) && med.is_valid(&po.object, host),
        None => false,
    }
}

/// Composes `s = (E <- D -> C)` after `r = (C <- B -> A)` by pulling back
/// `D -> C <- B`. The middle objects must be identical.
pub fn compose_spans(s: &Span, r: &Span) -> Result<Span> {
    if s.right_foot != r.left_foot {
        return Err(Error::MiddleObjectMismatch);
    }
    let pb = pullback(&s.apex, &r.apex, &s.right_foot, &s.right, &r.left)?;
    Ok(Span {
        left: pb.to_left.then(&s.left),
        right: pb.to_right.then(&r.right),
        apex: pb.object,
        left_foot: s.left_foot.clone(),
        right_foot: r.right_foot.clone(),
    })
}

/// Span composition after realigning both middle objects onto their common
/// canonical representative. Fails when they are not isomorphic.
pub fn compose_spans_aligned(s: &Span, r: &Span) -> Result<Span> {
    let sm = crate::canon::canonical_form(&s.right_foot);
    let rm = crate::canon::canonical_form(&r.left_foot);
    if sm.key != rm.key {
        return Err(Error::MiddleObjectMismatch);
    }
    let s2 = Span {
        right_foot: sm.representative.clone(),
        right: s.right.then(&sm.relabel),
        ..s.clone()
    };
    let r2 = Span {
        left_foot: rm.representative,
        left: r.left.then(&rm.relabel),
        ..r.clone()
    };
    compose_spans(&s2, &r2)
}

/// Whether two spans with the same feet are isomorphic: an apex
/// isomorphism commuting with both legs.
pub fn spans_isomorphic(a: &Span, b: &Span) -> bool {
    if a.left_foot != b.left_foot || a.right_foot != b.right_foot {
        return false;
    }
    if !a.is_mono() || !b.is_mono() {
        return false;
    }
    // Mono-legged spans over fixed feet are determined by their joint image.
    joint_image(a) == joint_image(b)
}

type Pairs = Vec<(usize, usize)>;

fn joint_image(s: &Span) -> (Pairs, Pairs) {
    let mut v: Pairs = s.left.vmap.iter().copied().zip(s.right.vmap.iter().copied()).collect();
    let mut e: Pairs = s.left.emap.iter().copied().zip(s.right.emap.iter().copied()).collect();
    v.sort_unstable();
    e.sort_unstable();
    (v, e)
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Union keeping the smaller index as root.
    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    /// Class index per element, classes numbered by their least element.
    pub(crate) fn dense_classes(&mut self) -> Vec<usize> {
        let n = self.parent.len();
        let mut id = vec![usize::MAX; n];
        let mut next = 0;
        (0..n)
            .map(|x| {
                let r = self.find(x);
                if id[r] == usize::MAX {
                    id[r] = next;
                    next += 1;
                }
                id[r]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canon::is_isomorphic;
    use crate::graph::GraphKind::Undirected;

    fn point() -> Multigraph {
        Multigraph::discrete(Undirected, 1)
    }

    fn edge() -> Multigraph {
        Multigraph::from_edges(Undirected, 2, &[(0, 1)])
    }

    #[test]
    fn coproduct_of_points() {
        let e = GraphMorphism::from_empty();
        let po = pushout(&point(), &point(), &e, &e).unwrap();
        assert!(is_isomorphic(&po.object, &Multigraph::discrete(Undirected, 2)).unwrap());
    }

    #[test]
    fn pushout_of_identities() {
        let g = Multigraph::from_edges(Undirected, 3, &[(0, 1), (1, 1)]);
        let id = GraphMorphism::identity(&g);
        let po = pushout(&g, &g, &id, &id).unwrap();
        assert!(is_isomorphic(&po.object, &g).unwrap());
    }

    #[test]
    fn gluing_two_edges_along_a_vertex() {
        let b = GraphMorphism { vmap: vec![1], emap: vec![] };
        let c = GraphMorphism { vmap: vec![0], emap: vec![] };
        let po = pushout(&edge(), &edge(), &b, &c).unwrap();
        // Oracle: quotient of the disjoint union. 4 vertices - 1 identification.
        assert_eq!(po.object.vertex_count(), 3);
        assert_eq!(po.object.edge_count(), 2);
        let path = Multigraph::from_edges(Undirected, 3, &[(0, 1), (1, 2)]);
        assert!(is_isomorphic(&po.object, &path).unwrap());
    }

    #[test]
    fn pushout_rejects_two_non_monos() {
        let two = Multigraph::discrete(Undirected, 2);
        let fold = GraphMorphism { vmap: vec![0, 0], emap: vec![] };
        assert!(pushout(&point(), &point(), &fold, &fold).is_err());
        let _ = two;
    }

    #[test]
    fn pullbacks() {
        let g = Multigraph::from_edges(Undirected, 3, &[(0, 1), (1, 2)]);
        let id = GraphMorphism::identity(&g);
        let pb = pullback(&g, &g, &g, &id, &id).unwrap();
        assert!(is_isomorphic(&pb.object, &g).unwrap());

        let two = Multigraph::discrete(Undirected, 2);
        let a = GraphMorphism { vmap: vec![0], emap: vec![] };
        let b = GraphMorphism { vmap: vec![1], emap: vec![] };
        let pb = pullback(&point(), &point(), &two, &a, &b).unwrap();
        assert!(pb.object.is_empty());

        // Two single-edge inclusions of a path meeting in the middle vertex.
        let left = GraphMorphism { vmap: vec![0, 1], emap: vec![0] };
        let right = GraphMorphism { vmap: vec![1, 2], emap: vec![1] };
        let pb = pullback(&edge(), &edge(), &g, &left, &right).unwrap();
        assert_eq!((pb.object.vertex_count(), pb.object.edge_count()), (1, 0));
    }

    #[test]
    fn dangling_vertex_has_no_complement() {
        let i = GraphMorphism::from_empty();
        let m = GraphMorphism { vmap: vec![0], emap: vec![] };
        assert!(pushout_complement(&edge(), &i, &m).unwrap().is_none());
    }

    #[test]
    fn identity_leg_complement_is_the_host() {
        let x = Multigraph::from_edges(Undirected, 3, &[(0, 1), (1, 2), (2, 2)]);
        let i = GraphMorphism::identity(&edge());
        let m = GraphMorphism { vmap: vec![1, 2], emap: vec![1] };
        let poc = pushout_complement(&x, &i, &m).unwrap().unwrap();
        assert!(is_isomorphic(&poc.object, &x).unwrap());
    }

    #[test]
    fn deleting_an_edge_leaves_three_points() {
        let x = Multigraph::from_edges(Undirected, 3, &[(0, 1)]);
        let i = GraphMorphism { vmap: vec![0, 1], emap: vec![] };
        let m = GraphMorphism { vmap: vec![0, 1], emap: vec![0] };
        let poc = pushout_complement(&x, &i, &m).unwrap().unwrap();
        assert!(is_isomorphic(&poc.object, &Multigraph::discrete(Undirected, 3)).unwrap());
        assert!(complement_square_is_pushout(&x, &i, &m, &poc));
    }

    #[test]
    fn non_mono_inputs_are_errors() {
        let fold = GraphMorphism { vmap: vec![0, 0], emap: vec![] };
        let i = GraphMorphism::from_empty();
        assert!(pushout_complement(&point(), &i, &fold).is_err());
    }

    #[test]
    fn span_composition() {
        let two = Multigraph::discrete(Undirected, 2);
        let e = edge();
        let incl = GraphMorphism { vmap: vec![0, 1], emap: vec![] };
        let id2 = GraphMorphism::identity(&two);
        // (•• <- •• -> E) ∘ (E <- •• -> ••)
        let s = Span::new(two.clone(), two.clone(), e.clone(), id2.clone(), incl.clone()).unwrap();
        let r = Span::new(two.clone(), e.clone(), two.clone(), incl.clone(), id2.clone()).unwrap();
        let q = compose_spans(&s, &r).unwrap();
        assert_eq!(q.apex.vertex_count(), 2);
        assert_eq!(q.apex.edge_count(), 0);
        assert!(spans_isomorphic(&q, &Span::identity(&two)));

        // Identity on the middle.
        let q = compose_spans(&Span::identity(&e), &r).unwrap();
        assert!(spans_isomorphic(&q, &r));

        // Disjoint images in the middle.
        let p = point();
        let c = Multigraph::discrete(Undirected, 2);
        let a0 = GraphMorphism { vmap: vec![0], emap: vec![] };
        let a1 = GraphMorphism { vmap: vec![1], emap: vec![] };
        let idp = GraphMorphism::identity(&p);
        let s = Span::new(p.clone(), p.clone(), c.clone(), idp.clone(), a0).unwrap();
        let r = Span::new(p.clone(), c.clone(), p.clone(), a1, idp).unwrap();
        assert!(compose_spans(&s, &r).unwrap().apex.is_empty());

        assert!(matches!(compose_spans(&r, &r), Err(Error::MiddleObjectMismatch)));
    }
}
