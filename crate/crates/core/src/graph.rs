//! Finite directed and undirected multigraphs and the morphisms between them.
//!
//! Vertices and edges are stored densely and addressed by index; the
//! string ids only matter for I/O. In an undirected graph each edge stores
//! its incidence set as a normalized pair `src <= tgt`, a self-loop having
//! `src == tgt`.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Directed,
    Undirected,
}

impl GraphKind {
    pub fn is_directed(self) -> bool {
        matches!(self, GraphKind::Directed)
    }

    pub(crate) fn ensure(self, other: GraphKind) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::KindMismatch {
                expected: self,
                found: other,
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: usize,
    pub tgt: usize,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.src == self.tgt
    }

    fn normalized(kind: GraphKind, a: usize, b: usize) -> Edge {
        match kind {
            GraphKind::Directed => Edge { src: a, tgt: b },
            GraphKind::Undirected => Edge {
                src: a.min(b),
                tgt: a.max(b),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multigraph {
    kind: GraphKind,
    vertex_ids: Vec<String>,
    edge_ids: Vec<String>,
    edges: Vec<Edge>,
}

impl Multigraph {
    pub fn empty(kind: GraphKind) -> Self {
        Multigraph {
            kind,
            vertex_ids: Vec::new(),
            edge_ids: Vec::new(),
            edges: Vec::new(),
        }
    }

    /// The edgeless graph on `n` vertices `v0 .. v{n-1}`.
    pub fn discrete(kind: GraphKind, n: usize) -> Self {
        let mut g = Self::empty(kind);
        for _ in 0..n {
            g.push_vertex();
        }
        g
    }

    /// Builds a graph with generated ids from an edge list over `0..n`.
    pub fn from_edges(kind: GraphKind, n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::discrete(kind, n);
        for &(a, b) in edges {
            assert!(a < n && b < n, "edge endpoint out of range");
            g.push_edge(a, b);
        }
        g
    }

    /// Validating constructor used by the parsers.
    pub fn from_parts(
        kind: GraphKind,
        vertex_ids: Vec<String>,
        edges: Vec<(String, usize, usize)>,
    ) -> Result<Self> {
        let mut seen = HashSet::new();
        for id in &vertex_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::MalformedGraph(format!("duplicate vertex id {id:?}")));
            }
        }
        let mut seen = HashSet::new();
        let mut g = Multigraph {
            kind,
            vertex_ids,
            edge_ids: Vec::with_capacity(edges.len()),
            edges: Vec::with_capacity(edges.len()),
        };
        for (id, a, b) in edges {
            if !seen.insert(id.clone()) {
                return Err(Error::MalformedGraph(format!("duplicate edge id {id:?}")));
            }
            if a >= g.vertex_count() || b >= g.vertex_count() {
                return Err(Error::MalformedGraph(format!(
                    "edge {id:?} has an undeclared endpoint"
                )));
            }
            g.edge_ids.push(id);
            g.edges.push(Edge::normalized(kind, a, b));
        }
        Ok(g)
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertex_ids.is_empty() && self.edges.is_empty()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> Edge {
        self.edges[e]
    }

    pub fn vertex_id(&self, v: usize) -> &str {
        &self.vertex_ids[v]
    }

    pub fn edge_id(&self, e: usize) -> &str {
        &self.edge_ids[e]
    }

    pub fn vertex_ids(&self) -> &[String] {
        &self.vertex_ids
    }

    pub fn edge_ids(&self) -> &[String] {
        &self.edge_ids
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertex_ids.iter().position(|v| v == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edge_ids.iter().position(|e| e == id)
    }

    /// Adds a vertex with a generated id that does not clash with existing ones.
    pub fn push_vertex(&mut self) -> usize {
        let idx = self.vertex_ids.len();
        let mut id = format!("v{idx}");
        while self.vertex_ids.contains(&id) {
            id.push('\'');
        }
        self.vertex_ids.push(id);
        idx
    }

    pub fn push_edge(&mut self, a: usize, b: usize) -> usize {
        let idx = self.edges.len();
        let mut id = format!("e{idx}");
        while self.edge_ids.contains(&id) {
            id.push('\'');
        }
        self.edge_ids.push(id);
        self.edges.push(Edge::normalized(self.kind, a, b));
        idx
    }

    /// Fast construction for internal constructions whose ids are fresh by
    /// construction (`v{i}` / `e{i}` in index order).
    pub(crate) fn with_fresh_ids(kind: GraphKind, n: usize, edges: Vec<Edge>) -> Self {
        Multigraph {
            kind,
            vertex_ids: (0..n).map(|i| format!("v{i}")).collect(),
            edge_ids: (0..edges.len()).map(|i| format!("e{i}")).collect(),
            edges: edges
                .into_iter()
                .map(|e| Edge::normalized(kind, e.src, e.tgt))
                .collect(),
        }
    }

    /// Sub-structure keeping the listed vertices and edges, in the given
    /// order and with their ids. Returns the graph and its inclusion.
    pub fn subgraph(&self, vertices: &[usize], edges: &[usize]) -> Result<(Multigraph, GraphMorphism)> {
        let mut local = vec![usize::MAX; self.vertex_count()];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let mut sub = Multigraph {
            kind: self.kind,
            vertex_ids: vertices.iter().map(|&v| self.vertex_ids[v].clone()).collect(),
            edge_ids: Vec::with_capacity(edges.len()),
            edges: Vec::with_capacity(edges.len()),
        };
        for &e in edges {
            let Edge { src, tgt } = self.edges[e];
            if local[src] == usize::MAX || local[tgt] == usize::MAX {
                return Err(Error::MalformedGraph(format!(
                    "edge {:?} leaves the chosen vertex subset",
                    self.edge_ids[e]
                )));
            }
            sub.edge_ids.push(self.edge_ids[e].clone());
            sub.edges.push(Edge::normalized(self.kind, local[src], local[tgt]));
        }
        let incl = GraphMorphism {
            vmap: vertices.to_vec(),
            emap: edges.to_vec(),
        };
        Ok((sub, incl))
    }

    /// Disjoint union `self ⊎ other`, with both coproduct injections.
    pub fn disjoint_union(&self, other: &Multigraph) -> Result<(Multigraph, GraphMorphism, GraphMorphism)> {
        self.kind.ensure(other.kind)?;
        let empty = GraphMorphism::default();
        let po = crate::category::pushout(self, other, &empty, &empty)?;
        Ok((po.object, po.in_left, po.in_right))
    }

    /// Applies a bijective relabeling: vertex `v` moves to `vperm[v]`, edge
    /// `e` to `eperm[e]`. Ids travel with their items.
    pub fn permuted(&self, vperm: &[usize], eperm: &[usize]) -> Multigraph {
        let n = self.vertex_count();
        let m = self.edge_count();
        let mut vertex_ids = vec![String::new(); n];
        for v in 0..n {
            vertex_ids[vperm[v]] = self.vertex_ids[v].clone();
        }
        let mut edge_ids = vec![String::new(); m];
        let mut edges = vec![Edge { src: 0, tgt: 0 }; m];
        for e in 0..m {
            let Edge { src, tgt } = self.edges[e];
            edge_ids[eperm[e]] = self.edge_ids[e].clone();
            edges[eperm[e]] = Edge::normalized(self.kind, vperm[src], vperm[tgt]);
        }
        Multigraph {
            kind: self.kind,
            vertex_ids,
            edge_ids,
            edges,
        }
    }

    /// Number of edges between `a` and `b` (ordered for directed graphs).
    pub fn multiplicity(&self, a: usize, b: usize) -> usize {
        let key = Edge::normalized(self.kind, a, b);
        self.edges.iter().filter(|e| **e == key).count()
    }

    /// Replaces every id with a generated one (`v{i}`, `e{i}`).
    pub fn with_generated_ids(&self) -> Multigraph {
        Multigraph::with_fresh_ids(self.kind, self.vertex_count(), self.edges.clone())
    }
}

impl fmt::Display for Multigraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrow = if self.kind.is_directed() { "->" } else { "--" };
        write!(f, "[{} vertices;", self.vertex_count())?;
        for e in &self.edges {
            write!(f, " {}{}{}", e.src, arrow, e.tgt)?;
        }
        write!(f, "]")
    }
}

/// A graph morphism as a pair of index maps. The source and target graphs
/// are held by whatever structure owns the morphism (a rule, a span, a
/// match into a host graph).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphMorphism {
    pub vmap: Vec<usize>,
    pub emap: Vec<usize>,
}

impl GraphMorphism {
    pub fn identity(g: &Multigraph) -> Self {
        GraphMorphism {
            vmap: (0..g.vertex_count()).collect(),
            emap: (0..g.edge_count()).collect(),
        }
    }

    /// The unique morphism out of the empty graph.
    pub fn from_empty() -> Self {
        GraphMorphism::default()
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &GraphMorphism) -> GraphMorphism {
        GraphMorphism {
            vmap: self.vmap.iter().map(|&v| next.vmap[v]).collect(),
            emap: self.emap.iter().map(|&e| next.emap[e]).collect(),
        }
    }

    pub fn is_mono(&self) -> bool {
        fn injective(xs: &[usize]) -> bool {
            let mut seen = HashSet::with_capacity(xs.len());
            xs.iter().all(|x| seen.insert(*x))
        }
        injective(&self.vmap) && injective(&self.emap)
    }

    pub fn is_bijective_onto(&self, target: &Multigraph) -> bool {
        self.vmap.len() == target.vertex_count() && self.emap.len() == target.edge_count() && self.is_mono()
    }

    /// Inverse of a bijection.
    pub fn inverse(&self) -> GraphMorphism {
        let mut vmap = vec![0; self.vmap.len()];
        for (v, &w) in self.vmap.iter().enumerate() {
            vmap[w] = v;
        }
        let mut emap = vec![0; self.emap.len()];
        for (e, &f) in self.emap.iter().enumerate() {
            emap[f] = e;
        }
        GraphMorphism { vmap, emap }
    }

    /// Checks totality, range and structure preservation.
    pub fn validate(&self, source: &Multigraph, target: &Multigraph) -> Result<()> {
        source.kind().ensure(target.kind())?;
        if self.vmap.len() != source.vertex_count() || self.emap.len() != source.edge_count() {
            return Err(Error::InvalidMorphism("map is not total on the source".into()));
        }
        if self.vmap.iter().any(|&v| v >= target.vertex_count())
            || self.emap.iter().any(|&e| e >= target.edge_count())
        {
            return Err(Error::InvalidMorphism("image outside the target".into()));
        }
        for (e, edge) in source.edges().iter().enumerate() {
            let image = Edge::normalized(source.kind(), self.vmap[edge.src], self.vmap[edge.tgt]);
            if image != target.edge(self.emap[e]) {
                return Err(Error::InvalidMorphism(format!(
                    "edge {:?} is not mapped compatibly with its endpoints",
                    source.edge_id(e)
                )));
            }
        }
        Ok(())
    }

    pub fn is_valid(&self, source: &Multigraph, target: &Multigraph) -> bool {
        self.validate(source, target).is_ok()
    }
}

/// Inverse of a mono, defined on its image.
pub(crate) struct PartialMorphism {
    pub vmap: Vec<Option<usize>>,
    pub emap: Vec<Option<usize>>,
}

impl GraphMorphism {
    /// Inverse of a mono as a partial map on `target`.
    pub(crate) fn inverse_on(&self, target: &Multigraph) -> PartialMorphism {
        let mut vmap = vec![None; target.vertex_count()];
        let mut emap = vec![None; target.edge_count()];
        for (x, &y) in self.vmap.iter().enumerate() {
            vmap[y] = Some(x);
        }
        for (x, &y) in self.emap.iter().enumerate() {
            emap[y] = Some(x);
        }
        PartialMorphism { vmap, emap }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undirected_edges_are_normalized() {
        let g = Multigraph::from_edges(GraphKind::Undirected, 2, &[(1, 0)]);
        assert_eq!(g.edge(0), Edge { src: 0, tgt: 1 });
        let d = Multigraph::from_edges(GraphKind::Directed, 2, &[(1, 0)]);
        assert_eq!(d.edge(0), Edge { src: 1, tgt: 0 });
    }

    #[test]
    fn from_parts_rejects_bad_input() {
        let ids = vec!["a".to_string(), "a".to_string()];
        assert!(Multigraph::from_parts(GraphKind::Directed, ids, vec![]).is_err());
        let ids = vec!["a".to_string()];
        let bad = vec![("e".to_string(), 0, 3)];
        assert!(Multigraph::from_parts(GraphKind::Directed, ids, bad).is_err());
    }

    #[test]
    fn morphism_validation() {
        let edge = Multigraph::from_edges(GraphKind::Directed, 2, &[(0, 1)]);
        let swapped = GraphMorphism {
            vmap: vec![1, 0],
            emap: vec![0],
        };
        assert!(!swapped.is_valid(&edge, &edge));
        assert!(GraphMorphism::identity(&edge).is_valid(&edge, &edge));

        let uedge = Multigraph::from_edges(GraphKind::Undirected, 2, &[(0, 1)]);
        assert!(swapped.is_valid(&uedge, &uedge));
        assert!(swapped.is_mono());
    }

    #[test]
    fn folding_an_edge_onto_a_loop_is_a_morphism() {
        let uedge = Multigraph::from_edges(GraphKind::Undirected, 2, &[(0, 1)]);
        let lp = Multigraph::from_edges(GraphKind::Undirected, 1, &[(0, 0)]);
        let fold = GraphMorphism {
            vmap: vec![0, 0],
            emap: vec![0],
        };
        assert!(fold.is_valid(&uedge, &lp));
        assert!(!fold.is_mono());
    }
}
