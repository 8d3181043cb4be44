//! Exact canonical labeling of vertex- and edge-colored multigraphs.
//!
//! Individualization-refinement search: color refinement to an equitable
//! partition, branching on the first non-singleton cell, and taking the
//! lexicographically least leaf encoding. Branches are pruned only along
//! known automorphisms (twin transpositions found up front, plus
//! automorphisms discovered from equal leaf encodings), so the minimum is
//! the same as the minimum over the full search tree and the resulting code
//! is a complete isomorphism invariant.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::graph::{GraphKind, GraphMorphism, Multigraph};

const DIR_UNDIRECTED: u32 = 0;
const DIR_OUT: u32 = 1;
const DIR_IN: u32 = 2;
const DIR_LOOP: u32 = 3;

#[derive(Clone, Debug)]
pub(crate) struct ColoredGraph {
    pub directed: bool,
    pub vcolor: Vec<u32>,
    /// `(color, a, b)`; for undirected graphs `a <= b`.
    pub edges: Vec<(u32, usize, usize)>,
}

impl ColoredGraph {
    pub fn from_multigraph(g: &Multigraph) -> Self {
        ColoredGraph {
            directed: g.kind().is_directed(),
            vcolor: vec![0; g.vertex_count()],
            edges: g.edges().iter().map(|e| (0, e.src, e.tgt)).collect(),
        }
    }
}

/// Result of canonical labeling.
#[derive(Clone, Debug)]
pub(crate) struct Labeling {
    /// `vertex_pos[v]`: canonical position of vertex `v`.
    pub vertex_pos: Vec<usize>,
    /// `edge_pos[e]`: canonical position of edge `e`.
    pub edge_pos: Vec<usize>,
    pub code: Vec<u32>,
}

struct Search<'a> {
    g: &'a ColoredGraph,
    /// Per vertex: `(edge color, direction, neighbor)`.
    adj: Vec<Vec<(u32, u32, usize)>>,
    generators: Vec<Vec<usize>>,
    first: Option<Leaf>,
    best: Option<Leaf>,
}

struct Leaf {
    code: Vec<u32>,
    order: Vec<usize>,
    path: Vec<usize>,
}

pub(crate) fn canonical_labeling(g: &ColoredGraph) -> Labeling {
    let n = g.vcolor.len();
    let mut adj = vec![Vec::new(); n];
    for &(c, a, b) in &g.edges {
        if a == b {
            adj[a].push((c, DIR_LOOP, a));
        } else if g.directed {
            adj[a].push((c, DIR_OUT, b));
            adj[b].push((c, DIR_IN, a));
        } else {
            adj[a].push((c, DIR_UNDIRECTED, b));
            adj[b].push((c, DIR_UNDIRECTED, a));
        }
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    let mut search = Search {
        g,
        adj,
        generators: Vec::new(),
        first: None,
        best: None,
    };
    search.generators = search.twin_transpositions();

    let colors = rank(&g.vcolor);
    let mut prefix = Vec::new();
    let _ = search.descend(colors, &mut prefix);

    let Leaf { code, order, .. } = search.best.expect("search visits at least one leaf");
    let mut vertex_pos = vec![0; n];
    for (pos, &v) in order.iter().enumerate() {
        vertex_pos[v] = pos;
    }
    let edge_pos = edge_positions(g, &vertex_pos);
    Labeling {
        vertex_pos,
        edge_pos,
        code,
    }
}

/// Dense ranks of arbitrary ordered keys, preserving order.
fn rank<T: Ord + Clone>(keys: &[T]) -> Vec<u32> {
    let mut sorted: Vec<T> = keys.to_vec();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(k).expect("key present") as u32)
        .collect()
}

fn class_count(colors: &[u32]) -> usize {
    colors.iter().copied().max().map_or(0, |m| m as usize + 1)
}

impl Search<'_> {
    fn refine(&self, colors: &mut Vec<u32>) {
        let n = colors.len();
        let mut classes = class_count(colors);
        loop {
            let sigs: Vec<Vec<u32>> = (0..n)
                .map(|v| {
                    let mut nb: Vec<(u32, u32, u32)> = self.adj[v]
                        .iter()
                        .map(|&(c, d, w)| (c, d, colors[w]))
                        .collect();
                    nb.sort_unstable();
                    let mut sig = Vec::with_capacity(1 + 3 * nb.len());
                    sig.push(colors[v]);
                    for (c, d, w) in nb {
                        sig.extend([c, d, w]);
                    }
                    sig
                })
                .collect();
            let next = rank(&sigs);
            let next_classes = class_count(&next);
            *colors = next;
            if next_classes == classes {
                return;
            }
            classes = next_classes;
        }
    }

    /// Explores the subtree below `prefix`. Returns `Some(depth)` when a
    /// discovered automorphism makes everything below the node at `depth`
    /// equivalent to an explored branch, so the search resumes there.
    fn descend(&mut self, mut colors: Vec<u32>, prefix: &mut Vec<usize>) -> Option<usize> {
        self.refine(&mut colors);
        let n = colors.len();
        if class_count(&colors) == n {
            return self.leaf(&colors, prefix);
        }
        // First non-singleton cell.
        let mut sizes = vec![0usize; n];
        for &c in &colors {
            sizes[c as usize] += 1;
        }
        let target = sizes.iter().position(|&s| s > 1).expect("non-discrete") as u32;
        let cell: Vec<usize> = (0..n).filter(|&v| colors[v] == target).collect();

        let mut explored: Vec<usize> = Vec::new();
        for &v in &cell {
            if !explored.is_empty() && self.equivalent_to_explored(v, &explored, prefix) {
                continue;
            }
            explored.push(v);
            let keys: Vec<(u32, bool)> = (0..n).map(|x| (colors[x], x != v)).collect();
            let child = rank(&keys);
            prefix.push(v);
            let jump = self.descend(child, prefix);
            prefix.pop();
            if let Some(depth) = jump {
                if depth < prefix.len() {
                    return jump;
                }
            }
        }
        None
    }

    /// Whether `v` lies in the orbit of an explored sibling under the group
    /// generated by known automorphisms fixing the prefix pointwise.
    fn equivalent_to_explored(&self, v: usize, explored: &[usize], prefix: &[usize]) -> bool {
        let n = self.g.vcolor.len();
        let mut uf = UnionFind::new(n);
        let mut any = false;
        for gen in &self.generators {
            if prefix.iter().all(|&p| gen[p] == p) {
                any = true;
                for (x, &y) in gen.iter().enumerate() {
                    uf.union(x, y);
                }
            }
        }
        if !any {
            return false;
        }
        let root = uf.find(v);
        explored.iter().any(|&u| uf.find(u) == root)
    }

    fn leaf(&mut self, colors: &[u32], prefix: &[usize]) -> Option<usize> {
        let n = colors.len();
        let mut order = vec![0usize; n];
        for (v, &c) in colors.iter().enumerate() {
            order[c as usize] = v;
        }
        let code = encode(self.g, colors);
        let Some(first) = &self.first else {
            let leaf = Leaf {
                code,
                order,
                path: prefix.to_vec(),
            };
            self.best = Some(Leaf {
                code: leaf.code.clone(),
                order: leaf.order.clone(),
                path: leaf.path.clone(),
            });
            self.first = Some(leaf);
            return None;
        };
        if first.code == code {
            let auto = leaf_automorphism(&first.order, &order);
            let depth = common_prefix(&first.path, prefix);
            self.generators.push(auto);
            return Some(depth);
        }
        let best = self.best.as_ref().expect("best is set with first");
        match code.cmp(&best.code) {
            Ordering::Less => {
                self.best = Some(Leaf {
                    code,
                    order,
                    path: prefix.to_vec(),
                });
                None
            }
            Ordering::Equal => {
                let auto = leaf_automorphism(&best.order, &order);
                let depth = common_prefix(&best.path, prefix);
                self.generators.push(auto);
                Some(depth)
            }
            Ordering::Greater => None,
        }
    }

    /// Transpositions `(u v)` that are automorphisms: same color, same loops,
    /// same edges to every third vertex, and symmetric edges between them.
    fn twin_transpositions(&self) -> Vec<Vec<usize>> {
        let n = self.g.vcolor.len();
        let twin_sig = |u: usize, other: usize| -> Vec<(usize, u32, u32)> {
            let mut sig: Vec<(usize, u32, u32)> = self.adj[u]
                .iter()
                .map(|&(c, d, w)| {
                    let w = if d == DIR_LOOP {
                        usize::MAX - 1
                    } else if w == other {
                        usize::MAX
                    } else {
                        w
                    };
                    (w, c, d)
                })
                .collect();
            sig.sort_unstable();
            sig
        };
        let mut reps: Vec<usize> = Vec::new();
        let mut gens = Vec::new();
        for v in 0..n {
            let twin_of = reps.iter().copied().find(|&r| {
                self.g.vcolor[r] == self.g.vcolor[v]
                    && self.adj[r].len() == self.adj[v].len()
                    && twin_sig(r, v) == twin_sig(v, r)
            });
            match twin_of {
                Some(r) => {
                    let mut perm: Vec<usize> = (0..n).collect();
                    perm.swap(r, v);
                    gens.push(perm);
                }
                None => reps.push(v),
            }
        }
        gens
    }
}

fn common_prefix(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

fn leaf_automorphism(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut perm = vec![0; a.len()];
    for (pos, &x) in a.iter().enumerate() {
        perm[x] = b[pos];
    }
    perm
}

fn encode(g: &ColoredGraph, pos: &[u32]) -> Vec<u32> {
    let n = g.vcolor.len();
    let mut vcols = vec![0u32; n];
    for v in 0..n {
        vcols[pos[v] as usize] = g.vcolor[v];
    }
    let mut edges: Vec<(u32, u32, u32)> = g
        .edges
        .iter()
        .map(|&(c, a, b)| {
            let (pa, pb) = (pos[a], pos[b]);
            if g.directed {
                (c, pa, pb)
            } else {
                (c, pa.min(pb), pa.max(pb))
            }
        })
        .collect();
    edges.sort_unstable();
    let mut code = Vec::with_capacity(2 + n + 3 * edges.len());
    code.push(n as u32);
    code.push(edges.len() as u32);
    code.extend(vcols);
    for (c, a, b) in edges {
        code.extend([c, a, b]);
    }
    code
}

fn edge_positions(g: &ColoredGraph, vertex_pos: &[usize]) -> Vec<usize> {
    let mut keyed: Vec<((u32, usize, usize), usize)> = g
        .edges
        .iter()
        .enumerate()
        .map(|(e, &(c, a, b))| {
            let (pa, pb) = (vertex_pos[a], vertex_pos[b]);
            let key = if g.directed {
                (c, pa, pb)
            } else {
                (c, pa.min(pb), pa.max(pb))
            };
            (key, e)
        })
        .collect();
    keyed.sort_unstable();
    let mut edge_pos = vec![0; g.edges.len()];
    for (pos, (_, e)) in keyed.into_iter().enumerate() {
        edge_pos[e] = pos;
    }
    edge_pos
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Total invariant of a graph's isomorphism class.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalKey {
    pub kind: GraphKind,
    pub code: Box<[u32]>,
}

impl CanonicalKey {
    /// Byte rendering of the key (little-endian words, kind tag first).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![self.kind as u8];
        for w in self.code.iter() {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct CanonicalForm {
    pub key: CanonicalKey,
    /// Isomorphism from the input graph onto `representative`.
    pub relabel: GraphMorphism,
    /// Canonically labeled copy with generated ids.
    pub representative: Multigraph,
}

pub fn canonical_form(g: &Multigraph) -> CanonicalForm {
    let labeling = canonical_labeling(&ColoredGraph::from_multigraph(g));
    let relabel = GraphMorphism {
        vmap: labeling.vertex_pos.clone(),
        emap: labeling.edge_pos.clone(),
    };
    let representative = g
        .permuted(&labeling.vertex_pos, &labeling.edge_pos)
        .with_generated_ids();
    CanonicalForm {
        key: CanonicalKey {
            kind: g.kind(),
            code: labeling.code.into_boxed_slice(),
        },
        relabel,
        representative,
    }
}

pub fn canonical_key(g: &Multigraph) -> CanonicalKey {
    let labeling = canonical_labeling(&ColoredGraph::from_multigraph(g));
    CanonicalKey {
        kind: g.kind(),
        code: labeling.code.into_boxed_slice(),
    }
}

pub fn is_isomorphic(g: &Multigraph, h: &Multigraph) -> crate::Result<bool> {
    g.kind().ensure(h.kind())?;
    if g.vertex_count() != h.vertex_count() || g.edge_count() != h.edge_count() {
        return Ok(false);
    }
    Ok(canonical_key(g) == canonical_key(h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphKind::{Directed, Undirected};

    fn triangle(kind: GraphKind) -> Multigraph {
        Multigraph::from_edges(kind, 3, &[(0, 1), (1, 2), (2, 0)])
    }

    #[test]
    fn relabeled_triangles_share_a_key() {
        let t = triangle(Undirected);
        let r = t.permuted(&[2, 0, 1], &[1, 2, 0]);
        assert_eq!(canonical_key(&t), canonical_key(&r));
        assert!(is_isomorphic(&t, &r).unwrap());
    }

    #[test]
    fn one_vertex_differs_from_two() {
        let one = Multigraph::discrete(Undirected, 1);
        let two = Multigraph::discrete(Undirected, 2);
        assert_ne!(canonical_key(&one), canonical_key(&two));
        assert!(!is_isomorphic(&one, &two).unwrap());
    }

    #[test]
    fn path_differs_from_parallel_pair() {
        let path = Multigraph::from_edges(Undirected, 3, &[(0, 1), (1, 2)]);
        let parallel = Multigraph::from_edges(Undirected, 2, &[(0, 1), (0, 1)]);
        assert_ne!(canonical_key(&path), canonical_key(&parallel));
        let three_parallel = Multigraph::from_edges(Undirected, 2, &[(0, 1), (0, 1), (0, 1)]);
        let path3 = Multigraph::from_edges(Undirected, 4, &[(0, 1), (1, 2), (2, 3)]);
        assert!(!is_isomorphic(&three_parallel, &path3).unwrap());
    }

    #[test]
    fn direction_matters() {
        let cyc = triangle(Directed);
        let acyc = Multigraph::from_edges(Directed, 3, &[(0, 1), (1, 2), (0, 2)]);
        assert_ne!(canonical_key(&cyc), canonical_key(&acyc));
        let rev = Multigraph::from_edges(Directed, 3, &[(1, 0), (2, 1), (0, 2)]);
        assert_eq!(canonical_key(&cyc), canonical_key(&rev));
    }

    #[test]
    fn relabel_is_an_isomorphism_onto_the_representative() {
        let g = Multigraph::from_edges(Undirected, 4, &[(0, 1), (0, 1), (1, 2), (3, 3), (2, 3)]);
        let cf = canonical_form(&g);
        assert!(cf.relabel.is_valid(&g, &cf.representative));
        assert!(cf.relabel.is_bijective_onto(&cf.representative));
        assert_eq!(canonical_form(&cf.representative).representative, cf.representative);
    }

    #[test]
    fn highly_symmetric_graphs_are_fast() {
        // 12 disjoint edges and 40 isolated vertices.
        let edges: Vec<(usize, usize)> = (0..12).map(|i| (2 * i, 2 * i + 1)).collect();
        let g = Multigraph::from_edges(Undirected, 64, &edges);
        let h = g.permuted(&(0..64).rev().collect::<Vec<_>>(), &(0..12).rev().collect::<Vec<_>>());
        assert_eq!(canonical_key(&g), canonical_key(&h));
        // Petersen graph: vertex-transitive and twin free.
        let pet = Multigraph::from_edges(
            Undirected,
            10,
            &[
                (0, 1), (1, 2), (2, 3), (3, 4), (4, 0),
                (0, 5), (1, 6), (2, 7), (3, 8), (4, 9),
                (5, 7), (7, 9), (9, 6), (6, 8), (8, 5),
            ],
        );
        let perm = [3, 7, 1, 0, 9, 2, 8, 5, 4, 6];
        let eperm: Vec<usize> = (0..15).collect();
        assert_eq!(canonical_key(&pet), canonical_key(&pet.permuted(&perm, &eperm)));
    }
}
