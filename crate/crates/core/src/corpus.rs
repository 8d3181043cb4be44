//! Seeded random rules and host graphs used by the verification suites.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::canon::canonical_key;
use crate::graph::{GraphKind, GraphMorphism, Multigraph};
use crate::rule::LinearRule;

/// Size bounds for generated rules and hosts.
#[derive(Clone, Copy, Debug)]
pub struct CorpusBounds {
    pub rule_vertices: usize,
    pub rule_edges: usize,
    pub host_vertices: usize,
    pub host_edges: usize,
}

impl Default for CorpusBounds {
    fn default() -> Self {
        CorpusBounds {
            rule_vertices: 3,
            rule_edges: 2,
            host_vertices: 4,
            host_edges: 3,
        }
    }
}

/// Deterministic generator of undirected rules and hosts.
pub struct Corpus {
    rng: ChaCha20Rng,
    bounds: CorpusBounds,
}

impl Corpus {
    pub fn new(seed: u64) -> Self {
        Self::with_bounds(seed, CorpusBounds::default())
    }

    pub fn with_bounds(seed: u64, bounds: CorpusBounds) -> Self {
        Corpus {
            rng: ChaCha20Rng::seed_from_u64(seed),
            bounds,
        }
    }

    /// A random linear rule whose three graphs respect the rule bounds.
    /// The context is a common prefix of input and output.
    pub fn rule(&mut self) -> LinearRule {
        let b = self.bounds;
        let k_vertices = self.rng.random_range(0..=b.rule_vertices.min(2));
        let k_edges = if k_vertices > 0 { self.rng.random_range(0..=1.min(b.rule_edges)) } else { 0 };
        let context = self.extend(&Multigraph::empty(GraphKind::Undirected), k_vertices, k_edges);
        let input = self.grow(&context);
        let output = self.grow(&context);
        let leg = GraphMorphism {
            vmap: (0..context.vertex_count()).collect(),
            emap: (0..context.edge_count()).collect(),
        };
        let (o, i) = (leg.clone(), leg);
        LinearRule::new(output, context, input, o, i).expect("prefix inclusions are monos")
    }

    /// A random host graph within the host bounds.
    pub fn host(&mut self) -> Multigraph {
        let n = self.rng.random_range(0..=self.bounds.host_vertices);
        let m = if n > 0 { self.rng.random_range(0..=self.bounds.host_edges) } else { 0 };
        self.extend(&Multigraph::empty(GraphKind::Undirected), n, m)
    }

    pub fn rules(&mut self, n: usize) -> Vec<LinearRule> {
        (0..n).map(|_| self.rule()).collect()
    }

    pub fn hosts(&mut self, n: usize) -> Vec<Multigraph> {
        (0..n).map(|_| self.host()).collect()
    }

    /// Adds random vertices and edges on top of `base` up to the rule bounds.
    fn grow(&mut self, base: &Multigraph) -> Multigraph {
        let b = self.bounds;
        let n = self.rng.random_range(base.vertex_count()..=b.rule_vertices);
        let m = if n > 0 {
            self.rng.random_range(base.edge_count()..=b.rule_edges)
        } else {
            0
        };
        self.extend(base, n, m)
    }

    fn extend(&mut self, base: &Multigraph, n: usize, m: usize) -> Multigraph {
        let mut g = base.clone();
        while g.vertex_count() < n {
            g.push_vertex();
        }
        while g.edge_count() < m {
            let a = self.rng.random_range(0..n);
            // Self-loops are kept rare.
            let b = if n > 1 && self.rng.random_bool(0.85) {
                (a + self.rng.random_range(1..n)) % n
            } else {
                a
            };
            g.push_edge(a, b);
        }
        g
    }
}

/// Every undirected multigraph with at most `max_vertices` vertices and
/// `max_edges` edges, one per isomorphism class, in order of size.
pub fn all_graphs(max_vertices: usize, max_edges: usize) -> Vec<Multigraph> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for n in 0..=max_vertices {
        let slots: Vec<(usize, usize)> = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
        for m in 0..=max_edges {
            if slots.is_empty() && m > 0 {
                break;
            }
            // Multisets of m slots as non-decreasing index sequences.
            let mut pick = vec![0usize; m];
            loop {
                let edges: Vec<(usize, usize)> = pick.iter().map(|&s| slots[s]).collect();
                let g = Multigraph::from_edges(GraphKind::Undirected, n, &edges);
                if seen.insert(canonical_key(&g)) {
                    out.push(g);
                }
                let Some(j) = (0..m).rev().find(|&j| pick[j] + 1 < slots.len()) else {
                    break;
                };
                pick[j] += 1;
                let v = pick[j];
                for x in &mut pick[j + 1..] {
                    *x = v;
                }
            }
        }
    }
    out
}

/// The named rules of the vertex and edge algebras, always part of the corpus.
pub fn named_rules() -> Vec<(&'static str, LinearRule)> {
    let u = GraphKind::Undirected;
    vec![
        ("vertex-creation", LinearRule::vertex_creation(u, 1)),
        ("vertex-deletion", LinearRule::vertex_deletion(u, 1)),
        ("edge-creation", LinearRule::edge_creation()),
        ("edge-deletion", LinearRule::edge_deletion()),
        ("vertex-pair-identity", LinearRule::vertex_pair_identity()),
        ("empty", LinearRule::empty(u)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_and_bounded() {
        let a: Vec<_> = Corpus::new(9).rules(40).iter().map(|p| p.key()).collect();
        let b: Vec<_> = Corpus::new(9).rules(40).iter().map(|p| p.key()).collect();
        assert_eq!(a, b);
        let mut c = Corpus::new(1);
        for p in c.rules(200) {
            for g in [p.output(), p.context(), p.input()] {
                assert!(g.vertex_count() <= 3 && g.edge_count() <= 2);
            }
        }
        for g in c.hosts(200) {
            assert!(g.vertex_count() <= 4 && g.edge_count() <= 3);
        }
    }

    #[test]
    fn small_graph_classes() {
        // Hand counts: the empty graph, then one vertex with 0..=3 loops.
        assert_eq!(all_graphs(0, 3).len(), 1);
        assert_eq!(all_graphs(1, 3).len(), 1 + 4);
        // Two vertices, at most two edges: none; a loop or a link; two loops
        // on one vertex or on both, a loop and a link, two links.
        assert_eq!(all_graphs(2, 2).len(), 1 + 3 + 7);
        let all = all_graphs(4, 3);
        assert!(all.iter().all(|g| g.vertex_count() <= 4 && g.edge_count() <= 3));
    }

    #[test]
    fn corpus_is_varied() {
        let keys: std::collections::BTreeSet<_> = Corpus::new(2).rules(100).iter().map(|p| p.key()).collect();
        assert!(keys.len() > 40);
    }
}
