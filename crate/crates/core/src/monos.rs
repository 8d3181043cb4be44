//! Enumeration of monomorphisms (injective structure-preserving maps)
//! between multigraphs, by backtracking over vertex assignments followed by
//! injective assignment of parallel-edge bundles.

use std::collections::HashMap;
use std::ops::ControlFlow;

use crate::error::Result;
use crate::graph::{Edge, GraphMorphism, Multigraph};

/// All monomorphisms `pattern -> host`, each exactly once, in a
/// deterministic order.
pub fn enumerate_monos(pattern: &Multigraph, host: &Multigraph) -> Result<Vec<GraphMorphism>> {
    let mut out = Vec::new();
    for_each_mono(pattern, host, |m| {
        out.push(m.clone());
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

pub fn count_monos(pattern: &Multigraph, host: &Multigraph) -> Result<usize> {
    let mut n = 0usize;
    for_each_mono(pattern, host, |_| {
        n += 1;
        ControlFlow::Continue(())
    })?;
    Ok(n)
}

/// Visits every monomorphism; the visitor may stop the enumeration early.
pub fn for_each_mono<F>(pattern: &Multigraph, host: &Multigraph, mut visit: F) -> Result<()>
where
    F: FnMut(&GraphMorphism) -> ControlFlow<()>,
{
    pattern.kind().ensure(host.kind())?;
    if pattern.vertex_count() > host.vertex_count() || pattern.edge_count() > host.edge_count() {
        return Ok(());
    }
    let matcher = Matcher::new(pattern, host);
    let mut state = State {
        vmap: vec![usize::MAX; pattern.vertex_count()],
        used: vec![false; host.vertex_count()],
        emap: vec![usize::MAX; pattern.edge_count()],
        eused: vec![false; host.edge_count()],
    };
    let _ = matcher.assign_vertex(0, &mut state, &mut visit);
    Ok(())
}

struct State {
    vmap: Vec<usize>,
    used: Vec<bool>,
    emap: Vec<usize>,
    eused: Vec<bool>,
}

struct Matcher<'a> {
    pattern: &'a Multigraph,
    host: &'a Multigraph,
    directed: bool,
    /// Pattern vertices in assignment order.
    order: Vec<usize>,
    /// For each position in `order`: an earlier-assigned pattern vertex
    /// adjacent to it, used to restrict candidates to host neighbors.
    anchor: Vec<Option<usize>>,
    /// Pattern edges grouped by normalized endpoint pair.
    bundles: Vec<(Edge, Vec<usize>)>,
    /// For each pattern vertex: bundles whose endpoints are both assigned
    /// once this vertex is assigned (checked at that point).
    checks: Vec<Vec<usize>>,
    pat_deg: Vec<(usize, usize, usize)>,
    host_deg: Vec<(usize, usize, usize)>,
    host_bundles: HashMap<Edge, Vec<usize>>,
    host_nbrs: Vec<Vec<usize>>,
}

fn key(directed: bool, a: usize, b: usize) -> Edge {
    if directed {
        Edge { src: a, tgt: b }
    } else {
        Edge {
            src: a.min(b),
            tgt: a.max(b),
        }
    }
}

/// (out-degree, in-degree, loops); undirected graphs count both ends in `out`.
fn degrees(g: &Multigraph) -> Vec<(usize, usize, usize)> {
    let mut deg = vec![(0, 0, 0); g.vertex_count()];
    for e in g.edges() {
        if e.is_loop() {
            deg[e.src].2 += 1;
        } else if g.kind().is_directed() {
            deg[e.src].0 += 1;
            deg[e.tgt].1 += 1;
        } else {
            deg[e.src].0 += 1;
            deg[e.tgt].0 += 1;
        }
    }
    deg
}

impl<'a> Matcher<'a> {
    fn new(pattern: &'a Multigraph, host: &'a Multigraph) -> Self {
        let directed = pattern.kind().is_directed();
        let n = pattern.vertex_count();

        let mut bundle_index: HashMap<Edge, usize> = HashMap::new();
        let mut bundles: Vec<(Edge, Vec<usize>)> = Vec::new();
        for (e, edge) in pattern.edges().iter().enumerate() {
            let k = key(directed, edge.src, edge.tgt);
            let idx = *bundle_index.entry(k).or_insert_with(|| {
                bundles.push((k, Vec::new()));
                bundles.len() - 1
            });
            bundles[idx].1.push(e);
        }

        let mut pat_adj = vec![Vec::new(); n];
        for (k, _) in &bundles {
            if k.src != k.tgt {
                pat_adj[k.src].push(k.tgt);
                pat_adj[k.tgt].push(k.src);
            }
        }
        let pat_deg = degrees(pattern);

        // Greedy connectivity-first order.
        let mut placed = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut anchor = Vec::with_capacity(n);
        for _ in 0..n {
            let best = (0..n)
                .filter(|&v| !placed[v])
                .max_by_key(|&v| {
                    let links = pat_adj[v].iter().filter(|&&w| placed[w]).count();
                    let d = pat_deg[v];
                    (links, d.0 + d.1 + d.2, std::cmp::Reverse(v))
                })
                .expect("unplaced vertex");
            anchor.push(pat_adj[best].iter().copied().filter(|&w| placed[w]).min());
            placed[best] = true;
            order.push(best);
        }

        let mut position = vec![0; n];
        for (i, &v) in order.iter().enumerate() {
            position[v] = i;
        }
        let mut checks = vec![Vec::new(); n];
        for (b, (k, _)) in bundles.iter().enumerate() {
            let last = if position[k.src] >= position[k.tgt] { k.src } else { k.tgt };
            checks[last].push(b);
        }

        let mut host_bundles: HashMap<Edge, Vec<usize>> = HashMap::new();
        let mut host_nbrs = vec![Vec::new(); host.vertex_count()];
        for (e, edge) in host.edges().iter().enumerate() {
            host_bundles
                .entry(key(directed, edge.src, edge.tgt))
                .or_default()
                .push(e);
            if !edge.is_loop() {
                host_nbrs[edge.src].push(edge.tgt);
                host_nbrs[edge.tgt].push(edge.src);
            }
        }
        for list in &mut host_nbrs {
            list.sort_unstable();
            list.dedup();
        }

        Matcher {
            pattern,
            host,
            directed,
            order,
            anchor,
            bundles,
            checks,
            pat_deg,
            host_deg: degrees(host),
            host_bundles,
            host_nbrs,
        }
    }

    fn host_bundle(&self, a: usize, b: usize) -> &[usize] {
        self.host_bundles
            .get(&key(self.directed, a, b))
            .map_or(&[], Vec::as_slice)
    }

    fn feasible(&self, v: usize, h: usize, state: &State) -> bool {
        let (po, pi, pl) = self.pat_deg[v];
        let (ho, hi, hl) = self.host_deg[h];
        if po > ho || pi > hi || pl > hl {
            return false;
        }
        self.checks[v].iter().all(|&b| {
            let (k, edges) = &self.bundles[b];
            let (ha, hb) = (mapped(state, v, h, k.src), mapped(state, v, h, k.tgt));
            self.host_bundle(ha, hb).len() >= edges.len()
        })
    }

    fn assign_vertex<F>(&self, depth: usize, state: &mut State, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&GraphMorphism) -> ControlFlow<()>,
    {
        if depth == self.order.len() {
            return self.assign_bundle(0, state, visit);
        }
        let v = self.order[depth];
        let candidates: Vec<usize> = match self.anchor[depth] {
            Some(a) => self.host_nbrs[state.vmap[a]].clone(),
            None => (0..self.host_deg.len()).collect(),
        };
        for h in candidates {
            if state.used[h] || !self.feasible(v, h, state) {
                continue;
            }
            state.vmap[v] = h;
            state.used[h] = true;
            let flow = self.assign_vertex(depth + 1, state, visit);
            state.used[h] = false;
            state.vmap[v] = usize::MAX;
            flow?;
        }
        ControlFlow::Continue(())
    }

    fn assign_bundle<F>(&self, b: usize, state: &mut State, visit: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&GraphMorphism) -> ControlFlow<()>,
    {
        if b == self.bundles.len() {
            let m = GraphMorphism {
                vmap: state.vmap.clone(),
                emap: state.emap.clone(),
            };
            debug_assert!(m.is_valid(self.pattern, self.host));
            return visit(&m);
        }
        let (k, edges) = &self.bundles[b];
        let host_edges = self.host_bundle(state.vmap[k.src], state.vmap[k.tgt]).to_vec();
        self.assign_edge(b, edges, 0, &host_edges, state, visit)
    }

    fn assign_edge<F>(
        &self,
        b: usize,
        edges: &[usize],
        i: usize,
        host_edges: &[usize],
        state: &mut State,
        visit: &mut F,
    ) -> ControlFlow<()>
    where
        F: FnMut(&GraphMorphism) -> ControlFlow<()>,
    {
        if i == edges.len() {
            return self.assign_bundle(b + 1, state, visit);
        }
        for &he in host_edges {
            if state.eused[he] {
                continue;
            }
            state.eused[he] = true;
            state.emap[edges[i]] = he;
            let flow = self.assign_edge(b, edges, i + 1, host_edges, state, visit);
            state.eused[he] = false;
            flow?;
        }
        ControlFlow::Continue(())
    }

}

fn mapped(state: &State, v: usize, h: usize, x: usize) -> usize {
    if x == v {
        h
    } else {
        state.vmap[x]
    }
}
