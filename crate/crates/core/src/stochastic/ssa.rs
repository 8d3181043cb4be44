//! Gillespie's direct method on graph states.

use std::collections::HashMap;
use std::ops::ControlFlow;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::Exp1;

use crate::canon::{canonical_form, CanonicalKey};
use crate::dpo::{count_matches, derive_detailed, derive_unlabeled, for_each_match};
use crate::error::{Error, Result};
use crate::graph::{GraphMorphism, Multigraph};
use crate::rep::Observable;
use crate::rule::LinearRule;

use super::CtmcSpec;

/// Generator behind every trajectory: ChaCha20 seeded with the 64-bit
/// seed, one stream per trajectory index.
pub const RNG_NAME: &str = "ChaCha20 (rand_chacha, seed_from_u64, stream = trajectory index)";

/// States with at most this many vertices are canonicalized and cached.
const CACHE_VERTEX_LIMIT: usize = 16;
/// Successor lists are cached when a transition has at most this many matches.
const SUCCESSOR_LIMIT: usize = 512;
const CACHE_CAPACITY: usize = 200_000;

#[derive(Clone, Debug)]
pub struct SsaConfig {
    pub t_max: f64,
    pub trajectories: usize,
    pub seed: u64,
    /// Times at which observables are sampled (left limits of the path).
    pub sample_times: Vec<f64>,
    /// Keep the event list of each trajectory.
    pub record_events: bool,
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Event {
    pub time: f64,
    pub transition: usize,
    /// Class of the state after the event, recorded for small states.
    pub state: Option<CanonicalKey>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub index: usize,
    pub seed: u64,
    pub events: Vec<Event>,
    /// `samples[i][j]`: observable `j` at sample time `i`.
    pub samples: Vec<Vec<f64>>,
    pub event_count: usize,
    /// Smallest and largest vertex count of any visited state.
    pub vertex_range: (usize, usize),
    pub final_state: Multigraph,
}

/// Runs independent trajectories of the chain up to `t_max`.
pub fn ssa_simulate(spec: &CtmcSpec, config: &SsaConfig, observables: &[Observable]) -> Result<Vec<Trajectory>> {
    if !(config.t_max.is_finite() && config.t_max >= 0.0) {
        return Err(Error::Stochastic(format!("t_max = {} is not a finite non-negative time", config.t_max)));
    }
    if config.trajectories == 0 {
        return Err(Error::Stochastic("at least one trajectory is required".into()));
    }
    if config.sample_times.iter().any(|t| !t.is_finite() || *t < 0.0 || *t > config.t_max)
        || config.sample_times.windows(2).any(|w| w[1] < w[0])
    {
        return Err(Error::Stochastic("sample times must be increasing and within [0, t_max]".into()));
    }
    for o in observables {
        o.rule().kind().ensure(spec.kind())?;
    }
    run_all(spec, config, observables)
}

#[cfg(feature = "parallel")]
const MIN_CHUNK: usize = 64;

#[cfg(feature = "parallel")]
fn run_all(spec: &CtmcSpec, config: &SsaConfig, observables: &[Observable]) -> Result<Vec<Trajectory>> {
    use rayon::prelude::*;
    let work = || -> Result<Vec<Trajectory>> {
        // A few chunks per thread; larger chunks share more of the cache.
        let size = config
            .trajectories
            .div_ceil(4 * rayon::current_num_threads())
            .max(MIN_CHUNK);
        let chunks: Vec<(usize, usize)> = (0..config.trajectories)
            .step_by(size)
            .map(|s| (s, (s + size).min(config.trajectories)))
            .collect();
        let parts: Vec<Result<Vec<Trajectory>>> = chunks
            .par_iter()
            .map(|&(a, b)| run_chunk(spec, config, observables, a, b))
            .collect();
        let mut out = Vec::with_capacity(config.trajectories);
        for p in parts {
            out.extend(p?);
        }
        Ok(out)
    };
    match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Stochastic(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_all(spec: &CtmcSpec, config: &SsaConfig, observables: &[Observable]) -> Result<Vec<Trajectory>> {
    run_chunk(spec, config, observables, 0, config.trajectories)
}

/// Runs trajectories `a..b` sharing one state cache. The cache only
/// memoizes deterministic functions of the state, so results do not
/// depend on how trajectories are grouped.
fn run_chunk(
    spec: &CtmcSpec,
    config: &SsaConfig,
    observables: &[Observable],
    a: usize,
    b: usize,
) -> Result<Vec<Trajectory>> {
    let mut sim = Simulator {
        spec,
        observables,
        index: HashMap::new(),
        keys: Vec::new(),
        states: Vec::new(),
    };
    (a..b).map(|i| sim.run(config, i)).collect()
}

struct CachedState {
    graph: Multigraph,
    counts: Vec<usize>,
    /// Per transition, the successor class of each match (if small enough).
    successors: Vec<Option<Vec<usize>>>,
    observables: Vec<f64>,
}

/// A state either as a cached class or as a concrete graph.
enum State {
    Cached(usize),
    Raw(Multigraph),
}

struct Simulator<'a> {
    spec: &'a CtmcSpec,
    observables: &'a [Observable],
    index: HashMap<CanonicalKey, usize>,
    keys: Vec<CanonicalKey>,
    states: Vec<CachedState>,
}

impl Simulator<'_> {
    fn run(&mut self, config: &SsaConfig, index: usize) -> Result<Trajectory> {
        let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
        rng.set_stream(index as u64);
        let mut state = self.enter(self.spec.initial().clone())?;
        let mut t = 0.0;
        let mut events = Vec::new();
        let mut event_count = 0usize;
        let mut samples = Vec::with_capacity(config.sample_times.len());
        let mut next_sample = 0usize;
        let mut vmin = usize::MAX;
        let mut vmax = 0usize;

        loop {
            let n_v = self.graph(&state).vertex_count();
            vmin = vmin.min(n_v);
            vmax = vmax.max(n_v);
            let counts = self.counts(&state)?;
            let props: Vec<f64> = counts
                .iter()
                .zip(self.spec.transitions())
                .map(|(&c, tr)| c as f64 * tr.rate)
                .collect();
            let total: f64 = props.iter().sum();
            if !total.is_finite() {
                return Err(Error::Stochastic("total propensity overflowed".into()));
            }
            let wait = if total > 0.0 {
                let e: f64 = rng.sample(Exp1);
                e / total
            } else {
                f64::INFINITY
            };
            let t_next = t + wait;
            // Samples strictly before the jump see the current state.
            while next_sample < config.sample_times.len() && config.sample_times[next_sample] < t_next {
                samples.push(self.observe(&state)?);
                next_sample += 1;
            }
            if t_next > config.t_max {
                break;
            }
            t = t_next;

            let mut u = rng.random::<f64>() * total;
            let mut j = props.len() - 1;
            for (idx, &p) in props.iter().enumerate() {
                if u < p {
                    j = idx;
                    break;
                }
                u -= p;
            }
            while counts[j] == 0 {
                j -= 1;
            }
            let m = rng.random_range(0..counts[j]);
            state = self.step(state, j, m)?;
            event_count += 1;
            if config.record_events {
                let key = match &state {
                    State::Cached(s) => Some(self.keys[*s].clone()),
                    State::Raw(_) => None,
                };
                events.push(Event {
                    time: t,
                    transition: j,
                    state: key,
                });
            }
        }
        let final_state = self.graph(&state).clone();
        Ok(Trajectory {
            index,
            seed: config.seed,
            events,
            samples,
            event_count,
            vertex_range: (vmin, vmax),
            final_state,
        })
    }

    fn graph<'s>(&'s self, state: &'s State) -> &'s Multigraph {
        match state {
            State::Cached(s) => &self.states[*s].graph,
            State::Raw(g) => g,
        }
    }

    fn enter(&mut self, g: Multigraph) -> Result<State> {
        if g.vertex_count() > CACHE_VERTEX_LIMIT {
            return Ok(State::Raw(g));
        }
        let cf = canonical_form(&g);
        self.enter_canonical(cf.key, cf.representative)
    }

    fn enter_canonical(&mut self, key: CanonicalKey, g: Multigraph) -> Result<State> {
        if let Some(&s) = self.index.get(&key) {
            return Ok(State::Cached(s));
        }
        if self.states.len() >= CACHE_CAPACITY {
            return Ok(State::Raw(g));
        }
        let counts = self.match_counts(&g)?;
        let observables = self.observe_graph(&g)?;
        let s = self.states.len();
        self.index.insert(key.clone(), s);
        self.keys.push(key);
        self.states.push(CachedState {
            graph: g,
            successors: vec![None; counts.len()],
            counts,
            observables,
        });
        Ok(State::Cached(s))
    }

    fn match_counts(&self, g: &Multigraph) -> Result<Vec<usize>> {
        self.spec
            .transitions()
            .iter()
            .map(|t| count_matches(&t.rule, g))
            .collect()
    }

    fn counts(&self, state: &State) -> Result<Vec<usize>> {
        match state {
            State::Cached(s) => Ok(self.states[*s].counts.clone()),
            State::Raw(g) => self.match_counts(g),
        }
    }

    fn observe_graph(&self, g: &Multigraph) -> Result<Vec<f64>> {
        self.observables
            .iter()
            .map(|o| Ok(o.eigenvalue(g)?.to_f64().unwrap_or(f64::NAN)))
            .collect()
    }

    fn observe(&self, state: &State) -> Result<Vec<f64>> {
        match state {
            State::Cached(s) => Ok(self.states[*s].observables.clone()),
            State::Raw(g) => self.observe_graph(g),
        }
    }

    /// Fires match number `m` of transition `j`.
    fn step(&mut self, state: State, j: usize, m: usize) -> Result<State> {
        let rule = &self.spec.transitions()[j].rule;
        let s = match state {
            State::Raw(g) => {
                let mm = nth_match(rule, &g, m)?;
                let h = derive_unlabeled(rule, &mm, &g)?;
                return self.enter(h);
            }
            State::Cached(s) => s,
        };
        if let Some(succ) = &self.states[s].successors[j] {
            return Ok(State::Cached(succ[m]));
        }
        let g = self.states[s].graph.clone();
        if self.states[s].counts[j] <= SUCCESSOR_LIMIT {
            let derived = derive_all(rule, &g)?;
            let mut succ = Vec::with_capacity(derived.len());
            for (key, h) in derived {
                match self.enter_canonical(key, h)? {
                    State::Cached(t) => succ.push(t),
                    State::Raw(_) => break,
                }
            }
            if succ.len() == self.states[s].counts[j] {
                let next = succ[m];
                self.states[s].successors[j] = Some(succ);
                return Ok(State::Cached(next));
            }
        }
        let mm = nth_match(rule, &g, m)?;
        let d = derive_detailed(rule, &mm, &g)?;
        self.enter_canonical(d.key, d.result)
    }
}

/// Canonical results of applying `rule` at each of its matches, in match order.
fn derive_all(rule: &LinearRule, g: &Multigraph) -> Result<Vec<(CanonicalKey, Multigraph)>> {
    let mut derived = Vec::new();
    let mut failure = None;
    for_each_match(rule, g, |m| match derive_detailed(rule, m, g) {
        Ok(d) => {
            derived.push((d.key, d.result));
            ControlFlow::Continue(())
        }
        Err(e) => {
            failure = Some(e);
            ControlFlow::Break(())
        }
    })?;
    failure.map_or(Ok(derived), Err)
}

fn nth_match(rule: &LinearRule, g: &Multigraph, n: usize) -> Result<GraphMorphism> {
    let mut seen = 0usize;
    let mut found = None;
    for_each_match(rule, g, |m| {
        if seen == n {
            found = Some(m.clone());
            ControlFlow::Break(())
        } else {
            seen += 1;
            ControlFlow::Continue(())
        }
    })?;
    found.ok_or_else(|| Error::Stochastic("match index out of range".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphKind::Undirected;

    fn config(trajectories: usize, seed: u64) -> SsaConfig {
        SsaConfig {
            t_max: 3.0,
            trajectories,
            seed,
            sample_times: vec![0.0, 1.0, 2.0, 3.0],
            record_events: true,
            workers: None,
        }
    }

    #[test]
    fn same_seed_same_trajectories() {
        let spec = CtmcSpec::edge_birth_death(4, 2, 1.0, 0.5).unwrap();
        let obs = [Observable::edge_count()];
        let a = ssa_simulate(&spec, &config(130, 7), &obs).unwrap();
        let b = ssa_simulate(&spec, &config(130, 7), &obs).unwrap();
        assert_eq!(a, b);
        let c = ssa_simulate(&spec, &config(130, 8), &obs).unwrap();
        assert_ne!(a, c);
        // Trajectory i does not depend on how many others are run.
        let d = ssa_simulate(&spec, &config(3, 7), &obs).unwrap();
        assert_eq!(&a[..3], &d[..]);
    }

    #[test]
    fn stuck_chain_stays_put() {
        let g = Multigraph::discrete(Undirected, 3);
        let spec = CtmcSpec::new(
            vec![super::super::Transition {
                rule: LinearRule::edge_deletion(),
                rate: 5.0,
            }],
            g,
        )
        .unwrap();
        let obs = [Observable::vertex_count(Undirected), Observable::edge_count()];
        for t in ssa_simulate(&spec, &config(10, 1), &obs).unwrap() {
            assert_eq!(t.event_count, 0);
            assert!(t.samples.iter().all(|s| s == &vec![3.0, 0.0]));
        }
    }

    #[test]
    fn samples_and_events_are_ordered() {
        let spec = CtmcSpec::edge_birth_death(3, 0, 2.0, 1.0).unwrap();
        let obs = [Observable::vertex_count(Undirected), Observable::edge_count()];
        for t in ssa_simulate(&spec, &config(50, 3), &obs).unwrap() {
            assert_eq!(t.samples.len(), 4);
            assert_eq!(t.samples[0], vec![3.0, 0.0]);
            assert!(t.samples.iter().all(|s| s[0] == 3.0));
            assert_eq!(t.vertex_range, (3, 3));
            assert!(t.events.windows(2).all(|w| w[0].time < w[1].time));
            assert!(t.events.iter().all(|e| e.time <= 3.0 && e.state.is_some()));
            assert_eq!(t.events.len(), t.event_count);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let spec = CtmcSpec::edge_birth_death(2, 0, 1.0, 1.0).unwrap();
        let mut c = config(1, 0);
        c.trajectories = 0;
        assert!(ssa_simulate(&spec, &c, &[]).is_err());
        let mut c = config(1, 0);
        c.sample_times = vec![2.0, 1.0];
        assert!(ssa_simulate(&spec, &c, &[]).is_err());
        let mut c = config(1, 0);
        c.t_max = f64::INFINITY;
        assert!(ssa_simulate(&spec, &c, &[]).is_err());
    }

    #[test]
    fn large_states_run_uncached() {
        let spec = CtmcSpec::edge_birth_death(20, 0, 1.0, 1.0).unwrap();
        let mut c = config(2, 11);
        c.t_max = 0.05;
        c.sample_times = vec![0.05];
        for t in ssa_simulate(&spec, &c, &[Observable::vertex_count(Undirected)]).unwrap() {
            assert_eq!(t.final_state.vertex_count(), 20);
            assert_eq!(t.samples, vec![vec![20.0]]);
            assert!(t.events.iter().all(|e| e.state.is_none()));
        }
    }
}
