//! Continuous-time Markov chains generated by rewriting rules with base
//! rates: the generator acting on states, explicit truncated generators,
//! stochastic simulation and closed-form results for edge birth-death.

mod closed_form;
mod master;
mod ssa;

use std::collections::{HashMap, VecDeque};
use std::ops::ControlFlow;

use crate::canon::{canonical_form, CanonicalKey};
use crate::dpo::{count_matches, derive_detailed, for_each_match};
use crate::error::{Error, Result};
use crate::graph::{GraphKind, Multigraph};
use crate::rep::{apply_rule_to_graph, FloatState, Observable};
use crate::rule::LinearRule;

pub use closed_form::{edge_distribution_closed_form, edge_mgf, edge_moment_closed_form, edge_truncation};
pub use master::{master_equation_integrate, MasterSolution, OdeOptions};
pub use ssa::{ssa_simulate, Event, SsaConfig, Trajectory, RNG_NAME};

/// A rule fired with base rate `rate` per admissible match.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub rule: LinearRule,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CtmcSpec {
    transitions: Vec<Transition>,
    initial: Multigraph,
}

impl CtmcSpec {
    pub fn new(transitions: Vec<Transition>, initial: Multigraph) -> Result<Self> {
        for (j, t) in transitions.iter().enumerate() {
            if !(t.rate.is_finite() && t.rate > 0.0) {
                return Err(Error::Stochastic(format!(
                    "transition {j} has rate {}, expected a positive finite number",
                    t.rate
                )));
            }
            t.rule.kind().ensure(initial.kind())?;
        }
        Ok(CtmcSpec { transitions, initial })
    }

    /// Edge creation between any two vertices at rate `κ₊/2` per match and
    /// edge deletion at rate `κ₋/2` per match, so that one edge appears at
    /// total rate `κ₊·C(N_V, 2)` and each edge disappears at rate `κ₋`.
    /// Starts from `n_v` vertices carrying `n_e` edges spread over vertex
    /// pairs in lexicographic order. A zero rate drops that transition.
    pub fn edge_birth_death(n_v: usize, n_e: usize, k_plus: f64, k_minus: f64) -> Result<Self> {
        if n_e > 0 && n_v < 2 {
            return Err(Error::Stochastic("edges need at least two vertices".into()));
        }
        for k in [k_plus, k_minus] {
            if !(k.is_finite() && k >= 0.0) {
                return Err(Error::Stochastic(format!("rate {k} is not a non-negative number")));
            }
        }
        let pairs: Vec<(usize, usize)> = (0..n_v)
            .flat_map(|a| (a + 1..n_v).map(move |b| (a, b)))
            .collect();
        let edges: Vec<(usize, usize)> = (0..n_e).map(|j| pairs[j % pairs.len()]).collect();
        let initial = Multigraph::from_edges(GraphKind::Undirected, n_v, &edges);
        let mut transitions = Vec::new();
        if k_plus > 0.0 {
            transitions.push(Transition {
                rule: LinearRule::edge_creation(),
                rate: k_plus / 2.0,
            });
        }
        if k_minus > 0.0 {
            transitions.push(Transition {
                rule: LinearRule::edge_deletion(),
                rate: k_minus / 2.0,
            });
        }
        CtmcSpec::new(transitions, initial)
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn initial(&self) -> &Multigraph {
        &self.initial
    }

    pub fn kind(&self) -> GraphKind {
        self.initial.kind()
    }
}

/// `Hψ = Σ_j κ_j (ρ(δ(p_j)) − O_{I_j}) ψ`.
pub fn hamiltonian_action(spec: &CtmcSpec, psi: &FloatState) -> Result<FloatState> {
    spec.kind().ensure(psi.kind())?;
    let mut out = FloatState::zero(psi.kind());
    for t in &spec.transitions {
        let diag = Observable::matches_of(&t.rule);
        for (key, c, g) in psi.iter() {
            apply_rule_to_graph(&t.rule, g, &(c * t.rate), &mut out)?;
            let w = diag.eigenvalue(g)?;
            let w = num_traits::ToPrimitive::to_f64(&w).unwrap_or(f64::NAN);
            out.add_canonical(key.clone(), g.clone(), -c * t.rate * w);
        }
    }
    Ok(out)
}

/// Jump rates out of one state, grouped by target class.
fn outgoing(spec: &CtmcSpec, g: &Multigraph) -> Result<Vec<(CanonicalKey, Multigraph, f64)>> {
    let mut by_key: HashMap<CanonicalKey, (Multigraph, f64)> = HashMap::new();
    let mut order = Vec::new();
    for t in &spec.transitions {
        let mut failure = None;
        for_each_match(&t.rule, g, |m| match derive_detailed(&t.rule, m, g) {
            Ok(d) => {
                let slot = by_key.entry(d.key.clone()).or_insert_with(|| {
                    order.push(d.key.clone());
                    (d.result, 0.0)
                });
                slot.1 += t.rate;
                ControlFlow::Continue(())
            }
            Err(e) => {
                failure = Some(e);
                ControlFlow::Break(())
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
    }
    Ok(order
        .into_iter()
        .map(|k| {
            let (g, r) = by_key.remove(&k).expect("recorded key");
            (k, g, r)
        })
        .collect())
}

/// Explicit generator on a finite state set: `rates[i][j]` is the jump
/// rate from state `i` to state `j` (`j != i`) and the diagonal holds minus
/// the total exit rate, including jumps leaving the set.
#[derive(Clone, Debug)]
pub struct GeneratorReport {
    pub states: Vec<Multigraph>,
    pub rates: Vec<Vec<f64>>,
    /// Diagonal entries are `<= 0`.
    pub diagonal_nonpositive: bool,
    /// Off-diagonal entries are `>= 0`.
    pub off_diagonal_nonnegative: bool,
    /// Rows without leakage sum to zero (within rounding).
    pub rows_sum_to_zero: bool,
    /// `(row, rate)` for states with jumps leaving the set.
    pub leakage: Vec<(usize, f64)>,
}

impl GeneratorReport {
    /// The three generator conditions hold on every row without leakage.
    pub fn is_generator(&self) -> bool {
        self.diagonal_nonpositive && self.off_diagonal_nonnegative && self.rows_sum_to_zero
    }
}

/// Builds and checks the generator restricted to `states` (matched up to
/// isomorphism; duplicates are an error).
pub fn infinitesimal_generator_check(spec: &CtmcSpec, states: &[Multigraph]) -> Result<GeneratorReport> {
    let mut index = HashMap::new();
    for (i, g) in states.iter().enumerate() {
        spec.kind().ensure(g.kind())?;
        if index.insert(canonical_form(g).key, i).is_some() {
            return Err(Error::Precondition(format!("state {i} repeats an earlier state")));
        }
    }
    let n = states.len();
    let mut rates = vec![vec![0.0; n]; n];
    let mut leakage = Vec::new();
    for (i, g) in states.iter().enumerate() {
        let mut leak = 0.0;
        for (key, _, r) in outgoing(spec, g)? {
            rates[i][i] -= r;
            match index.get(&key) {
                Some(&j) => rates[i][j] += r,
                None => leak += r,
            }
        }
        if leak > 0.0 {
            leakage.push((i, leak));
        }
    }
    let leaking: Vec<bool> = {
        let mut v = vec![false; n];
        for &(i, _) in &leakage {
            v[i] = true;
        }
        v
    };
    let diagonal_nonpositive = (0..n).all(|i| rates[i][i] <= 0.0);
    let off_diagonal_nonnegative = (0..n).all(|i| (0..n).all(|j| i == j || rates[i][j] >= 0.0));
    let rows_sum_to_zero = (0..n).filter(|&i| !leaking[i]).all(|i| {
        let sum: f64 = rates[i].iter().sum();
        let scale: f64 = rates[i].iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        sum.abs() <= 1e-12 * scale
    });
    Ok(GeneratorReport {
        states: states.to_vec(),
        rates,
        diagonal_nonpositive,
        off_diagonal_nonnegative,
        rows_sum_to_zero,
        leakage,
    })
}

/// States reachable from the initial graph while staying inside `keep`,
/// with sparse jump rates and the rate of leaving the set per state.
#[derive(Clone, Debug)]
pub struct StateSpace {
    pub states: Vec<Multigraph>,
    pub keys: Vec<CanonicalKey>,
    /// Per state: `(target, rate)` for targets inside the set.
    pub jumps: Vec<Vec<(usize, f64)>>,
    /// Per state: total exit rate (including leakage).
    pub exit: Vec<f64>,
    /// Per state: rate of jumps leaving the set.
    pub leak: Vec<f64>,
}

/// Breadth-first exploration of the truncated state space.
pub fn explore(spec: &CtmcSpec, keep: &dyn Fn(&Multigraph) -> bool, max_states: usize) -> Result<StateSpace> {
    let init = canonical_form(&spec.initial);
    if !keep(&init.representative) {
        return Err(Error::Precondition("initial state lies outside the truncation".into()));
    }
    let mut space = StateSpace {
        states: vec![init.representative],
        keys: vec![init.key.clone()],
        jumps: Vec::new(),
        exit: Vec::new(),
        leak: Vec::new(),
    };
    let mut index: HashMap<CanonicalKey, usize> = HashMap::from([(init.key, 0)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let mut jumps = Vec::new();
        let (mut exit, mut leak) = (0.0, 0.0);
        for (key, g, r) in outgoing(spec, &space.states[i].clone())? {
            exit += r;
            if let Some(&j) = index.get(&key) {
                jumps.push((j, r));
            } else if keep(&g) {
                if space.states.len() >= max_states {
                    return Err(Error::Stochastic(format!(
                        "truncated state space exceeds {max_states} states"
                    )));
                }
                let j = space.states.len();
                index.insert(key.clone(), j);
                space.states.push(g);
                space.keys.push(key);
                queue.push_back(j);
                jumps.push((j, r));
            } else {
                leak += r;
            }
        }
        // States are processed in discovery order.
        debug_assert_eq!(space.jumps.len(), i);
        space.jumps.push(jumps);
        space.exit.push(exit);
        space.leak.push(leak);
    }
    Ok(space)
}

/// Number of admissible matches of each transition's rule: the jump
/// propensities divided by the base rates.
pub fn match_counts(spec: &CtmcSpec, g: &Multigraph) -> Result<Vec<usize>> {
    spec.transitions.iter().map(|t| count_matches(&t.rule, g)).collect()
}
