//! The canonical representation of the rule algebra on finite combinations
//! of graph isomorphism classes, together with diagonal observables.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::ControlFlow;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::algebra::{edge_creator, rational, RuleVector};
use crate::canon::{canonical_form, CanonicalKey};
use crate::dpo::{count_matches, derive_detailed, for_each_match};
use crate::error::Result;
use crate::graph::{GraphKind, GraphMorphism, Multigraph};
use crate::rule::LinearRule;

/// Coefficient field of a state vector.
pub trait Coefficient:
    Clone + PartialEq + fmt::Debug + fmt::Display + Zero + One + std::ops::AddAssign + std::ops::Mul<Output = Self>
{
    fn from_rational(r: &BigRational) -> Self;
    fn from_count(n: usize) -> Self;
}

impl Coefficient for BigRational {
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn from_count(n: usize) -> Self {
        BigRational::from_integer(n.into())
    }
}

impl Coefficient for f64 {
    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }

    fn from_count(n: usize) -> Self {
        n as f64
    }
}

/// A finite combination of graph isomorphism classes. Each key resolves to
/// the first canonical representative seen for it.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<C> {
    kind: GraphKind,
    terms: BTreeMap<CanonicalKey, C>,
    registry: BTreeMap<CanonicalKey, Multigraph>,
}

/// Exact states for algebraic checks.
pub type ExactState = StateVector<BigRational>;
/// Floating-point states for stochastic computations.
pub type FloatState = StateVector<f64>;

impl<C: Coefficient> StateVector<C> {
    pub fn zero(kind: GraphKind) -> Self {
        StateVector {
            kind,
            terms: BTreeMap::new(),
            registry: BTreeMap::new(),
        }
    }

    /// The basis vector `|g⟩`.
    pub fn basis(g: &Multigraph) -> Self {
        let mut s = StateVector::zero(g.kind());
        s.add_graph(g, C::one());
        s
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CanonicalKey, &C, &Multigraph)> {
        self.terms.iter().map(|(k, c)| (k, c, &self.registry[k]))
    }

    pub fn coefficient(&self, g: &Multigraph) -> C {
        self.coefficient_of(&canonical_form(g).key)
    }

    pub fn coefficient_of(&self, key: &CanonicalKey) -> C {
        self.terms.get(key).cloned().unwrap_or_else(C::zero)
    }

    /// Adds `c · |g⟩`. Panics if `g` has the wrong kind.
    pub fn add_graph(&mut self, g: &Multigraph, c: C) {
        assert_eq!(g.kind(), self.kind, "graph kind differs from state kind");
        let cf = canonical_form(g);
        self.add_canonical(cf.key, cf.representative, c);
    }

    /// Adds `c · |g⟩` for a graph already known to be the canonical
    /// representative of `key`.
    pub fn add_canonical(&mut self, key: CanonicalKey, g: Multigraph, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(slot) => {
                *slot += c;
                if slot.is_zero() {
                    self.terms.remove(&key);
                    self.registry.remove(&key);
                }
            }
            None => {
                self.terms.insert(key.clone(), c);
                self.registry.entry(key).or_insert(g);
            }
        }
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        self.kind.ensure(other.kind)?;
        let mut out = self.clone();
        for (k, c, g) in other.iter() {
            out.add_canonical(k.clone(), g.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn scaled(&self, s: &C) -> Self {
        let mut out = StateVector::zero(self.kind);
        for (k, c, g) in self.iter() {
            out.add_canonical(k.clone(), g.clone(), c.clone() * s.clone());
        }
        out
    }

    /// `⟨|ψ⟩`: the sum of all coefficients.
    pub fn projection(&self) -> C {
        let mut total = C::zero();
        for c in self.terms.values() {
            total += c.clone();
        }
        total
    }
}

impl<C: Coefficient> fmt::Display for StateVector<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (idx, (_, c, g)) in self.iter().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}·|{g}⟩")?;
        }
        Ok(())
    }
}

/// `ρ(δ(p))` applied to `|g⟩`, scaled by `c`, accumulated into `out`.
pub fn apply_rule_to_graph<C: Coefficient>(
    p: &LinearRule,
    g: &Multigraph,
    c: &C,
    out: &mut StateVector<C>,
) -> Result<()> {
    let mut failure = None;
    for_each_match(p, g, |m| match derive_detailed(p, m, g) {
        Ok(d) => {
            out.add_canonical(d.key, d.result, c.clone());
            ControlFlow::Continue(())
        }
        Err(e) => {
            failure = Some(e);
            ControlFlow::Break(())
        }
    })?;
    failure.map_or(Ok(()), Err)
}

/// `ρ(r)ψ`.
pub fn apply_rep<C: Coefficient>(r: &RuleVector, psi: &StateVector<C>) -> Result<StateVector<C>> {
    r.kind().ensure(psi.kind())?;
    let mut out = StateVector::zero(psi.kind());
    for (_, rc, p) in r.iter() {
        let rc = C::from_rational(rc);
        for (_, c, g) in psi.iter() {
            apply_rule_to_graph(p, g, &(rc.clone() * c.clone()), &mut out)?;
        }
    }
    Ok(out)
}

/// A diagonal operator counting admissible matches of `motif <- context ->
/// motif`, times a scale.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observable {
    rule: LinearRule,
    scale: BigRational,
}

impl Observable {
    /// `O_M^t` for a mono `t: K -> M`.
    pub fn new(motif: Multigraph, context: Multigraph, leg: GraphMorphism, scale: BigRational) -> Result<Self> {
        let rule = LinearRule::new(motif.clone(), context, motif, leg.clone(), leg)?;
        Ok(Observable { rule, scale })
    }

    /// Counts embeddings of `motif`, with all of it kept.
    pub fn motif(motif: Multigraph) -> Self {
        Observable {
            rule: LinearRule::identity(&motif),
            scale: BigRational::one(),
        }
    }

    /// The observable whose eigenvalue is `p`'s number of admissible matches.
    pub fn matches_of(p: &LinearRule) -> Self {
        let leg = p.i().clone();
        let rule = LinearRule::new(p.input().clone(), p.context().clone(), p.input().clone(), leg.clone(), leg)
            .expect("rule leg is a mono");
        Observable {
            rule,
            scale: BigRational::one(),
        }
    }

    /// `O_•`.
    pub fn vertex_count(kind: GraphKind) -> Self {
        Observable::motif(Multigraph::discrete(kind, 1))
    }

    /// `O_E`: half the number of embeddings of an undirected edge.
    pub fn edge_count() -> Self {
        Observable::motif(Multigraph::from_edges(GraphKind::Undirected, 2, &[(0, 1)])).scaled(rational(1, 2))
    }

    pub fn scaled(mut self, s: BigRational) -> Self {
        self.scale *= s;
        self
    }

    pub fn rule(&self) -> &LinearRule {
        &self.rule
    }

    pub fn scale(&self) -> &BigRational {
        &self.scale
    }

    pub fn eigenvalue(&self, g: &Multigraph) -> Result<BigRational> {
        Ok(&self.scale * BigRational::from_integer(count_matches(&self.rule, g)?.into()))
    }

    pub fn apply<C: Coefficient>(&self, psi: &StateVector<C>) -> Result<StateVector<C>> {
        self.rule.kind().ensure(psi.kind())?;
        let mut out = StateVector::zero(psi.kind());
        for (k, c, g) in psi.iter() {
            let w = C::from_rational(&self.eigenvalue(g)?);
            out.add_canonical(k.clone(), g.clone(), c.clone() * w);
        }
        Ok(out)
    }
}

pub fn observable_eigenvalue(o: &Observable, g: &Multigraph) -> Result<BigRational> {
    o.eigenvalue(g)
}

pub fn projection<C: Coefficient>(psi: &StateVector<C>) -> C {
    psi.projection()
}

/// `Σ_g ψ_g Π_j ω_j(g)`.
pub fn correlator<C: Coefficient>(obs: &[Observable], psi: &StateVector<C>) -> Result<C> {
    let mut total = C::zero();
    for (_, c, g) in psi.iter() {
        let mut w = c.clone();
        for o in obs {
            w = w * C::from_rational(&o.eigenvalue(g)?);
        }
        total += w;
    }
    Ok(total)
}

/// Edge multiplicities `{f, g, h}` of a three-vertex undirected graph,
/// sorted decreasingly.
pub type Partition = [usize; 3];

/// Coefficients of `ρ(e₊)ⁿ|•••⟩`, one per multigraph class on three
/// vertices with `n` edges, in reverse lexicographic order of the sorted
/// multiplicity triple. For `n >= 1` the coefficients are divided by 3;
/// `n = 0` returns the identity coefficient 1.
pub fn hw_sequence(n: usize) -> Result<Vec<(Partition, BigRational)>> {
    let ep = edge_creator();
    let mut psi = ExactState::basis(&Multigraph::discrete(GraphKind::Undirected, 3));
    for _ in 0..n {
        psi = apply_rep(&ep, &psi)?;
    }
    let norm = if n == 0 { rational(1, 1) } else { rational(1, 3) };
    let mut rows: Vec<(Partition, BigRational)> = psi
        .iter()
        .map(|(_, c, g)| (partition_of(g), c * &norm))
        .collect();
    rows.sort_by_key(|r| std::cmp::Reverse(r.0));
    Ok(rows)
}

fn partition_of(g: &Multigraph) -> Partition {
    let mut p = [g.multiplicity(0, 1), g.multiplicity(0, 2), g.multiplicity(1, 2)];
    p.sort_unstable_by(|a, b| b.cmp(a));
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{annihilation, creation, edge_annihilator, vertex_pair_operator};
    use GraphKind::Undirected;

    fn int(n: i64) -> BigRational {
        rational(n, 1)
    }

    fn discrete(n: usize) -> ExactState {
        ExactState::basis(&Multigraph::discrete(Undirected, n))
    }

    #[test]
    fn ladder() {
        let xd = creation(Undirected);
        let x = annihilation(Undirected);
        for n in 0..=6 {
            assert_eq!(apply_rep(&xd, &discrete(n)).unwrap(), discrete(n + 1));
            let down = apply_rep(&x, &discrete(n)).unwrap();
            if n == 0 {
                assert!(down.is_zero());
            } else {
                assert_eq!(down, discrete(n - 1).scaled(&int(n as i64)));
            }
        }
    }

    #[test]
    fn unit_acts_as_identity() {
        let g = Multigraph::from_edges(Undirected, 3, &[(0, 1), (1, 1)]);
        let psi = ExactState::basis(&g);
        assert_eq!(apply_rep(&RuleVector::unit(Undirected), &psi).unwrap(), psi);
    }

    #[test]
    fn eigenvalues() {
        let tri = Multigraph::from_edges(Undirected, 3, &[(0, 1), (1, 2), (0, 2)]);
        assert_eq!(Observable::vertex_count(Undirected).eigenvalue(&tri).unwrap(), int(3));
        assert_eq!(Observable::edge_count().eigenvalue(&tri).unwrap(), int(3));
        let ov = Observable::vertex_count(Undirected);
        for n in 0..6 {
            let g = Multigraph::discrete(Undirected, n);
            let v = ov.eigenvalue(&g).unwrap();
            let d = (&v * &v - &v) * rational(1, 2);
            assert_eq!(d, int((n * n.saturating_sub(1) / 2) as i64));
            let dop = apply_rep(&vertex_pair_operator(), &ExactState::basis(&g)).unwrap();
            assert_eq!(dop, ExactState::basis(&g).scaled(&d));
        }
    }

    #[test]
    fn correlators_and_projection() {
        let tri = Multigraph::from_edges(Undirected, 3, &[(0, 1), (1, 2), (0, 2)]);
        let path = Multigraph::from_edges(Undirected, 3, &[(0, 1), (1, 2)]);
        let mut psi = ExactState::zero(Undirected);
        psi.add_graph(&tri, rational(1, 2));
        psi.add_graph(&path, rational(1, 2));
        assert_eq!(correlator(&[Observable::edge_count()], &psi).unwrap(), rational(5, 2));
        let ov = Observable::vertex_count(Undirected);
        assert_eq!(correlator(&[ov.clone(), ov], &discrete(4)).unwrap(), int(16));

        let mut s = ExactState::zero(Undirected);
        s.add_graph(&tri, int(2));
        s.add_graph(&path, int(3));
        assert_eq!(s.projection(), int(5));
    }

    #[test]
    fn jump_closure_on_small_cases() {
        let g = Multigraph::from_edges(Undirected, 4, &[(0, 1), (1, 2), (1, 2), (3, 3)]);
        let psi = ExactState::basis(&g);
        for p in [
            LinearRule::edge_deletion(),
            LinearRule::edge_creation(),
            LinearRule::vertex_deletion(Undirected, 1),
            LinearRule::vertex_deletion(Undirected, 2),
        ] {
            let lhs = apply_rep(&RuleVector::delta(&p), &psi).unwrap().projection();
            let rhs = Observable::matches_of(&p).apply(&psi).unwrap().projection();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn edge_operators_keep_vertex_count() {
        let g = Multigraph::from_edges(Undirected, 3, &[(0, 1)]);
        let psi = ExactState::basis(&g);
        for op in [edge_creator(), edge_annihilator(), vertex_pair_operator()] {
            for (_, _, h) in apply_rep(&op, &psi).unwrap().iter() {
                assert_eq!(h.vertex_count(), 3);
            }
        }
    }

    #[test]
    fn sequence_rows() {
        assert_eq!(hw_sequence(0).unwrap(), vec![([0, 0, 0], int(1))]);
        assert_eq!(hw_sequence(1).unwrap(), vec![([1, 0, 0], int(1))]);
        assert_eq!(hw_sequence(2).unwrap(), vec![([2, 0, 0], int(1)), ([1, 1, 0], int(2))]);
        assert_eq!(
            hw_sequence(3).unwrap(),
            vec![([3, 0, 0], int(1)), ([2, 1, 0], int(6)), ([1, 1, 1], int(2))]
        );
    }
}
