//! The rule algebra: finite rational combinations of rule isomorphism
//! classes, multiplied by summing composites over all admissible overlaps.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::compose::{compose_rules, for_each_overlap};
use crate::error::Result;
use crate::graph::GraphKind;
use crate::rule::{LinearRule, RuleKey};

/// A finitely supported rational combination of rule classes. Each stored
/// key resolves to a canonically labeled representative rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleVector {
    kind: GraphKind,
    terms: BTreeMap<RuleKey, BigRational>,
    registry: BTreeMap<RuleKey, LinearRule>,
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl RuleVector {
    pub fn zero(kind: GraphKind) -> Self {
        RuleVector {
            kind,
            terms: BTreeMap::new(),
            registry: BTreeMap::new(),
        }
    }

    /// The basis vector of `p`'s class.
    pub fn delta(p: &LinearRule) -> Self {
        let mut v = RuleVector::zero(p.kind());
        v.add_rule(p, BigRational::one());
        v
    }

    /// The unit `δ(∅ <- ∅ -> ∅)`.
    pub fn unit(kind: GraphKind) -> Self {
        RuleVector::delta(&LinearRule::empty(kind))
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

    /// Terms in key order, with their representative rules.
    pub fn iter(&self) -> impl Iterator<Item = (&RuleKey, &BigRational, &LinearRule)> {
        self.terms.iter().map(|(k, c)| (k, c, &self.registry[k]))
    }

    pub fn coefficient(&self, p: &LinearRule) -> BigRational {
        self.coefficient_of(&p.key())
    }

    pub fn coefficient_of(&self, key: &RuleKey) -> BigRational {
        self.terms.get(key).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Adds `c · δ(p)`. Panics if `p` has the wrong kind.
    pub fn add_rule(&mut self, p: &LinearRule, c: BigRational) {
        assert_eq!(p.kind(), self.kind, "rule kind differs from vector kind");
        let canonical = p.canonical();
        self.add_canonical(canonical.key, canonical.rule, c);
    }

    fn add_canonical(&mut self, key: RuleKey, rule: LinearRule, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(key.clone()).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
            self.registry.remove(&key);
        } else {
            self.registry.entry(key).or_insert(rule);
        }
    }

    fn accumulate(&mut self, other: &RuleVector, scale: &BigRational) -> Result<()> {
        self.kind.ensure(other.kind)?;
        for (k, c, p) in other.iter() {
            self.add_canonical(k.clone(), p.clone(), c * scale);
        }
        Ok(())
    }

    pub fn plus(&self, other: &RuleVector) -> Result<RuleVector> {
        let mut out = self.clone();
        out.accumulate(other, &BigRational::one())?;
        Ok(out)
    }

    pub fn minus(&self, other: &RuleVector) -> Result<RuleVector> {
        let mut out = self.clone();
        out.accumulate(other, &-BigRational::one())?;
        Ok(out)
    }

    pub fn scaled(&self, c: &BigRational) -> RuleVector {
        let mut out = RuleVector::zero(self.kind);
        if c.is_zero() {
            return out;
        }
        for (k, v) in &self.terms {
            out.terms.insert(k.clone(), v * c);
            out.registry.insert(k.clone(), self.registry[k].clone());
        }
        out
    }

    /// Linear combination `Σ c_j δ(p_j)`.
    pub fn from_terms<'a, I>(kind: GraphKind, terms: I) -> RuleVector
    where
        I: IntoIterator<Item = (BigRational, &'a LinearRule)>,
    {
        let mut v = RuleVector::zero(kind);
        for (c, p) in terms {
            v.add_rule(p, c);
        }
        v
    }

    /// The rule algebra product `self * other`: `self` is applied after `other`.
    pub fn product(&self, other: &RuleVector) -> Result<RuleVector> {
        self.kind.ensure(other.kind)?;
        let mut out = RuleVector::zero(self.kind);
        for (_, c2, p2) in self.iter() {
            for (_, c1, p1) in other.iter() {
                let c = c2 * c1;
                let comp = basis_product(p2, p1)?;
                out.accumulate(&comp, &c)?;
            }
        }
        Ok(out)
    }

    pub fn commutator(&self, other: &RuleVector) -> Result<RuleVector> {
        self.product(other)?.minus(&other.product(self)?)
    }

    /// Bilinear extension of the disjoint union of rules.
    pub fn disjoint_union(&self, other: &RuleVector) -> Result<RuleVector> {
        self.kind.ensure(other.kind)?;
        let mut out = RuleVector::zero(self.kind);
        for (_, c2, p2) in self.iter() {
            for (_, c1, p1) in other.iter() {
                let q = crate::compose::disjoint_union_rule(p2, p1)?;
                out.add_rule(&q, c2 * c1);
            }
        }
        Ok(out)
    }

    /// `self^{*n}`, with `self^{*0}` the unit.
    pub fn power(&self, n: usize) -> Result<RuleVector> {
        let mut out = RuleVector::unit(self.kind);
        for _ in 0..n {
            out = self.product(&out)?;
        }
        Ok(out)
    }
}

impl fmt::Display for RuleVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (idx, (_, c, p)) in self.iter().enumerate() {
            if idx > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c}·({p})")?;
        }
        Ok(())
    }
}

/// `δ(p₂) * δ(p₁)`: one composite per admissible overlap.
pub fn basis_product(p2: &LinearRule, p1: &LinearRule) -> Result<RuleVector> {
    let mut out = RuleVector::zero(p2.kind());
    let mut failure = None;
    for_each_overlap(p2, p1, |ov| match compose_rules(p2, ov, p1) {
        Ok(q) => {
            out.add_rule(&q, BigRational::one());
            ControlFlow::Continue(())
        }
        Err(e) => {
            failure = Some(e);
            ControlFlow::Break(())
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Whether `δ(p₃) * (δ(p₂) * δ(p₁)) = (δ(p₃) * δ(p₂)) * δ(p₁)` exactly.
pub fn check_associativity(p1: &LinearRule, p2: &LinearRule, p3: &LinearRule) -> Result<bool> {
    let (a, b, c) = (RuleVector::delta(p1), RuleVector::delta(p2), RuleVector::delta(p3));
    let right = c.product(&b.product(&a)?)?;
    let left = c.product(&b)?.product(&a)?;
    Ok(left == right)
}

/// `x†`: creates a vertex.
pub fn creation(kind: GraphKind) -> RuleVector {
    RuleVector::delta(&LinearRule::vertex_creation(kind, 1))
}

/// `x`: deletes a vertex.
pub fn annihilation(kind: GraphKind) -> RuleVector {
    RuleVector::delta(&LinearRule::vertex_deletion(kind, 1))
}

/// `e₊ = ½ δ(E <- •• -> ••)`.
pub fn edge_creator() -> RuleVector {
    RuleVector::delta(&LinearRule::edge_creation()).scaled(&rational(1, 2))
}

/// `e₋ = ½ δ(•• <- •• -> E)`.
pub fn edge_annihilator() -> RuleVector {
    RuleVector::delta(&LinearRule::edge_deletion()).scaled(&rational(1, 2))
}

/// `d = ½ δ(•• <- •• -> ••)`.
pub fn vertex_pair_operator() -> RuleVector {
    RuleVector::delta(&LinearRule::vertex_pair_identity()).scaled(&rational(1, 2))
}

/// Closed-form normal ordering of `x†^r x^s * x†^k x^l` in the basis of
/// discrete rules `x†^a x^b`.
pub fn hw_normal_order(kind: GraphKind, r: usize, s: usize, k: usize, l: usize) -> RuleVector {
    let mut out = RuleVector::zero(kind);
    for n in 0..=s.min(k) {
        let c = factorial(s) * factorial(k) / (factorial(s - n) * factorial(n) * factorial(k - n));
        out.add_rule(
            &LinearRule::hw_word(kind, r + k - n, s + l - n),
            BigRational::from_integer(c),
        );
    }
    out
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}
