//! Named invariant suites over the seeded corpus. Each suite returns a
//! serializable report; a suite passes when every exact check holds.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::algebra::{
    annihilation, check_associativity, creation, edge_annihilator, edge_creator, hw_normal_order, rational,
    vertex_pair_operator, RuleVector,
};
use crate::canon::is_isomorphic;
use crate::compose::{analyze, compose_rules, enumerate_rule_overlaps, synthesize};
use crate::corpus::{named_rules, Corpus};
use crate::dpo::{derive, find_matches};
use crate::error::{Error, Result};
use crate::graph::{GraphKind, Multigraph};
use crate::rep::{apply_rep, hw_sequence, ExactState, Partition};
use crate::rule::LinearRule;

pub const SUITES: [&str; 5] = ["associativity", "homomorphism", "jump-closure", "hw", "concurrency"];

const MAX_FAILURES: usize = 20;

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub samples: usize,
    pub checks: usize,
    pub passed: bool,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

impl Report {
    fn new(suite: &str, seed: u64, samples: usize) -> Self {
        Report {
            suite: suite.to_string(),
            seed,
            samples,
            checks: 0,
            passed: true,
            failures: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.passed = false;
            if self.failures.len() < MAX_FAILURES {
                self.failures.push(what());
            }
        }
    }

    fn finish(mut self) -> Self {
        if self.checks == 0 {
            self.warnings.push("no checks were run; the suite passes vacuously".into());
        }
        self
    }
}

/// Runs the named suite with `samples` random cases drawn from `seed`.
pub fn run_suite(name: &str, seed: u64, samples: usize) -> Result<Report> {
    match name {
        "associativity" => associativity(seed, samples),
        "homomorphism" => homomorphism(seed, samples),
        "jump-closure" => jump_closure(seed, samples),
        "hw" => hw(samples),
        "concurrency" => concurrency(seed, samples),
        _ => Err(Error::Precondition(format!(
            "unknown suite {name:?}; expected one of {}",
            SUITES.join(", ")
        ))),
    }
}

fn rng(seed: u64, salt: u64) -> ChaCha20Rng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(salt);
    r
}

fn pick<'a, T>(rng: &mut ChaCha20Rng, items: &'a [T]) -> &'a T {
    &items[rng.random_range(0..items.len())]
}

/// Random rules with the named ones mixed in.
fn rule_pool(seed: u64, n: usize) -> Vec<LinearRule> {
    let mut pool: Vec<LinearRule> = named_rules().into_iter().map(|(_, p)| p).collect();
    pool.extend(Corpus::new(seed).rules(n));
    pool
}

fn host_pool(seed: u64, n: usize) -> Vec<Multigraph> {
    let mut pool = vec![
        Multigraph::empty(GraphKind::Undirected),
        Multigraph::discrete(GraphKind::Undirected, 2),
        Multigraph::from_edges(GraphKind::Undirected, 3, &[(0, 1), (1, 2), (0, 2)]),
    ];
    pool.extend(Corpus::new(seed ^ 0x9e37_79b9_7f4a_7c15).hosts(n));
    pool
}

fn vector_eq(a: &RuleVector, b: &RuleVector) -> Result<bool> {
    Ok(a.minus(b)?.is_zero())
}

fn state_eq(a: &ExactState, b: &ExactState) -> Result<bool> {
    Ok(a.plus(&b.scaled(&-BigRational::one()))?.is_zero())
}

/// Associativity of the product on random triples, plus unitality.
pub fn associativity(seed: u64, samples: usize) -> Result<Report> {
    let mut report = Report::new("associativity", seed, samples);
    let pool = rule_pool(seed, samples.max(1) * 3);
    let mut r = rng(seed, 1);
    let unit = RuleVector::unit(GraphKind::Undirected);
    for s in 0..samples {
        let (p1, p2, p3) = (pick(&mut r, &pool), pick(&mut r, &pool), pick(&mut r, &pool));
        let ok = check_associativity(p1, p2, p3)?;
        report.check(ok, || format!("sample {s}: ({p3}) * (({p2}) * ({p1})) differs from (({p3}) * ({p2})) * ({p1})"));
        let d = RuleVector::delta(p1);
        let left = vector_eq(&unit.product(&d)?, &d)?;
        let right = vector_eq(&d.product(&unit)?, &d)?;
        report.check(left && right, || format!("sample {s}: the empty rule is not a unit for {p1}"));
    }
    Ok(report.finish())
}

/// `ρ(R₂ * R₁)|X⟩ = ρ(R₂)ρ(R₁)|X⟩` on random pairs and hosts.
pub fn homomorphism(seed: u64, samples: usize) -> Result<Report> {
    let mut report = Report::new("homomorphism", seed, samples);
    let pool = rule_pool(seed, samples.max(1) * 2);
    let hosts = host_pool(seed, samples.max(1));
    let mut r = rng(seed, 2);
    for s in 0..samples {
        let r2 = random_vector(&mut r, &pool);
        let r1 = random_vector(&mut r, &pool);
        let x = pick(&mut r, &hosts);
        let psi = ExactState::basis(x);
        let lhs = apply_rep(&r2.product(&r1)?, &psi)?;
        let rhs = apply_rep(&r2, &apply_rep(&r1, &psi)?)?;
        report.check(state_eq(&lhs, &rhs)?, || format!("sample {s}: on |{x}⟩, ρ(R₂*R₁) = {lhs} but ρ(R₂)ρ(R₁) = {rhs}"));
    }
    Ok(report.finish())
}

/// One or two basis rules with small nonzero rational coefficients.
fn random_vector(r: &mut ChaCha20Rng, pool: &[LinearRule]) -> RuleVector {
    let mut v = RuleVector::zero(GraphKind::Undirected);
    for _ in 0..r.random_range(1..=2) {
        let n = r.random_range(1..=3) * if r.random_bool(0.5) { 1 } else { -1 };
        v.add_rule(pick(r, pool), rational(n, r.random_range(1..=2)));
    }
    if v.is_zero() {
        v.add_rule(&pool[0], BigRational::one());
    }
    v
}

/// `⟨|ρ(δ(p)) = ⟨|ρ(δ(p'))` with `p' = (I <- K -> I)` on every rule and host
/// of the corpus, and `⟨|H = 0` for Hamiltonians built from it.
pub fn jump_closure(seed: u64, samples: usize) -> Result<Report> {
    let mut report = Report::new("jump-closure", seed, samples);
    let pool = rule_pool(seed, samples);
    let hosts = host_pool(seed, samples);
    if samples == 0 {
        return Ok(report.finish());
    }
    for p in &pool {
        let rate = BigRational::one();
        let h = RuleVector::delta(p).minus(&RuleVector::delta(&p.input_identity()))?.scaled(&rate);
        for x in &hosts {
            let psi = ExactState::basis(x);
            let jumps = apply_rep(&RuleVector::delta(p), &psi)?.projection();
            let stays = apply_rep(&RuleVector::delta(&p.input_identity()), &psi)?.projection();
            report.check(jumps == stays, || format!("⟨|ρ({p})|{x}⟩ = {jumps} but ⟨|O_I|{x}⟩ = {stays}"));
            let hp = apply_rep(&h, &psi)?.projection();
            report.check(hp.is_zero(), || format!("⟨|H|{x}⟩ = {hp} for H built from {p}"));
        }
    }
    // A Hamiltonian mixing several rules with rational rates.
    let mut r = rng(seed, 3);
    for s in 0..samples {
        let mut h = RuleVector::zero(GraphKind::Undirected);
        for _ in 0..3 {
            let p = pick(&mut r, &pool);
            let rate = rational(r.random_range(1..=9), r.random_range(1..=4));
            h = h.plus(&RuleVector::delta(p).minus(&RuleVector::delta(&p.input_identity()))?.scaled(&rate))?;
        }
        let x = pick(&mut r, &hosts);
        let hp = apply_rep(&h, &ExactState::basis(x))?.projection();
        report.check(hp.is_zero(), || format!("sample {s}: ⟨|H|{x}⟩ = {hp}"));
    }
    Ok(report.finish())
}

/// Heisenberg-Weyl and edge-algebra identities. `bound` caps the word
/// lengths of the normal-ordering check, which never exceed 3.
pub fn hw(bound: usize) -> Result<Report> {
    let u = GraphKind::Undirected;
    let mut report = Report::new("hw", 0, bound);
    let (a, ad) = (annihilation(u), creation(u));
    let unit = RuleVector::unit(u);

    report.check(vector_eq(&a.commutator(&ad)?, &unit)?, || "[x, x†] is not the unit".into());
    for n in 0..=10 {
        let state = ExactState::basis(&Multigraph::discrete(u, n));
        let up = apply_rep(&ad, &state)?;
        let want = ExactState::basis(&Multigraph::discrete(u, n + 1));
        report.check(state_eq(&up, &want)?, || format!("x†|{n}⟩ = {up}"));
        let down = apply_rep(&a, &state)?;
        let want = match n {
            0 => ExactState::zero(u),
            _ => ExactState::basis(&Multigraph::discrete(u, n - 1)).scaled(&rational(n as i64, 1)),
        };
        report.check(state_eq(&down, &want)?, || format!("x|{n}⟩ = {down}"));
    }
    for m in 1..=bound.min(4) {
        let power = ad.power(m)?;
        let union = RuleVector::delta(&LinearRule::vertex_creation(u, m));
        report.check(vector_eq(&power, &union)?, || format!("x†^{m} is not the {m}-fold disjoint union"));
        let power = a.power(m)?;
        let union = RuleVector::delta(&LinearRule::vertex_deletion(u, m));
        report.check(vector_eq(&power, &union)?, || format!("x^{m} is not the {m}-fold disjoint union"));
    }
    let words = bound.min(3);
    for r in 0..=words {
        for s in 0..=words {
            for k in 0..=words {
                for l in 0..=words {
                    let engine = RuleVector::delta(&LinearRule::hw_word(u, r, s))
                        .product(&RuleVector::delta(&LinearRule::hw_word(u, k, l)))?;
                    let formula = hw_normal_order(u, r, s, k, l);
                    report.check(vector_eq(&engine, &formula)?, || {
                        format!("normal order ({r},{s},{k},{l}): engine {engine}, formula {formula}")
                    });
                }
            }
        }
    }

    let (ep, em, d) = (edge_creator(), edge_annihilator(), vertex_pair_operator());
    report.check(vector_eq(&em.commutator(&ep)?, &d)?, || "[e-, e+] is not d".into());
    report.check(ep.commutator(&d)?.is_zero(), || "[e+, d] is not 0".into());
    report.check(em.commutator(&d)?.is_zero(), || "[e-, d] is not 0".into());

    for n in 0..=bound.min(5) {
        let engine = hw_sequence(n)?;
        let oracle = win_records(n);
        report.check(engine == oracle, || format!("sequence row {n}: engine {engine:?}, oracle {oracle:?}"));
    }
    Ok(report.finish())
}

/// Counts ordered sequences of `n` games among three players by sorted
/// win triple, divided by 3 for `n >= 1`.
pub fn win_records(n: usize) -> Vec<(Partition, BigRational)> {
    let mut buckets: BTreeMap<Partition, usize> = BTreeMap::new();
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut wins = [0usize; 3];
        let mut c = code;
        for _ in 0..n {
            wins[c % 3] += 1;
            c /= 3;
        }
        wins.sort_unstable_by(|a, b| b.cmp(a));
        *buckets.entry(wins).or_default() += 1;
    }
    let norm = if n == 0 { 1 } else { 3 };
    buckets
        .into_iter()
        .rev()
        .map(|(p, c)| (p, rational(c as i64, norm)))
        .collect()
}

/// Synthesis and analysis are mutually inverse and the composite derivation
/// reproduces the two-step one.
pub fn concurrency(seed: u64, samples: usize) -> Result<Report> {
    let mut report = Report::new("concurrency", seed, samples);
    let pool = rule_pool(seed, samples.max(1) * 2);
    let hosts = host_pool(seed, samples.max(1));
    let mut r = rng(seed, 4);
    let mut done = 0;
    let mut attempts = 0;
    while done < samples && attempts < samples * 50 {
        attempts += 1;
        let (p1, p2, x0) = (pick(&mut r, &pool), pick(&mut r, &pool), pick(&mut r, &hosts));
        let m1s = find_matches(p1, x0)?;
        if m1s.is_empty() {
            continue;
        }
        let m1 = pick(&mut r, &m1s);
        let x1 = derive(p1, m1, x0)?;
        let m2s = find_matches(p2, &x1)?;
        if m2s.is_empty() {
            continue;
        }
        let m2 = pick(&mut r, &m2s);
        done += 1;
        let x2 = derive(p2, m2, &x1)?;

        let syn = synthesize(p2, m2, p1, m1, x0)?;
        let y = derive(&syn.composite, &syn.matching, x0)?;
        report.check(is_isomorphic(&y, &x2)?, || format!("sample {done}: composite gives {y}, two steps give {x2}"));
        let (a1, a2) = analyze(p2, &syn.overlap, p1, &syn.matching, x0)?;
        report.check(&a1 == m1 && &a2 == m2, || format!("sample {done}: analysis does not recover the matches"));

        // The other direction: start from an overlap and a composite match.
        let overlaps = enumerate_rule_overlaps(p2, p1)?;
        let ov = pick(&mut r, &overlaps);
        let q = compose_rules(p2, ov, p1)?;
        let ns = find_matches(&q, x0)?;
        if ns.is_empty() {
            continue;
        }
        let n = pick(&mut r, &ns);
        let (b1, b2) = analyze(p2, ov, p1, n, x0)?;
        let back = synthesize(p2, &b2, p1, &b1, x0)?;
        report.check(&back.overlap == ov && &back.matching == n, || {
            format!("sample {done}: synthesis after analysis changes the overlap or match")
        });
        let seq = derive(p2, &b2, &derive(p1, &b1, x0)?)?;
        let one = derive(&q, n, x0)?;
        report.check(is_isomorphic(&seq, &one)?, || format!("sample {done}: analyzed steps give {seq}, composite {one}"));
    }
    if done < samples {
        report
            .warnings
            .push(format!("only {done} of {samples} samples had matches for both steps"));
    }
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn win_record_rows() {
        let rows = win_records(3);
        assert_eq!(
            rows,
            vec![([3, 0, 0], rational(1, 1)), ([2, 1, 0], rational(6, 1)), ([1, 1, 1], rational(2, 1))]
        );
        assert_eq!(win_records(0), vec![([0, 0, 0], rational(1, 1))]);
    }

    #[test]
    fn suites_pass_on_small_samples() {
        for name in SUITES {
            let report = run_suite(name, 5, 3).unwrap();
            assert!(report.passed, "{report:?}");
            assert!(report.checks > 0);
        }
    }

    #[test]
    fn zero_samples_is_vacuous() {
        let report = run_suite("associativity", 1, 0).unwrap();
        assert!(report.passed && report.checks == 0 && !report.warnings.is_empty());
        assert!(run_suite("nope", 0, 1).is_err());
    }
}
