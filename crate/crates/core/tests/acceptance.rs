//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! PASS or FAIL line per criterion; exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};

use rulealg::algebra::{annihilation, creation, edge_annihilator, edge_creator, vertex_pair_operator};
use rulealg::corpus::{all_graphs, named_rules, Corpus};
use rulealg::rep::Partition;
use rulealg::stochastic::{
    edge_distribution_closed_form, edge_moment_closed_form, hamiltonian_action, master_equation_integrate,
    ssa_simulate, CtmcSpec, OdeOptions, SsaConfig, Trajectory, Transition,
};
use rulealg::verify::{associativity, concurrency, homomorphism, win_records};
use rulealg::{apply_rep, hw_sequence, ExactState, FloatState, GraphKind, LinearRule, Multigraph, Observable, RuleVector};

const U: GraphKind = GraphKind::Undirected;
const SEED: u64 = 20_240_601;

type Outcome = Result<String, String>;

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn discrete(n: usize) -> Multigraph {
    Multigraph::discrete(U, n)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(budget: Duration, start: Instant) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < budget, || format!("took {took:.2?}, budget {budget:.0?}"))
}

fn err(e: rulealg::Error) -> String {
    e.to_string()
}

fn same(a: &RuleVector, b: &RuleVector) -> Result<bool, String> {
    Ok(a.minus(b).map_err(err)?.is_zero())
}

fn c1_commutation() -> Outcome {
    let start = Instant::now();
    let c = annihilation(U).commutator(&creation(U)).map_err(err)?;
    let empty = LinearRule::empty(U);
    ensure(c.len() == 1, || format!("[x, x†] has {} terms: {c}", c.len()))?;
    ensure(c.coefficient(&empty) == q(1), || format!("[x, x†] = {c}"))?;
    within(Duration::from_secs(1), start)?;
    Ok(format!("[x, x†] = 1·R_∅ in {:.1?}", start.elapsed()))
}

fn c2_ladder() -> Outcome {
    for n in 0..=10usize {
        let psi = ExactState::basis(&discrete(n));
        let up = apply_rep(&creation(U), &psi).map_err(err)?;
        ensure(up == ExactState::basis(&discrete(n + 1)), || format!("x†|{n}⟩ = {up}"))?;
        let down = apply_rep(&annihilation(U), &psi).map_err(err)?;
        if n == 0 {
            ensure(down.is_zero(), || format!("x|0⟩ = {down}"))?;
        } else {
            ensure(down.len() == 1 && down.coefficient(&discrete(n - 1)) == q(n as i64), || {
                format!("x|{n}⟩ = {down}")
            })?;
        }
    }
    Ok("x†|n⟩ = |n+1⟩ and x|n⟩ = n|n-1⟩ for n ≤ 10".into())
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn c3_normal_order() -> Outcome {
    let start = Instant::now();
    let word = |r, s| RuleVector::delta(&LinearRule::hw_word(U, r, s));
    let mut count = 0;
    for r in 0..=4 {
        for s in 0..=4 {
            for k in 0..=4 {
                for l in 0..=4 {
                    let engine = word(r, s).product(&word(k, l)).map_err(err)?;
                    // Σ_n s!k!/((s-n)! n! (k-n)!) x†^(r+k-n) x^(s+l-n)
                    let mut want = RuleVector::zero(U);
                    for n in 0..=s.min(k) {
                        let c = factorial(s) * factorial(k) / (factorial(s - n) * factorial(n) * factorial(k - n));
                        want.add_rule(&LinearRule::hw_word(U, r + k - n, s + l - n), BigRational::from_integer(c));
                    }
                    ensure(same(&engine, &want)?, || format!("({r},{s},{k},{l}): engine {engine}, formula {want}"))?;
                    count += 1;
                }
            }
        }
    }
    within(Duration::from_secs(30), start)?;
    Ok(format!("{count} products match the coefficient formula in {:.1?}", start.elapsed()))
}

fn c4_associativity() -> Outcome {
    let start = Instant::now();
    let report = associativity(SEED, 120).map_err(err)?;
    ensure(report.passed, || format!("{:?}", report.failures))?;
    within(Duration::from_secs(300), start)?;
    Ok(format!("120 random triples, {} checks, {:.1?}", report.checks, start.elapsed()))
}

fn c5_homomorphism() -> Outcome {
    let report = homomorphism(SEED, 80).map_err(err)?;
    ensure(report.passed, || format!("{:?}", report.failures))?;
    Ok(format!("80 random (R₂, R₁, X), {} checks", report.checks))
}

fn c6_concurrency() -> Outcome {
    let report = concurrency(SEED, 80).map_err(err)?;
    ensure(report.passed, || format!("{:?}", report.failures))?;
    ensure(report.warnings.is_empty(), || format!("{:?}", report.warnings))?;
    Ok(format!("80 two-step derivations, {} checks", report.checks))
}

fn c7_edge_commutators() -> Outcome {
    let (ep, em, d) = (edge_creator(), edge_annihilator(), vertex_pair_operator());
    let c = em.commutator(&ep).map_err(err)?;
    ensure(same(&c, &d)?, || format!("[e-, e+] = {c}"))?;
    let c = ep.commutator(&d).map_err(err)?;
    ensure(c.is_zero(), || format!("[e+, d] = {c}"))?;
    let c = em.commutator(&d).map_err(err)?;
    ensure(c.is_zero(), || format!("[e-, d] = {c}"))?;
    Ok("[e-, e+] = d, [e+, d] = [e-, d] = 0".into())
}

fn c8_sequence() -> Outcome {
    let start = Instant::now();
    let coefficients = |n| -> Result<Vec<BigRational>, String> {
        Ok(hw_sequence(n).map_err(err)?.into_iter().map(|(_, c)| c).collect())
    };
    ensure(coefficients(1)? == vec![q(1)], || "row 1".into())?;
    ensure(coefficients(2)? == vec![q(1), q(2)], || "row 2".into())?;
    ensure(coefficients(3)? == vec![q(1), q(6), q(2)], || "row 3".into())?;
    let three: Vec<Partition> = hw_sequence(3).map_err(err)?.into_iter().map(|(p, _)| p).collect();
    ensure(three == vec![[3, 0, 0], [2, 1, 0], [1, 1, 1]], || format!("row 3 partitions {three:?}"))?;
    for n in 4..=5 {
        let engine = hw_sequence(n).map_err(err)?;
        let oracle = win_records(n);
        ensure(engine == oracle, || format!("row {n}: {engine:?} vs {oracle:?}"))?;
    }
    within(Duration::from_secs(60), start)?;
    Ok("rows 1-3 match the reference values, rows 4-5 match the win-record count".into())
}

fn c9_jump_closure() -> Outcome {
    let mut rules: Vec<LinearRule> = named_rules().into_iter().map(|(_, p)| p).collect();
    rules.extend(Corpus::new(SEED).rules(60));
    let hosts = all_graphs(4, 3);
    let mut checks = 0;
    for p in &rules {
        let jump = RuleVector::delta(p);
        let stay = RuleVector::delta(&p.input_identity());
        let h = jump.minus(&stay).map_err(err)?;
        for x in &hosts {
            let psi = ExactState::basis(x);
            let a = apply_rep(&jump, &psi).map_err(err)?.projection();
            let b = apply_rep(&stay, &psi).map_err(err)?.projection();
            let count = rulealg::count_matches(p, x).map_err(err)?;
            ensure(a == b && a == q(count as i64), || format!("{p} on {x}: {a} vs {b} vs {count}"))?;
            let hp = apply_rep(&h, &psi).map_err(err)?.projection();
            ensure(hp.is_zero(), || format!("⟨|H|{x}⟩ = {hp} for {p}"))?;
            checks += 2;
        }
    }
    // The stochastic Hamiltonian with dyadic rates sums exactly in floating point.
    let transitions: Vec<Transition> = rules
        .iter()
        .take(20)
        .enumerate()
        .map(|(j, p)| Transition {
            rule: p.clone(),
            rate: 0.25 * (j + 1) as f64,
        })
        .collect();
    let spec = CtmcSpec::new(transitions, discrete(0)).map_err(err)?;
    for x in &hosts {
        let hp = hamiltonian_action(&spec, &FloatState::basis(x)).map_err(err)?.projection();
        ensure(hp == 0.0, || format!("⟨|H|{x}⟩ = {hp}"))?;
        checks += 1;
    }
    Ok(format!("{} rules × {} graph classes, {checks} checks", rules.len(), hosts.len()))
}

const TIMES: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

fn c10_master_equation(vertex_counts: &mut Vec<usize>) -> Outcome {
    let start = Instant::now();
    let spec = CtmcSpec::edge_birth_death(2, 0, 1.0, 1.0).map_err(err)?;
    let keep = |g: &Multigraph| g.edge_count() <= 40;
    let sol = master_equation_integrate(&spec, &keep, &TIMES, OdeOptions::default()).map_err(err)?;
    vertex_counts.extend(sol.states().iter().map(Multigraph::vertex_count));
    let means = sol.expectation(|g| g.edge_count() as f64);
    let mut worst_mean = 0.0f64;
    let mut worst_tv = 0.0f64;
    for (i, &t) in TIMES.iter().enumerate() {
        let exact = edge_moment_closed_form(2, 0, 1.0, 1.0, t, 1).map_err(err)?;
        worst_mean = worst_mean.max((means[i] - exact).abs());
        let ode = sol.edge_count_distribution(i);
        let closed = edge_distribution_closed_form(2, 0, 1.0, 1.0, t, 1.0 - 1e-14).map_err(err)?;
        let len = ode.len().max(closed.len());
        let at = |v: &[f64], k: usize| v.get(k).copied().unwrap_or(0.0);
        let tv = 0.5 * (0..len).map(|k| (at(&ode, k) - at(&closed, k)).abs()).sum::<f64>();
        worst_tv = worst_tv.max(tv);
        ensure(sol.leakage[i] < 1e-8, || format!("leakage {} at t = {t}", sol.leakage[i]))?;
    }
    ensure(worst_mean < 1e-6, || format!("mean error {worst_mean:e}"))?;
    ensure(worst_tv < 1e-6, || format!("total variation {worst_tv:e}"))?;
    within(Duration::from_secs(60), start)?;
    Ok(format!(
        "{} states, max |Δmean| = {worst_mean:.1e}, max TV = {worst_tv:.1e}",
        sol.states().len()
    ))
}

struct Sample {
    mean: f64,
    se: f64,
}

fn sample_stats(trajectories: &[Trajectory], i: usize) -> Sample {
    let n = trajectories.len() as f64;
    let values = trajectories.iter().map(|t| t.samples[i][0]);
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Sample {
        mean,
        se: (var / n).sqrt(),
    }
}

fn simulate(n_v: usize, n_e: usize, times: &[f64]) -> Result<Vec<Trajectory>, String> {
    let spec = CtmcSpec::edge_birth_death(n_v, n_e, 1.0, 1.0).map_err(err)?;
    let config = SsaConfig {
        t_max: *times.last().unwrap(),
        trajectories: 10_000,
        seed: SEED,
        sample_times: times.to_vec(),
        record_events: false,
        workers: None,
    };
    ssa_simulate(&spec, &config, &[Observable::edge_count()]).map_err(err)
}

fn c11_ssa(vertex_ranges: &mut Vec<(usize, usize)>) -> Outcome {
    let start = Instant::now();
    let times = [0.25, 0.5, 1.0, 2.0, 4.0, 10.0];
    let runs = simulate(4, 0, &times)?;
    vertex_ranges.extend(runs.iter().map(|t| t.vertex_range));
    let mut worst = 0.0f64;
    for (i, &t) in times.iter().enumerate() {
        let s = sample_stats(&runs, i);
        let exact = 6.0 * (1.0 - (-t).exp());
        let z = (s.mean - exact).abs() / s.se;
        worst = worst.max(z);
        ensure(z < 3.0, || format!("t = {t}: mean {} vs {exact}, {z:.2} SE", s.mean))?;
    }

    // χ² goodness of fit at t = 10 against Poisson(6), tail cells pooled
    // until each expects at least 5 observations.
    let last = times.len() - 1;
    let n = runs.len() as f64;
    let counts: Vec<usize> = runs.iter().map(|t| t.samples[last][0] as usize).collect();
    let poisson = Poisson::new(6.0).map_err(|e| e.to_string())?;
    let max = *counts.iter().max().unwrap();
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    let mut below = 0.0;
    for k in 0..=max {
        let expected = n * poisson.pmf(k as u64);
        let observed = counts.iter().filter(|&&c| c == k).count() as f64;
        acc = (acc.0 + observed, acc.1 + expected);
        below += poisson.pmf(k as u64);
        if acc.1 >= 5.0 && n * (1.0 - below) >= 5.0 {
            cells.push(acc);
            acc = (0.0, 0.0);
        }
    }
    // What remains, including the unobserved tail, is the last cell.
    let tail = (acc.0, acc.1 + n * (1.0 - below));
    match cells.last_mut() {
        Some(c) if tail.1 < 5.0 => *c = (c.0 + tail.0, c.1 + tail.1),
        _ => cells.push(tail),
    }
    let stat: f64 = cells.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let df = (cells.len() - 1) as f64;
    let p = 1.0 - ChiSquared::new(df).map_err(|e| e.to_string())?.cdf(stat);
    ensure(p > 1e-3, || format!("χ² = {stat:.2} on {df} df, p = {p:.2e}"))?;
    within(Duration::from_secs(120), start)?;
    Ok(format!(
        "max deviation {worst:.2} SE; χ² = {stat:.2} on {df} df, p = {p:.3}; {:.1?}",
        start.elapsed()
    ))
}

fn c12_constant_mean(vertex_ranges: &mut Vec<(usize, usize)>) -> Outcome {
    for n_v in 2..=6usize {
        let pairs = n_v * (n_v - 1) / 2;
        for t in [0.0, 0.1, 0.5, 1.0, 3.0, 10.0, 100.0] {
            let m = edge_moment_closed_form(n_v, pairs, 1.7, 1.7, t, 1).map_err(err)?;
            ensure(m == pairs as f64, || format!("N_V = {n_v}, t = {t}: closed form {m}"))?;
        }
    }
    let times = [0.0, 0.5, 1.0, 2.0, 5.0];
    let runs = simulate(4, 6, &times)?;
    vertex_ranges.extend(runs.iter().map(|t| t.vertex_range));
    let mut worst = 0.0f64;
    for (i, &t) in times.iter().enumerate() {
        let s = sample_stats(&runs, i);
        if s.se == 0.0 {
            ensure(s.mean == 6.0, || format!("t = {t}: mean {}", s.mean))?;
            continue;
        }
        let z = (s.mean - 6.0).abs() / s.se;
        worst = worst.max(z);
        ensure(z < 3.0, || format!("t = {t}: mean {} is {z:.2} SE from 6", s.mean))?;
    }
    Ok(format!("closed form exactly C(N_V,2); SSA within {worst:.2} SE of 6"))
}

fn c13_vertex_conservation(ranges: &[(usize, usize)], ode_counts: &[usize]) -> Outcome {
    ensure(!ranges.is_empty() && !ode_counts.is_empty(), || "no runs recorded".into())?;
    ensure(ranges.iter().all(|&r| r == (4, 4)), || "an SSA state left N_V = 4".into())?;
    ensure(ode_counts.iter().all(|&n| n == 2), || "an ODE state left N_V = 2".into())?;
    Ok(format!(
        "{} trajectories and {} ODE states keep their vertex count",
        ranges.len(),
        ode_counts.len()
    ))
}

fn main() -> ExitCode {
    let mut ode_counts = Vec::new();
    let mut ranges = Vec::new();
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut run = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let outcome = f();
        match &outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => println!("FAIL {name}: {detail}"),
        }
        results.push((name, outcome));
    };
    run("1 hw commutation", &mut c1_commutation);
    run("2 hw ladder", &mut c2_ladder);
    run("3 normal ordering", &mut c3_normal_order);
    run("4 associativity", &mut c4_associativity);
    run("5 representation homomorphism", &mut c5_homomorphism);
    run("6 concurrency round trip", &mut c6_concurrency);
    run("7 edge commutators", &mut c7_edge_commutators);
    run("8 sequence", &mut c8_sequence);
    run("9 jump closure", &mut c9_jump_closure);
    run("10 master equation", &mut || c10_master_equation(&mut ode_counts));
    run("11 ssa vs closed form", &mut || c11_ssa(&mut ranges));
    run("12 constant mean", &mut || c12_constant_mean(&mut ranges));
    run("13 vertex conservation", &mut || c13_vertex_conservation(&ranges, &ode_counts));
    let failed = results.iter().filter(|(_, o)| o.is_err()).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
