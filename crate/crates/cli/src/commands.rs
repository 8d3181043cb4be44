use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use rulealg::algebra::{annihilation, creation, edge_annihilator, edge_creator, vertex_pair_operator};
use rulealg::compose::compose_rules;
use rulealg::io;
use rulealg::stochastic::{edge_moment_closed_form, ssa_simulate, CtmcSpec, SsaConfig, Trajectory, RNG_NAME};
use rulealg::verify::run_suite;
use rulealg::{
    apply_rep, enumerate_rule_overlaps, hw_sequence, GraphKind, LinearRule, Multigraph, Observable, RuleVector,
};

use crate::{ChainArgs, Command, Format, OutArgs, SimArgs};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Input { path: PathBuf, source: rulealg::Error },
    #[error(transparent)]
    Engine(#[from] rulealg::Error),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 2,
            _ => 1,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(command: Command) -> Result<()> {
    match command {
        Command::Compose { rule2, rule1, out } => compose(&rule2, &rule1, &out),
        Command::Product { vec2, vec1, out } => binary(&vec2, &vec1, &out, |a, b| a.product(b)),
        Command::Commutator { vec2, vec1, out } => binary(&vec2, &vec1, &out, |a, b| a.commutator(b)),
        Command::Apply { rules, state, out } => apply(&rules, &state, &out),
        Command::Verify {
            suite,
            seed,
            samples,
            out,
        } => verify(&suite, seed, samples, &out),
        Command::Seq { n, out, format } => seq(n, &out, format),
        Command::Builtin { name, out } => builtin(&name, &out),
        Command::Simulate { chain, sim, out, format } => simulate(&chain, &sim, &out, format),
        Command::Moments { chain, sim, out, format } => moments(&chain, &sim, &out, format),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parsed<T>(path: &Path, f: impl FnOnce(&str) -> rulealg::Result<T>) -> Result<T> {
    let text = read(path)?;
    f(&text).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(out: &OutArgs, mut text: String) -> Result<()> {
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &out.out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(value: &Value) -> String {
    serde_json::to_string_pretty(value).expect("json values serialize")
}

/// A rule vector file, or a single rule taken with coefficient 1.
fn read_vector(path: &Path, kind: Option<GraphKind>) -> Result<RuleVector> {
    parsed(path, |text| {
        let value: Value = serde_json::from_str(text)?;
        if value.is_object() {
            let p = io::rule_from_str(text)?;
            Ok(RuleVector::delta(&p))
        } else {
            io::rule_vector_from_str(text, kind)
        }
    })
}

/// Reads two vectors, taking the kind of an empty one from the other.
fn read_pair(a: &Path, b: &Path) -> Result<(RuleVector, RuleVector)> {
    let first = read_vector(a, None)?;
    let second = read_vector(b, (!first.is_empty()).then(|| first.kind()))?;
    let first = if first.is_empty() {
        RuleVector::zero(second.kind())
    } else {
        first
    };
    Ok((first, second))
}

fn compose(rule2: &Path, rule1: &Path, out: &OutArgs) -> Result<()> {
    let p2 = parsed(rule2, io::rule_from_str)?;
    let p1 = parsed(rule1, io::rule_from_str)?;
    let overlaps = enumerate_rule_overlaps(&p2, &p1)?;
    let mut entries = Vec::with_capacity(overlaps.len());
    for ov in &overlaps {
        let q = compose_rules(&p2, ov, &p1)?;
        entries.push(json!({
            "overlap": io::overlap_to_value(ov, &p2, &p1),
            "composite": io::rule_to_value(&q),
        }));
    }
    emit(out, pretty(&Value::Array(entries)))
}

fn binary(
    a: &Path,
    b: &Path,
    out: &OutArgs,
    op: impl Fn(&RuleVector, &RuleVector) -> rulealg::Result<RuleVector>,
) -> Result<()> {
    let (x, y) = read_pair(a, b)?;
    emit(out, io::rule_vector_to_string(&op(&x, &y)?))
}

fn apply(rules: &Path, state: &Path, out: &OutArgs) -> Result<()> {
    let r = read_vector(rules, None)?;
    let hint = (!r.is_empty()).then(|| r.kind());
    let psi = parsed(state, |text| io::state_or_graph_from_str(text, hint))?;
    let r = if r.is_empty() { RuleVector::zero(psi.kind()) } else { r };
    emit(out, io::state_to_string(&apply_rep(&r, &psi)?))
}

fn verify(suite: &str, seed: u64, samples: usize, out: &OutArgs) -> Result<()> {
    let report = run_suite(suite, seed, samples).map_err(|e| CliError::Invalid(e.to_string()))?;
    for w in &report.warnings {
        eprintln!("rulealg: warning: {w}");
    }
    emit(out, serde_json::to_string_pretty(&report).expect("reports serialize"))?;
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "{} of {} checks in suite {suite} failed",
            report.failures.len(),
            report.checks
        )))
    }
}

fn seq(n: usize, out: &OutArgs, format: Format) -> Result<()> {
    let rows = hw_sequence(n)?;
    let text = match format {
        Format::Csv => {
            let mut s = String::from("n,k,f,g,h,T\n");
            for (k, (p, c)) in rows.iter().enumerate() {
                let _ = writeln!(s, "{n},{k},{},{},{},{c}", p[0], p[1], p[2]);
            }
            s
        }
        Format::Json => pretty(&Value::Array(
            rows.iter()
                .enumerate()
                .map(|(k, (p, c))| json!({"n": n, "k": k, "partition": p, "T": io::format_rational(c)}))
                .collect(),
        )),
    };
    emit(out, text)
}

fn builtin(name: &str, out: &OutArgs) -> Result<()> {
    let u = GraphKind::Undirected;
    let v = match name {
        "x" => annihilation(u),
        "xdag" => creation(u),
        "eplus" => edge_creator(),
        "eminus" => edge_annihilator(),
        "d" => vertex_pair_operator(),
        "unit" => RuleVector::delta(&LinearRule::empty(u)),
        _ => {
            return Err(CliError::Invalid(format!(
                "unknown built-in {name:?}; expected x, xdag, eplus, eminus, d or unit"
            )))
        }
    };
    emit(out, io::rule_vector_to_string(&v))
}

/// The chain together with the edge birth-death parameters when it is one.
struct Chain {
    spec: CtmcSpec,
    birth_death: Option<(usize, usize, f64, f64)>,
}

fn chain(args: &ChainArgs) -> Result<Chain> {
    match (&args.spec, args.nv) {
        (Some(path), _) => Ok(Chain {
            spec: parsed(path, io::ctmc_from_str)?,
            birth_death: None,
        }),
        (None, Some(nv)) => Ok(Chain {
            spec: CtmcSpec::edge_birth_death(nv, args.ne, args.kplus, args.kminus)?,
            birth_death: Some((nv, args.ne, args.kplus, args.kminus)),
        }),
        (None, None) => Err(CliError::Invalid("give a spec file or --nv for the edge birth-death chain".into())),
    }
}

fn sample_times(sim: &SimArgs) -> Result<Vec<f64>> {
    if !(sim.tmax.is_finite() && sim.tmax >= 0.0) {
        return Err(CliError::Invalid(format!("--tmax {} is not a finite non-negative time", sim.tmax)));
    }
    let times = match &sim.times {
        Some(t) => t.clone(),
        None => (0..=10).map(|i| sim.tmax * i as f64 / 10.0).collect(),
    };
    if times.iter().any(|t| !(0.0..=sim.tmax).contains(t)) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(CliError::Invalid("--times must be increasing and within [0, tmax]".into()));
    }
    Ok(times)
}

/// Vertex count and edge count observables for the chain's graph kind.
fn observables(kind: GraphKind) -> (Vec<&'static str>, Vec<Observable>) {
    let edge = match kind {
        GraphKind::Undirected => Observable::edge_count(),
        GraphKind::Directed => Observable::motif(Multigraph::from_edges(kind, 2, &[(0, 1)])),
    };
    (vec!["vertices", "edges"], vec![Observable::vertex_count(kind), edge])
}

fn run_ssa(c: &Chain, sim: &SimArgs, times: &[f64], obs: &[Observable]) -> Result<Vec<Trajectory>> {
    if sim.workers == Some(0) {
        return Err(CliError::Invalid("--workers must be at least 1".into()));
    }
    let config = SsaConfig {
        t_max: sim.tmax,
        trajectories: sim.trajectories,
        seed: sim.seed,
        sample_times: times.to_vec(),
        record_events: false,
        workers: sim.workers,
    };
    Ok(ssa_simulate(&c.spec, &config, obs)?)
}

fn metadata(c: &Chain, sim: &SimArgs, times: &[f64]) -> Value {
    json!({
        "seed": sim.seed,
        "rng": RNG_NAME,
        "trajectories": sim.trajectories,
        "tmax": sim.tmax,
        "times": times,
        "truncation": "none",
        "chain": match c.birth_death {
            Some((nv, ne, kp, km)) => json!({"edge_birth_death": {"nv": nv, "ne": ne, "kplus": kp, "kminus": km}}),
            None => json!({"transitions": c.spec.transitions().len()}),
        },
        "versions": {"rulealg": rulealg::VERSION, "cli": env!("CARGO_PKG_VERSION")},
    })
}

fn sidecar(out: &OutArgs, meta: &Value) -> Result<()> {
    if let Some(path) = &out.out {
        let mut name = path.as_os_str().to_owned();
        name.push(".meta.json");
        let path = PathBuf::from(name);
        fs::write(&path, pretty(meta) + "\n").map_err(|source| CliError::Io { path, source })?;
    }
    Ok(())
}

fn simulate(args: &ChainArgs, sim: &SimArgs, out: &OutArgs, format: Format) -> Result<()> {
    let c = chain(args)?;
    let times = sample_times(sim)?;
    if sim.trajectories == 0 {
        return Err(CliError::Invalid("--trajectories must be at least 1".into()));
    }
    let (names, obs) = observables(c.spec.kind());
    let runs = run_ssa(&c, sim, &times, &obs)?;
    let text = match format {
        Format::Csv => {
            let mut s = format!("traj,time,{}\n", names.join(","));
            for t in &runs {
                for (time, values) in times.iter().zip(&t.samples) {
                    let cols: Vec<String> = values.iter().map(f64::to_string).collect();
                    let _ = writeln!(s, "{},{time},{}", t.index, cols.join(","));
                }
            }
            s
        }
        Format::Json => pretty(&Value::Array(
            runs.iter()
                .map(|t| json!({"traj": t.index, "events": t.event_count, "samples": t.samples}))
                .collect(),
        )),
    };
    emit(out, text)?;
    sidecar(out, &metadata(&c, sim, &times))
}

fn moments(args: &ChainArgs, sim: &SimArgs, out: &OutArgs, format: Format) -> Result<()> {
    let c = chain(args)?;
    let times = sample_times(sim)?;
    let (_, obs) = observables(c.spec.kind());
    let runs = if sim.trajectories > 0 {
        Some(run_ssa(&c, sim, &times, &obs[1..])?)
    } else {
        None
    };
    if c.birth_death.is_none() && runs.is_none() {
        return Err(CliError::Invalid(
            "a spec file has no closed form; request at least one trajectory".into(),
        ));
    }
    let mut header: Vec<&str> = vec!["time"];
    if c.birth_death.is_some() {
        header.extend(["closed_mean", "closed_second_moment", "closed_variance"]);
    }
    if runs.is_some() {
        header.extend(["ssa_mean", "ssa_se", "ssa_second_moment"]);
    }
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(times.len());
    for (i, &t) in times.iter().enumerate() {
        let mut row = vec![t];
        if let Some((nv, ne, kp, km)) = c.birth_death {
            let m1 = edge_moment_closed_form(nv, ne, kp, km, t, 1)?;
            let m2 = edge_moment_closed_form(nv, ne, kp, km, t, 2)?;
            row.extend([m1, m2, m2 - m1 * m1]);
        }
        if let Some(runs) = &runs {
            let n = runs.len() as f64;
            let values: Vec<f64> = runs.iter().map(|r| r.samples[i][0]).collect();
            let mean = values.iter().sum::<f64>() / n;
            let second = values.iter().map(|v| v * v).sum::<f64>() / n;
            let var = if runs.len() > 1 {
                values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            row.extend([mean, (var / n).sqrt(), second]);
        }
        rows.push(row);
    }
    let text = match format {
        Format::Csv => {
            let mut s = header.join(",") + "\n";
            for row in &rows {
                let cols: Vec<String> = row.iter().map(f64::to_string).collect();
                s += &cols.join(",");
                s.push('\n');
            }
            s
        }
        Format::Json => pretty(&Value::Array(
            rows.iter()
                .map(|row| Value::Object(header.iter().zip(row).map(|(h, v)| (h.to_string(), json!(v))).collect()))
                .collect(),
        )),
    };
    emit(out, text)?;
    if runs.is_some() {
        sidecar(out, &metadata(&c, sim, &times))?;
    }
    Ok(())
}
