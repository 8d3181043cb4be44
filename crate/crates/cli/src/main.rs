//! `rulealg`: batch front end for rule composition, the rule algebra, its
//! representation on graph states and stochastic graph rewriting.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "rulealg", version, about = "Rewriting rules, rule algebras and stochastic graph rewriting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List every admissible overlap of RULE2 with RULE1 and its composite.
    Compose {
        rule2: PathBuf,
        rule1: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Rule algebra product VEC2 * VEC1 (VEC1 acts first).
    Product {
        vec2: PathBuf,
        vec1: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Commutator VEC2 * VEC1 - VEC1 * VEC2.
    Commutator {
        vec2: PathBuf,
        vec1: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Apply the representation of a rule vector to a state or graph.
    Apply {
        rules: PathBuf,
        state: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run an invariant suite: associativity, homomorphism, jump-closure, hw
    /// or concurrency.
    Verify {
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Coefficients of n edge creations on three isolated vertices.
    Seq {
        n: usize,
        #[command(flatten)]
        out: OutArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Print a built-in rule vector: x, xdag, eplus, eminus, d, unit.
    Builtin {
        name: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Sample trajectories of a chain; writes CSV and a metadata sidecar.
    Simulate {
        #[command(flatten)]
        chain: ChainArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Edge-count moments: closed form for the edge birth-death chain and
    /// Monte-Carlo estimates when trajectories are requested.
    Moments {
        #[command(flatten)]
        chain: ChainArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Args, Debug)]
struct OutArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A chain from a spec file, or the edge birth-death chain.
#[derive(Args, Debug)]
struct ChainArgs {
    /// CTMC spec file.
    spec: Option<PathBuf>,
    #[arg(long, conflicts_with = "spec")]
    nv: Option<usize>,
    #[arg(long, default_value_t = 0, conflicts_with = "spec")]
    ne: usize,
    #[arg(long, default_value_t = 1.0, conflicts_with = "spec")]
    kplus: f64,
    #[arg(long, default_value_t = 1.0, conflicts_with = "spec")]
    kminus: f64,
}

#[derive(Args, Debug)]
struct SimArgs {
    #[arg(long, default_value_t = 10.0)]
    tmax: f64,
    /// Comma-separated sample times; eleven equidistant points by default.
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1000)]
    trajectories: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; the available parallelism by default.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rulealg: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
