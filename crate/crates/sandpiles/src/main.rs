//! Command-line front end: thin adapters over the library modules.
//!
//! Exit codes: 0 = the question was answered (whatever the verdict),
//! 2 = malformed input, 3 = a size guard or resource limit was hit.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sandpiles::dynamics::Configuration;
use sandpiles::enumeration::{
    enumerate_dr, enumerate_minimal, enumerate_psr, enumerate_sr, table_counts, Model,
};
use sandpiles::error::Error;
use sandpiles::graph::Multigraph;
use sandpiles::markov::{empirical_recurrent_set, run_chain, ChainModel, ChainSpec};
use sandpiles::polytope::{decompose, decompose_level_restricted};
use sandpiles::recurrence::{dhar_burning, is_dr, is_sr_flow, stochastic_burning};

#[derive(Parser)]
#[command(name = "sandpiles", version, about = "Sandpile models on multigraphs with a sink")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Plain,
}

#[derive(Args)]
struct GraphSource {
    /// Path to a graph JSON file: {"n": int, "edges": [[u, v, mult], ...]}
    #[arg(long, conflicts_with = "complete")]
    graph: Option<String>,
    /// Use the complete graph on n non-sink vertices
    #[arg(long)]
    complete: Option<usize>,
    /// Multiplicity of every sink edge (with --complete)
    #[arg(long, requires = "complete")]
    sink_mult: Option<u32>,
}

impl GraphSource {
    fn load(&self) -> Result<Multigraph, CliError> {
        match (&self.graph, self.complete) {
            (Some(path), None) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::user(format!("cannot read {path}: {e}")))?;
                Ok(Multigraph::from_json(&text)?)
            }
            (None, Some(n)) => match self.sink_mult {
                Some(l) => Ok(Multigraph::complete_multi_sink(n, l)?),
                None => Ok(Multigraph::complete(n)?),
            },
            _ => Err(CliError::user(
                "exactly one graph source required: --graph FILE or --complete N".into(),
            )),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide recurrence of a configuration under a model
    Check {
        #[command(flatten)]
        source: GraphSource,
        /// Configuration as comma-separated grain counts, e.g. 1,1,1
        #[arg(long)]
        config: String,
        /// det, sto, or partial:K
        #[arg(long)]
        model: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Run a burning algorithm on a configuration
    Burn {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long)]
        config: String,
        /// dhar (any graph) or stochastic (complete graphs only)
        #[arg(long)]
        algorithm: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Enumerate a recurrent set on a complete graph
    Enumerate {
        #[arg(long)]
        complete: usize,
        /// dr, sr, psr:K, minimal-dr, or minimal-sr
        #[arg(long)]
        set: String,
        /// List the states, not just the count
        #[arg(long)]
        states: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Decompose an SR state of K_n into a convex combination of DR states
    Decompose {
        #[arg(long)]
        complete: usize,
        #[arg(long)]
        config: String,
        /// Also check that all components share the target's level
        #[arg(long)]
        level_restricted: bool,
    },
    /// Print the DR / PSR^1 / SR count table
    Table {
        #[arg(long)]
        nmax: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run a seeded sandpile Markov chain
    Simulate {
        #[command(flatten)]
        source: GraphSource,
        /// det, sto, or partial:K
        #[arg(long)]
        model: String,
        /// Edge-crossing probability (decimal or num/den) for sto/partial
        #[arg(long)]
        p: Option<String>,
        /// "uniform" or comma-separated probabilities over vertices 1..n
        #[arg(long, default_value = "uniform")]
        mu: String,
        #[arg(long)]
        steps: u64,
        /// Defaults to 10% of the step count
        #[arg(long)]
        burn_in: Option<u64>,
        #[arg(long)]
        seed: u64,
    },
}

struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    fn user(message: String) -> Self {
        CliError { message, code: 2 }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::GuardExceeded { .. } | Error::StateSpaceExceeded { .. } => 3,
            _ => 2,
        };
        CliError {
            message: e.to_string(),
            code,
        }
    }
}

fn parse_config(text: &str) -> Result<Configuration, CliError> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<u32>()
                .map_err(|_| CliError::user(format!("bad grain count {tok:?} in --config")))
        })
        .collect()
}

enum ModelArg {
    Det,
    Sto,
    Partial(usize),
}

fn parse_model(text: &str) -> Result<ModelArg, CliError> {
    match text {
        "det" => Ok(ModelArg::Det),
        "sto" => Ok(ModelArg::Sto),
        _ => match text.strip_prefix("partial:") {
            Some(k) => k
                .parse()
                .map(ModelArg::Partial)
                .map_err(|_| CliError::user(format!("bad stochastic prefix in {text:?}"))),
            None => Err(CliError::user(format!(
                "unknown model {text:?}: expected det, sto, or partial:K"
            ))),
        },
    }
}

fn parse_probability(text: &str) -> Result<f64, CliError> {
    let value = match text.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num
                .trim()
                .parse()
                .map_err(|_| CliError::user(format!("bad probability {text:?}")))?;
            let den: f64 = den
                .trim()
                .parse()
                .map_err(|_| CliError::user(format!("bad probability {text:?}")))?;
            num / den
        }
        None => text
            .trim()
            .parse()
            .map_err(|_| CliError::user(format!("bad probability {text:?}")))?,
    };
    if !(value > 0.0 && value < 1.0) {
        return Err(CliError::user(format!(
            "probability {text:?} must lie strictly between 0 and 1"
        )));
    }
    Ok(value)
}

fn run_check(
    source: &GraphSource,
    config: &str,
    model: &str,
    format: Format,
) -> Result<(), CliError> {
    let g = source.load()?;
    let c = parse_config(config)?;
    let (label, verdict) = match parse_model(model)? {
        ModelArg::Det => ("det".to_string(), is_dr(&g, &c)?),
        ModelArg::Sto => ("sto".to_string(), is_sr_flow(&g, &c)?),
        ModelArg::Partial(k) => {
            if !g.is_complete_simple() {
                return Err(CliError::user(
                    "partial-model checking is only available for --complete graphs".into(),
                ));
            }
            let summary = enumerate_psr(g.n(), k)?;
            let recurrent = summary.states.as_ref().unwrap().binary_search(&c).is_ok();
            (
                format!("partial:{k}"),
                sandpiles::recurrence::RecurrenceVerdict {
                    recurrent,
                    witness: None,
                },
            )
        }
    };
    match format {
        Format::Json => println!(
            "{}",
            serde_json::json!({
                "model": label,
                "recurrent": verdict.recurrent,
                "witness": verdict.witness,
            })
        ),
        Format::Csv => println!("{label},{}", verdict.recurrent),
        Format::Plain => println!(
            "{} under {label}",
            if verdict.recurrent { "recurrent" } else { "not recurrent" }
        ),
    }
    Ok(())
}

fn run_burn(
    source: &GraphSource,
    config: &str,
    algorithm: &str,
    format: Format,
) -> Result<(), CliError> {
    let g = source.load()?;
    let c = parse_config(config)?;
    let (unburned, report) = match algorithm {
        "dhar" => {
            let report = dhar_burning(&g, &c)?;
            (report.remain.len(), report)
        }
        "stochastic" => {
            if !g.is_complete_simple() {
                return Err(CliError::user(
                    "the stochastic burning algorithm applies only to complete graphs \
                     (use --complete N, or --algorithm dhar for general graphs)"
                        .into(),
                ));
            }
            let (k, report) = stochastic_burning(&c)?;
            (k, report)
        }
        other => {
            return Err(CliError::user(format!(
                "unknown algorithm {other:?}: expected dhar or stochastic"
            )))
        }
    };
    match format {
        Format::Json => println!(
            "{}",
            serde_json::json!({
                "algorithm": algorithm,
                "unburned": unburned,
                "burned_order": report.burned_order,
                "remain": report.remain,
            })
        ),
        Format::Csv => println!("{algorithm},{unburned}"),
        Format::Plain => println!(
            "unburned: {unburned}; order: {:?}; remain: {:?}",
            report.burned_order, report.remain
        ),
    }
    Ok(())
}

fn run_enumerate(n: usize, set: &str, states: bool, format: Format) -> Result<(), CliError> {
    let mut summary = match set {
        "dr" => enumerate_dr(n)?,
        "sr" => enumerate_sr(n)?,
        "minimal-dr" => enumerate_minimal(n, Model::Dr)?,
        "minimal-sr" => enumerate_minimal(n, Model::Sr)?,
        _ => match set.strip_prefix("psr:") {
            Some(k) => {
                let k: usize = k
                    .parse()
                    .map_err(|_| CliError::user(format!("bad stochastic prefix in {set:?}")))?;
                enumerate_psr(n, k)?
            }
            None => {
                return Err(CliError::user(format!(
                    "unknown set {set:?}: expected dr, sr, psr:K, minimal-dr, or minimal-sr"
                )))
            }
        },
    };
    if !states {
        summary.states = None;
    }
    match format {
        Format::Json => println!("{}", serde_json::to_string(&summary).unwrap()),
        Format::Csv => println!("{},{},{}", summary.n, summary.model, summary.count),
        Format::Plain => {
            println!("{}", summary.count);
            if let Some(states) = &summary.states {
                for state in states {
                    let row: Vec<String> = state.iter().map(|x| x.to_string()).collect();
                    println!("{}", row.join(","));
                }
            }
        }
    }
    Ok(())
}

fn run_decompose(n: usize, config: &str, level_restricted: bool) -> Result<(), CliError> {
    let c = parse_config(config)?;
    if c.len() != n {
        return Err(CliError::user(format!(
            "--config has {} entries, --complete {n} expects {n}",
            c.len()
        )));
    }
    let result = if level_restricted {
        decompose_level_restricted(&c)
    } else {
        decompose(&c)
    };
    match result {
        Ok(cert) => {
            println!("{}", cert.to_json());
            Ok(())
        }
        // a definitive negative answer, not a failure
        Err(Error::NotSr { unburned, remain }) => {
            println!(
                "{}",
                serde_json::json!({
                    "decomposable": false,
                    "unburned": unburned,
                    "remain": remain,
                })
            );
            Ok(())
        }
        Err(e) => Err(e.into()),
    }
}

fn run_table(nmax: usize, format: Format) -> Result<(), CliError> {
    let rows = table_counts(nmax)?;
    match format {
        Format::Json => {
            for (n, dr, psr1, sr) in rows {
                println!(
                    "{}",
                    serde_json::json!({"n": n, "dr": dr, "psr1": psr1, "sr": sr})
                );
            }
        }
        Format::Csv | Format::Plain => {
            println!("n,dr,psr1,sr");
            for (n, dr, psr1, sr) in rows {
                println!("{n},{dr},{psr1},{sr}");
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_simulate(
    source: &GraphSource,
    model: &str,
    p: Option<&str>,
    mu: &str,
    steps: u64,
    burn_in: Option<u64>,
    seed: u64,
) -> Result<(), CliError> {
    let g = source.load()?;
    let n = g.n();
    let chain_model = match parse_model(model)? {
        ModelArg::Det => {
            if p.is_some() {
                return Err(CliError::user("--p is meaningless for --model det".into()));
            }
            ChainModel::Det
        }
        ModelArg::Sto => {
            let p = parse_probability(p.ok_or_else(|| {
                CliError::user("--model sto requires --p".into())
            })?)?;
            ChainModel::Sto { p }
        }
        ModelArg::Partial(k) => {
            let p = parse_probability(p.ok_or_else(|| {
                CliError::user("--model partial:K requires --p".into())
            })?)?;
            ChainModel::Partial { k, p }
        }
    };
    let mu_vec = if mu == "uniform" {
        vec![1.0 / n as f64; n]
    } else {
        mu.split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::user(format!("bad probability {tok:?} in --mu")))
            })
            .collect::<Result<Vec<f64>, CliError>>()?
    };
    let mut spec = ChainSpec::new(g, chain_model.clone(), steps, seed);
    spec.mu = mu_vec;
    if let Some(b) = burn_in {
        spec.burn_in = b;
    }
    let stats = run_chain(&spec)?;
    let visited: Vec<serde_json::Value> = stats
        .visited
        .iter()
        .map(|(state, count)| serde_json::json!({"state": state, "count": count}))
        .collect();
    println!(
        "{}",
        serde_json::json!({
            "spec": {
                "model": chain_model,
                "mu": spec.mu,
                "steps": spec.steps,
                "burn_in": spec.burn_in,
                "seed": spec.seed,
                "generator": stats.generator,
            },
            "visited": visited,
            "distinct": empirical_recurrent_set(&stats).len(),
            "total_topplings": stats.total_topplings,
            "final_state": stats.final_state,
        })
    );
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Check {
            source,
            config,
            model,
            format,
        } => run_check(&source, &config, &model, format),
        Command::Burn {
            source,
            config,
            algorithm,
            format,
        } => run_burn(&source, &config, &algorithm, format),
        Command::Enumerate {
            complete,
            set,
            states,
            format,
        } => run_enumerate(complete, &set, states, format),
        Command::Decompose {
            complete,
            config,
            level_restricted,
        } => run_decompose(complete, &config, level_restricted),
        Command::Table { nmax, format } => run_table(nmax, format),
        Command::Simulate {
            source,
            model,
            p,
            mu,
            steps,
            burn_in,
            seed,
        } => run_simulate(&source, &model, p.as_deref(), &mu, steps, burn_in, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
