use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{CommandFactory, Parser, Subcommand};
use myopic_ring::library::Builtin;
use myopic_ring::*;
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "myopic-ring", version, about = "Simulate and verify ring exploration by myopic robots")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one seeded fair execution and write its trace
    Simulate {
        /// Built-in protocol name or path to a protocol file
        #[arg(long)]
        protocol: String,
        #[arg(long)]
        n: usize,
        /// `single-block`, `single-phi-group:<i>` or a multiplicity list
        #[arg(long)]
        init: String,
        #[arg(long)]
        model: Option<Model>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        max_steps: usize,
        /// Output path for the JSONL trace
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Robot count for `single-block` when the protocol does not fix it
        #[arg(long)]
        k: Option<usize>,
    },
    /// Check exploration over every scheduler choice
    Verify {
        #[arg(long)]
        protocol: String,
        #[arg(long, conflicts_with = "n_range", required_unless_present = "n_range")]
        n: Option<usize>,
        /// Inclusive range such as `7..12`
        #[arg(long)]
        n_range: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        /// `single-block`, `single-phi-group` or a multiplicity list
        #[arg(long)]
        init_class: Option<String>,
        #[arg(long)]
        model: Option<Model>,
        #[arg(long)]
        budget: Option<usize>,
        /// One JSON object per instance
        #[arg(long)]
        json: bool,
        /// Directory for counterexample traces
        #[arg(long)]
        trace_dir: Option<PathBuf>,
    },
    /// Search for a radius-1 protocol or prove none exists
    Synthesize {
        #[arg(long, default_value_t = 1)]
        phi: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        model: Model,
        #[arg(long, default_value = "single-block")]
        init_class: String,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Show views, block structure and named patterns of a configuration
    Inspect {
        #[arg(long)]
        config: Configuration,
        #[arg(long, default_value_t = 1)]
        phi: usize,
    },
    /// List the built-in protocols
    ListProtocols,
}

/// Exit 2 with a usage message.
fn usage(msg: impl std::fmt::Display) -> ExitCode {
    let mut cmd = Cli::command();
    cmd.error(clap::error::ErrorKind::ValueValidation, msg).print().ok();
    ExitCode::from(2)
}

fn failure(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

type Run<T> = std::result::Result<T, ExitCode>;

fn load_protocol(name_or_path: &str) -> Run<(Protocol, Option<&'static Builtin>)> {
    if let Ok(info) = builtin_info(name_or_path) {
        return Ok((info.protocol(), Some(info)));
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        return Err(usage(format!("`{name_or_path}` is neither a built-in protocol nor a file")));
    }
    let text = std::fs::read_to_string(path).map_err(|e| failure(format!("{}: {e}", path.display())))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let p = parse_protocol_named(&name, &text).map_err(|e| failure(format!("{}: {e}", path.display())))?;
    Ok((p, None))
}

fn pick_model(given: Option<Model>, info: Option<&Builtin>) -> Run<Model> {
    given.or(info.map(|b| b.model)).ok_or_else(|| usage("--model is required for protocol files"))
}

fn pick_k(given: Option<usize>, info: Option<&Builtin>) -> Run<usize> {
    given.or(info.and_then(|b| b.k)).ok_or_else(|| usage("--k is required for this protocol"))
}

fn parse_range(s: &str) -> Run<Vec<usize>> {
    let bad = || usage(format!("bad --n-range `{s}`, expected e.g. 7..12"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a..=b).collect())
}

enum Starts {
    Class(InitKind),
    Explicit(Configuration),
}

fn parse_class(s: &str) -> Run<Starts> {
    match s {
        "single-block" => Ok(Starts::Class(InitKind::SingleOneBlock)),
        "single-phi-group" => Ok(Starts::Class(InitKind::SinglePhiGroup)),
        _ => s.parse().map(Starts::Explicit).map_err(|e| usage(format!("bad init class `{s}`: {e}"))),
    }
}

#[allow(clippy::too_many_arguments)]
fn simulate_cmd(
    protocol: &str,
    n: usize,
    init: &str,
    model: Option<Model>,
    seed: u64,
    max_steps: usize,
    trace: Option<&Path>,
    k: Option<usize>,
) -> Run<ExitCode> {
    let (p, info) = load_protocol(protocol)?;
    let model = pick_model(model, info)?;
    let c = if init == "single-block" {
        Configuration::block(n, pick_k(k, info)?).map_err(usage)?
    } else if let Some(i) = init.strip_prefix("single-phi-group:") {
        let i: usize = i.parse().map_err(|_| usage(format!("bad index in `{init}`")))?;
        let cls = InitClass::single_group(n, pick_k(k, info)?, p.phi);
        let all = initial_configs(&cls).map_err(usage)?;
        all.get(i).cloned().ok_or_else(|| usage(format!("index {i} out of range, {} starts", all.len())))?
    } else {
        let c: Configuration = init.parse().map_err(|e| usage(format!("bad --init `{init}`: {e}")))?;
        if c.n() != n {
            return Err(usage(format!("--init has {} nodes, --n is {n}", c.n())));
        }
        c
    };
    let t = simulate(&p, &c, model, seed, max_steps).map_err(failure)?;
    if let Some(path) = trace {
        std::fs::write(path, t.to_jsonl()).map_err(|e| failure(format!("{}: {e}", path.display())))?;
    }
    let outcome = match t.outcome {
        Outcome::Terminated => "Terminated",
        Outcome::MaxStepsReached => "MaxStepsReached",
    };
    println!("{outcome} after {} steps, visited {}/{}", t.steps.len(), t.visited_count, n);
    let explored = t.outcome == Outcome::Terminated && t.visited_count == n;
    Ok(if explored { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

struct VerifyArgs<'a> {
    protocol: &'a str,
    ns: Vec<usize>,
    k: Option<usize>,
    init_class: Option<&'a str>,
    model: Option<Model>,
    budget: usize,
    json: bool,
    trace_dir: Option<&'a Path>,
}

fn verify_cmd(a: VerifyArgs) -> Run<ExitCode> {
    let (p, info) = load_protocol(a.protocol)?;
    let model = pick_model(a.model, info)?;
    let starts = match a.init_class {
        Some(s) => parse_class(s)?,
        None => Starts::Class(info.map_or(InitKind::SingleOneBlock, |b| b.init)),
    };
    let k = match &starts {
        Starts::Explicit(c) => c.k(),
        Starts::Class(_) => pick_k(a.k, info)?,
    };
    let instances: Vec<(usize, Vec<Configuration>)> = a
        .ns
        .iter()
        .map(|&n| {
            let inits = match &starts {
                Starts::Explicit(c) if c.n() == n => vec![c.clone()],
                Starts::Explicit(c) => return Err(usage(format!("init has {} nodes, not {n}", c.n()))),
                Starts::Class(kind) => initial_configs(&InitClass { kind: *kind, k, n, phi: p.phi }).map_err(usage)?,
            };
            Ok((n, inits))
        })
        .collect::<Run<_>>()?;
    let results: Vec<Result<Verdict>> =
        instances.par_iter().map(|(_, inits)| verify_configs(&p, inits, model, a.budget)).collect();
    let mut all_explore = true;
    for ((n, inits), r) in instances.iter().zip(results) {
        let v = r.map_err(failure)?;
        let instance = format!("{} n={n} k={k} {model} ({} starts)", p.name, inits.len());
        let trace_path = match (v.trace(), a.trace_dir) {
            (Some(t), Some(dir)) => {
                let path = dir.join(format!("{}-n{n}-{model}.jsonl", p.name));
                std::fs::write(&path, t.to_jsonl()).map_err(|e| failure(format!("{}: {e}", path.display())))?;
                Some(path.display().to_string())
            }
            _ => None,
        };
        all_explore &= v.explores();
        if a.json {
            println!("{}", v.to_json(&instance, trace_path.as_deref()));
        } else {
            let mut line = format!("{instance}: {} ({} states, {} edges)", v.label(), v.states, v.edges);
            if let Some(t) = v.trace() {
                write!(line, ", counterexample of {} steps", t.steps.len()).unwrap();
            }
            if let Some(path) = &trace_path {
                write!(line, " -> {path}").unwrap();
            }
            println!("{line}");
        }
    }
    Ok(if all_explore { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn synthesize_cmd(phi: usize, n: usize, k: usize, model: Model, class: &str, budget: u64) -> Run<ExitCode> {
    let cls = match parse_class(class)? {
        Starts::Class(kind) => InitClass { kind, k, n, phi },
        Starts::Explicit(_) => return Err(usage("synthesis needs `single-block` or `single-phi-group`")),
    };
    let (r, stats) = synthesize(phi, n, k, model, &cls, budget).map_err(failure)?;
    eprintln!("{} tables, {} states explored", stats.tables, stats.nodes);
    match r {
        SynthesisResult::Found(p) => {
            print!("{p}");
            Ok(ExitCode::SUCCESS)
        }
        SynthesisResult::NoneExists => {
            println!("NoneExists");
            Ok(ExitCode::SUCCESS)
        }
        SynthesisResult::BudgetExceeded => {
            println!("BudgetExceeded");
            Ok(ExitCode::from(1))
        }
    }
}

fn print_blocks(c: &Configuration, d: usize, kind: BlockKind, what: &str) -> Result<()> {
    let rep = c.structure(d, kind)?;
    for b in &rep.blocks {
        let nodes: Vec<String> = b.nodes.iter().map(|u| u.to_string()).collect();
        let cyclic = if b.cyclic { ", cyclic" } else { "" };
        println!("{what}: nodes [{}], {} robots{cyclic}", nodes.join(","), b.robots);
    }
    if !rep.isolated.is_empty() {
        let nodes: Vec<String> = rep.isolated.iter().map(|u| u.to_string()).collect();
        println!("isolated: [{}]", nodes.join(","));
    }
    Ok(())
}

fn inspect_cmd(c: &Configuration, phi: usize) -> Run<ExitCode> {
    if phi == 0 {
        return Err(usage("--phi must be at least 1"));
    }
    println!("configuration: {c} (n={}, k={})", c.n(), c.k());
    println!("canonical: {}", c.canonical());
    for u in c.occupied() {
        let v = c.view_at(u, phi).map_err(failure)?;
        println!("view @{u}: {v}");
    }
    print_blocks(c, 1, BlockKind::DBlock, "1.block").map_err(failure)?;
    print_blocks(c, phi, BlockKind::PhiGroup, &format!("{phi}.group")).map_err(failure)?;
    for name in NamedConfig::ALL {
        if let Some((anchor, dir)) = detect_named(c, name) {
            println!("named: {name} @{anchor} ({dir})");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn list_cmd() -> ExitCode {
    for b in BUILTINS {
        println!("{:<18} {}", b.name, b.summary);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.cmd {
        Cmd::Simulate { protocol, n, init, model, seed, max_steps, trace, k } => {
            simulate_cmd(&protocol, n, &init, model, seed, max_steps, trace.as_deref(), k)
        }
        Cmd::Verify { protocol, n, n_range, k, init_class, model, budget, json, trace_dir } => {
            let ns = match (n, n_range) {
                (Some(n), _) => Ok(vec![n]),
                (None, Some(r)) => parse_range(&r),
                (None, None) => Err(usage("one of --n or --n-range is required")),
            };
            ns.and_then(|ns| {
                verify_cmd(VerifyArgs {
                    protocol: &protocol,
                    ns,
                    k,
                    init_class: init_class.as_deref(),
                    model,
                    budget: budget.unwrap_or_else(default_budget),
                    json,
                    trace_dir: trace_dir.as_deref(),
                })
            })
        }
        Cmd::Synthesize { phi, n, k, model, init_class, budget } => {
            synthesize_cmd(phi, n, k, model, &init_class, budget.unwrap_or(default_budget() as u64))
        }
        Cmd::Inspect { config, phi } => inspect_cmd(&config, phi),
        Cmd::ListProtocols => Ok(list_cmd()),
    };
    r.unwrap_or_else(|code| code)
}
