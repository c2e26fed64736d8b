//! `htps`: prove, replay, generate, train online, evaluate, export graphs.
//!
//! Exit codes: 0 success, 1 proof not found (or proof invalid), 2 usage or
//! configuration error.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use htps::env::{Env, Goal, ProofRecord, ReplayError};
use htps::expr::parse_infix;
use htps::gen::{generate, GenConfig, GenKind};
use htps::htps::{search, GraphDump, Policy, SearchParams};
use htps::learn::{ExternalOracle, HeuristicOracle, LearnableOracle, Model, PolicyOracle, UniformOracle};
use htps::orchestrator::{
    evaluate_pass_at_k, pretrain, read_statement_lines, run_online, EvalConfig, Frozen, ParamRanges, RunConfig, Theorem,
};
use htps::rules::Inventory;

#[derive(Parser)]
#[command(name = "htps", version, about = "Hypertree proof search over rewriting rules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a proof of one statement.
    Prove(ProveArgs),
    /// Check proof records step by step.
    Replay(ReplayArgs),
    /// Write a dataset of generated theorems with proofs.
    Generate(GenerateArgs),
    /// Run the online prover/trainer loop from a config file.
    Online(OnlineArgs),
    /// Pass@k of an oracle on a statement file.
    Eval(EvalArgs),
    /// Render a graph dump as Graphviz DOT.
    ExportDot(ExportDotArgs),
}

#[derive(Args, Clone)]
struct SearchFlags {
    /// Comma-separated rule groups.
    #[arg(long, default_value = "basic")]
    rules: String,
    /// Expansion budget.
    #[arg(long, default_value_t = 1000)]
    budget: usize,
    #[arg(long, default_value = "puct")]
    policy: Policy,
    /// Depth penalty applied per level during backup.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0.3)]
    exploration: f64,
    /// Tactics requested per expansion.
    #[arg(long, default_value_t = 32)]
    tactics: usize,
    #[arg(long, default_value_t = 1.0)]
    temperature: f64,
    /// heuristic | uniform | learnable:<model.json> | external:<command>
    #[arg(long, default_value = "heuristic")]
    oracle: String,
}

impl SearchFlags {
    fn params(&self) -> Result<SearchParams> {
        let p = SearchParams {
            policy: self.policy,
            exploration: self.exploration,
            depth_penalty: self.gamma,
            budget: self.budget,
            tactics_per_expansion: self.tactics,
            temperature: self.temperature,
            ..SearchParams::default()
        };
        p.validate()?;
        Ok(p)
    }

    fn env(&self) -> Result<Env> {
        load_env(&self.rules)
    }
}

#[derive(Args)]
struct ProveArgs {
    /// Goal in prefix form, e.g. "= + x y + y x" (hypotheses: "h1 ; h2 |- goal").
    statement: String,
    /// Parse the statement as infix instead, e.g. "x + y = y + x".
    #[arg(long)]
    infix: bool,
    #[command(flatten)]
    search: SearchFlags,
    /// Write the proof record (one JSON line) here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the final hypergraph as DOT here.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Write the final hypergraph as JSON here (input to export-dot).
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    /// File with one proof record per line.
    file: PathBuf,
    #[arg(long, default_value = "all")]
    rules: String,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "walk")]
    kind: GenKind,
    /// Generator settings (TOML); flags override its seed.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "basic")]
    rules: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OnlineArgs {
    /// Run configuration (TOML).
    config: PathBuf,
    /// learnable | learnable:<model.json> | heuristic | uniform | external:<command>;
    /// only learnable oracles are trained.
    #[arg(long, default_value = "learnable")]
    oracle: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Write final metrics (JSON) here.
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Save the trained model (JSON) here.
    #[arg(long)]
    save_model: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Statements, one per line (prefix goals or proof records).
    file: PathBuf,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Draw per-attempt parameters from the default ranges instead of the
    /// flags (the expansion budget stays fixed to --budget).
    #[arg(long)]
    sample_params: bool,
    #[command(flatten)]
    search: SearchFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportDotArgs {
    /// Graph dump written by `prove --dump`.
    graph: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Non-error results; errors map to exit code 2.
#[derive(Debug)]
enum Outcome {
    Success,
    NotFound,
}

fn load_env(rules: &str) -> Result<Env> {
    let names: Vec<&str> = rules.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    Ok(Env::new(Inventory::load_named(&names)?))
}

fn load_oracle(spec: &str, env: &Env) -> Result<Arc<dyn PolicyOracle>> {
    Ok(match spec.split_once(':') {
        None if spec == "heuristic" => Arc::new(HeuristicOracle::new(env.clone())),
        None if spec == "uniform" => Arc::new(UniformOracle::new(env.clone())),
        None if spec == "learnable" => Arc::new(LearnableOracle::new(env.clone())),
        Some(("learnable", path)) => Arc::new(load_model(Path::new(path), env)?),
        Some(("external", cmd)) => {
            let mut parts = cmd.split_whitespace();
            let program = parts.next().ok_or_else(|| anyhow!("external oracle: empty command"))?;
            let args: Vec<String> = parts.map(String::from).collect();
            Arc::new(ExternalOracle::spawn(program, &args)?)
        }
        _ => bail!("unknown oracle `{spec}`"),
    })
}

fn load_model(path: &Path, env: &Env) -> Result<LearnableOracle> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let model: Model = serde_json::from_str(&text).with_context(|| format!("parsing model {}", path.display()))?;
    Ok(LearnableOracle::from_model(env.clone(), model))
}

fn parse_goal(text: &str, infix: bool) -> Result<Goal> {
    if infix {
        Ok(Goal::new(parse_infix(text)?))
    } else {
        text.parse::<Goal>().map_err(|e| anyhow!("cannot parse `{text}`: {e}"))
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn prove(a: ProveArgs) -> Result<Outcome> {
    let env = a.search.env()?;
    let params = a.search.params()?;
    let goal = parse_goal(&a.statement, a.infix)?;
    let oracle = load_oracle(&a.search.oracle, &env)?;
    let result = search(&env, goal, oracle.as_ref(), &params);
    if let Some(path) = &a.dot {
        fs::write(path, result.graph.dump().to_dot()).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &a.dump {
        fs::write(path, result.graph.dump().to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    let s = &result.stats;
    eprintln!(
        "{:?}: {} expansions, {} nodes, {} edges, {:.2}s",
        result.root_status(),
        s.expansions,
        s.nodes,
        s.edges,
        s.elapsed.as_secs_f64()
    );
    let Some(proof) = &result.proof else {
        println!("NOT FOUND");
        return Ok(Outcome::NotFound);
    };
    let record = proof.to_record();
    match &a.out {
        Some(path) => {
            fs::write(path, record.to_json_line() + "\n").with_context(|| format!("writing {}", path.display()))?;
            println!("PROVED size {} depth {} -> {}", record.size, record.depth, path.display());
        }
        None => {
            println!("PROVED size {} depth {}", record.size, record.depth);
            for step in &record.steps {
                println!("  {}  ⊢  {}", step.tactic, step.goal);
            }
        }
    }
    Ok(Outcome::Success)
}

fn replay(a: ReplayArgs) -> Result<Outcome> {
    let env = if a.rules == "all" {
        Env::new(Inventory::load(&htps::rules::RuleGroup::ALL)?)
    } else {
        load_env(&a.rules)?
    };
    let text = fs::read_to_string(&a.file).with_context(|| format!("reading {}", a.file.display()))?;
    let mut all_valid = true;
    let mut count = 0;
    for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        count += 1;
        let record = ProofRecord::from_json_line(line).map_err(|e| anyhow!("line {}: {e}", n + 1))?;
        let verdict = record.to_proof().and_then(|p| p.replay(&env).map(|_| p.steps.len()));
        match verdict {
            Ok(steps) => println!("VALID {} ({steps} steps)", record.theorem),
            Err(ReplayError::Malformed(m)) => bail!("line {}: {m}", n + 1),
            Err(e) => {
                all_valid = false;
                let sep = if e.step().is_some() { " " } else { ": " };
                println!("INVALID {}{sep}{e}", record.theorem);
            }
        }
    }
    if count == 0 {
        bail!("{}: no proof records", a.file.display());
    }
    Ok(if all_valid { Outcome::Success } else { Outcome::NotFound })
}

fn generate_cmd(a: GenerateArgs) -> Result<Outcome> {
    let env = load_env(&a.rules)?;
    let mut cfg = match &a.config {
        Some(p) => toml::from_str::<GenConfig>(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
        None => GenConfig::default(),
    };
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let records = generate(&env, &cfg, a.kind, a.n)?;
    let mut out = output(a.out.as_deref())?;
    for r in &records {
        writeln!(out, "{}", r.to_json_line())?;
    }
    out.flush()?;
    eprintln!("generated {} theorems", records.len());
    Ok(Outcome::Success)
}

fn online(a: OnlineArgs) -> Result<Outcome> {
    let mut cfg = RunConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    let base = a.config.parent().unwrap_or(Path::new("."));
    if let Some(log) = &cfg.event_log {
        cfg.event_log = Some(base.join(log));
    }
    let env = cfg.env()?;
    let theorems = cfg.load_statements(&env, base)?;
    let mut log_file = match &cfg.event_log {
        Some(p) => Some(BufWriter::new(
            fs::OpenOptions::new().create(true).append(true).open(p).with_context(|| format!("opening {}", p.display()))?,
        )),
        None => None,
    };
    let log = log_file.as_mut().map(|w| w as &mut dyn Write);
    let metrics = match a.oracle.as_str() {
        "learnable" => {
            let mut o = LearnableOracle::new(env.clone());
            warm_start(&mut o, &env, &cfg)?;
            let m = run_online(&env, &theorems, &mut o, &cfg, log);
            save_model(a.save_model.as_deref(), &o)?;
            m
        }
        spec if spec.starts_with("learnable:") => {
            let mut o = load_model(Path::new(&spec["learnable:".len()..]), &env)?;
            warm_start(&mut o, &env, &cfg)?;
            let m = run_online(&env, &theorems, &mut o, &cfg, log);
            save_model(a.save_model.as_deref(), &o)?;
            m
        }
        spec => run_online(&env, &theorems, &mut Frozen(load_oracle(spec, &env)?), &cfg, log),
    };
    if let Some(mut w) = log_file {
        w.flush()?;
    }
    if let Some(p) = &a.metrics {
        fs::write(p, serde_json::to_string_pretty(&metrics)?).with_context(|| format!("writing {}", p.display()))?;
    }
    print!("{}", metrics.summary_table());
    println!(
        "attempts {}  crashes {}  train steps {}  oracle version {}  refreshes {}  {:.1}s",
        metrics.attempts, metrics.crashes, metrics.train_steps, metrics.final_version, metrics.refreshes, metrics.secs
    );
    Ok(Outcome::Success)
}

fn warm_start(o: &mut LearnableOracle, env: &Env, cfg: &RunConfig) -> Result<()> {
    if let Some(data) = &cfg.pretrain {
        let n = pretrain(o, env, data)?;
        eprintln!("pretrained on {n} samples");
    }
    Ok(())
}

fn save_model(path: Option<&Path>, o: &LearnableOracle) -> Result<()> {
    if let Some(p) = path {
        fs::write(p, serde_json::to_string(o.model())?).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn eval(a: EvalArgs) -> Result<Outcome> {
    let env = a.search.env()?;
    let params = a.search.params()?;
    if a.k == 0 {
        bail!("--k must be at least 1");
    }
    let text = fs::read_to_string(&a.file).with_context(|| format!("reading {}", a.file.display()))?;
    let theorems = read_statement_lines(&text)
        .map_err(|e| anyhow!("{}: {e}", a.file.display()))?
        .iter()
        .enumerate()
        .map(|(i, t)| Ok(Theorem { id: i.to_string(), split: "eval".into(), goal: parse_goal(t, false)? }))
        .collect::<Result<Vec<_>>>()?;
    let oracle = load_oracle(&a.search.oracle, &env)?;
    let cfg = EvalConfig {
        seed: a.seed,
        params: if a.sample_params { ParamRanges::default() } else { ParamRanges::fixed(&params) },
        expansions: Some(params.budget),
    };
    let result = evaluate_pass_at_k(&env, &theorems, oracle.as_ref(), a.k, &cfg);
    let mut out = output(a.out.as_deref())?;
    for ((t, attempts), solved) in theorems.iter().zip(&result.attempts).zip(result.solved()) {
        let best = attempts.iter().flatten().min();
        let verdict = if solved { "PROVED" } else { "FAILED" };
        let size = best.map_or("-".to_string(), |s| s.to_string());
        writeln!(out, "{verdict}\t{size}\t{}", t.goal)?;
    }
    writeln!(out, "pass@{}: {}/{} = {:.1}%", a.k, result.solved().iter().filter(|&&s| s).count(), theorems.len(), 100.0 * result.rate())?;
    out.flush()?;
    Ok(Outcome::Success)
}

fn export_dot(a: ExportDotArgs) -> Result<Outcome> {
    let text = fs::read_to_string(&a.graph).with_context(|| format!("reading {}", a.graph.display()))?;
    let dump = GraphDump::from_json(&text).with_context(|| format!("parsing {}", a.graph.display()))?;
    let mut out = output(a.out.as_deref())?;
    out.write_all(dump.to_dot().as_bytes())?;
    out.flush()?;
    Ok(Outcome::Success)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Prove(a) => prove(a),
        Command::Replay(a) => replay(a),
        Command::Generate(a) => generate_cmd(a),
        Command::Online(a) => online(a),
        Command::Eval(a) => eval(a),
        Command::ExportDot(a) => export_dot(a),
    };
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::NotFound) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
