//! `opra`: evaluate path-aggregation queries over labelled graphs.
//!
//! Exit codes: 0 answered, 1 empty result (or corpus mismatch), 2 usage,
//! syntax, validation or load error, 3 resource or evaluation error.

use std::io::Write;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use opra::answer_graph::{Answer, Bindings};
use opra::corpus;
use opra::embedding::{embed, DataGraph};
use opra::engine::{self, reference};
use opra::graph::{Graph, Path};
use opra::oracle::OracleConfig;
use opra::query::{parse, validate, OpraQuery};
use opra::solver::{Mode, SolveConfig, Witness, DEFAULT_VISITED_BUDGET};
use opra::{Error, EvalError};

#[derive(Parser)]
#[command(name = "opra", version, about = "Path-aggregation queries over labelled graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decide whether a query has an answer.
    Eval(EvalArgs),
    /// Minimum or maximum of a labelling over the answers' paths.
    Extremum(ExtremumArgs),
    /// Turn an edge-labelled data graph into a labelled graph.
    Embed(EmbedArgs),
    /// Answer a query by exhaustive enumeration.
    Oracle(OracleArgs),
    /// Run the bundled example queries and compare with the expected outcomes.
    Corpus(OutputArgs),
    /// Parse a query, and validate it when a graph is given.
    Check(CheckArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Compact JSON output (the default).
    #[arg(long, conflicts_with = "pretty")]
    json: bool,
    /// Indented JSON output.
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    query: PathBuf,
    /// Node bindings, e.g. `s=S,t=P`.
    #[arg(long, value_delimiter = ',')]
    bind: Vec<String>,
    /// A path binding, e.g. `p=S,T,P`; repeatable.
    #[arg(long)]
    path: Vec<String>,
    /// Labelling magnitude above which a warning is printed; defaults to
    /// ten times the number of nodes.
    #[arg(long)]
    weight_cap: Option<i64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    bound_b1: Option<usize>,
    #[arg(long)]
    bound_b2: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_VISITED_BUDGET)]
    visited_budget: usize,
    /// Log every expanded search configuration to stderr.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    q: QueryArgs,
    #[command(flatten)]
    solve: SolveArgs,
}

#[derive(Args)]
#[group(id = "direction", required = true, multiple = false)]
struct Direction {
    #[arg(long)]
    min: bool,
    #[arg(long)]
    max: bool,
}

impl Direction {
    fn mode(&self) -> Mode {
        if self.max {
            Mode::Max
        } else {
            Mode::Min
        }
    }
}

#[derive(Args)]
struct ExtremumArgs {
    #[command(flatten)]
    q: QueryArgs,
    #[command(flatten)]
    solve: SolveArgs,
    #[command(flatten)]
    dir: Direction,
    /// `label` or `label[p, ...]`.
    #[arg(long)]
    target: String,
}

#[derive(Args)]
struct EmbedArgs {
    /// Data graph JSON.
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    q: QueryArgs,
    #[arg(long, default_value_t = 8)]
    max_path_len: usize,
    #[arg(long, default_value_t = OracleConfig::default().max_paths)]
    max_paths: usize,
    /// Compute an extremum of this target instead of the answer set.
    #[arg(long)]
    target: Option<String>,
    #[arg(long, requires = "target", conflicts_with = "max")]
    min: bool,
    #[arg(long, requires = "target")]
    max: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    query: PathBuf,
    #[arg(long)]
    graph: Option<PathBuf>,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Eval(ev) => eval_code(ev),
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        Error::Eval(e).into()
    }
}

fn eval_code(e: &EvalError) -> u8 {
    match e {
        EvalError::Binding(_) | EvalError::Config(_) | EvalError::Validation(_) => 2,
        _ => 3,
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn read(path: &FsPath) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("io: {}: {e}", path.display())))
}

fn load_graph(path: &FsPath, cap: Option<i64>) -> Result<Graph, Failure> {
    let g = Graph::from_json_str(&read(path)?).map_err(Error::from)?;
    let cap = cap.unwrap_or(10 * g.node_count() as i64);
    for w in g.weight_warnings(cap) {
        eprintln!("warning: {w}");
    }
    Ok(g)
}

fn load_query(g: &Graph, path: &FsPath) -> Result<OpraQuery, Failure> {
    Ok(engine::prepare(g, &read(path)?)?)
}

fn split_binding(s: &str) -> Result<(&str, &str), Failure> {
    s.split_once('=')
        .map(|(a, b)| (a.trim(), b.trim()))
        .filter(|(a, b)| !a.is_empty() && !b.is_empty())
        .ok_or_else(|| usage(format!("malformed binding `{s}`, expected name=value")))
}

fn load_bindings(g: &Graph, q: &QueryArgs) -> Result<Bindings, Failure> {
    let nodes: Vec<(&str, &str)> = q.bind.iter().map(|b| split_binding(b)).collect::<Result<_, _>>()?;
    let mut paths: Vec<(&str, Vec<&str>)> = Vec::new();
    for p in &q.path {
        let (name, rest) = split_binding(p)?;
        paths.push((name, rest.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()));
    }
    let paths: Vec<(&str, &[&str])> = paths.iter().map(|(n, v)| (*n, v.as_slice())).collect();
    Ok(engine::bindings(g, &nodes, &paths)?)
}

fn solve_config(s: &SolveArgs) -> SolveConfig {
    SolveConfig {
        b1: s.bound_b1,
        b2: s.bound_b2,
        visited_budget: s.visited_budget,
        trace: s.trace,
    }
}

fn path_json(g: &Graph, p: &Path) -> Value {
    json!(g.path_names(p.nodes()))
}

fn answer_json(g: &Graph, a: &Answer) -> Value {
    let nodes: Map<String, Value> = a.nodes.iter().map(|(k, v)| (k.clone(), json!(g.name(*v)))).collect();
    let paths: Map<String, Value> = a.paths.iter().map(|(k, p)| (k.clone(), path_json(g, p))).collect();
    json!({ "nodes": nodes, "paths": paths })
}

fn witness_fields(g: &Graph, w: &Witness, out: &mut Map<String, Value>) {
    out.insert("witness".into(), Value::Array(w.paths.iter().map(|p| path_json(g, p)).collect()));
    out.insert("answer".into(), answer_json(g, &w.answer));
}

fn print(out: &OutputArgs, v: &Value) {
    let s = if out.pretty {
        serde_json::to_string_pretty(v)
    } else {
        serde_json::to_string(v)
    };
    // a closed stdout (e.g. piped into `head`) is not an error worth reporting
    let _ = writeln!(std::io::stdout(), "{}", s.expect("JSON values serialize"));
}

fn cmd_eval(a: &EvalArgs) -> Result<u8, Failure> {
    let g = load_graph(&a.q.graph, a.q.weight_cap)?;
    let q = load_query(&g, &a.q.query)?;
    let b = load_bindings(&g, &a.q)?;
    let started = Instant::now();
    let r = engine::check(&g, &q, &b, &solve_config(&a.solve))?;
    let mut out = Map::new();
    out.insert("empty".into(), json!(!r.nonempty));
    if let Some(w) = &r.witness {
        witness_fields(&g, w, &mut out);
    }
    out.insert("stats".into(), stats_json(&r.stats, started));
    print(&a.q.out, &Value::Object(out));
    Ok(if r.nonempty { 0 } else { 1 })
}

fn stats_json(s: &opra::solver::SolveStats, started: Instant) -> Value {
    json!({
        "states": s.states,
        "configs": s.configs,
        "b1": s.b1,
        "b2": s.b2,
        "millis": started.elapsed().as_millis() as u64,
    })
}

fn cmd_extremum(a: &ExtremumArgs) -> Result<u8, Failure> {
    let g = load_graph(&a.q.graph, a.q.weight_cap)?;
    let q = load_query(&g, &a.q.query)?;
    let b = load_bindings(&g, &a.q)?;
    let t = engine::parse_target(&a.target, &q)?;
    let started = Instant::now();
    let r = engine::extremum(&g, &q, &b, &t, a.dir.mode(), &solve_config(&a.solve))?;
    let mut out = Map::new();
    out.insert("value".into(), r.value.to_json());
    if let Some(w) = &r.witness {
        witness_fields(&g, w, &mut out);
    }
    out.insert("stats".into(), stats_json(&r.stats, started));
    print(&a.q.out, &Value::Object(out));
    Ok(0)
}

fn cmd_embed(a: &EmbedArgs) -> Result<u8, Failure> {
    let dg = DataGraph::from_json_str(&read(&a.data)?).map_err(Error::from)?;
    let g = embed(&dg).map_err(Error::from)?;
    print(&a.out, &g.to_json());
    Ok(0)
}

fn cmd_oracle(a: &OracleArgs) -> Result<u8, Failure> {
    if a.max_path_len == 0 {
        return Err(usage("--max-path-len must be at least 1"));
    }
    let g = load_graph(&a.q.graph, a.q.weight_cap)?;
    let q = load_query(&g, &a.q.query)?;
    let b = load_bindings(&g, &a.q)?;
    let cfg = OracleConfig {
        max_path_len: a.max_path_len,
        max_paths: a.max_paths,
    };
    if let Some(spec) = &a.target {
        if !a.min && !a.max {
            return Err(usage("--target needs --min or --max"));
        }
        let t = engine::parse_target(spec, &q)?;
        let mode = if a.max { Mode::Max } else { Mode::Min };
        let v = reference::extremum(&g, &q, &b, &t, mode, &cfg)?;
        print(&a.q.out, &json!({ "value": v.to_json() }));
        return Ok(0);
    }
    let answers = reference::answers(&g, &q, &b, &cfg)?;
    let list: Vec<Value> = answers.iter().map(|x| answer_json(&g, x)).collect();
    print(&a.q.out, &json!({ "empty": answers.is_empty(), "answers": list }));
    Ok(if answers.is_empty() { 1 } else { 0 })
}

fn cmd_corpus(out: &OutputArgs) -> Result<u8, Failure> {
    let started = Instant::now();
    let reports = corpus::run_all(&SolveConfig::default());
    let mut cases = Vec::new();
    for r in &reports {
        let got = match &r.got {
            Ok(o) => o.to_json(),
            Err(e) => json!({ "error": e }),
        };
        cases.push(json!({
            "name": r.name,
            "ok": r.ok(),
            "expected": r.expected.map(|o| o.to_json()),
            "got": got,
        }));
    }
    let all_ok = reports.iter().all(|r| r.ok());
    print(
        out,
        &json!({ "ok": all_ok, "cases": cases, "millis": started.elapsed().as_millis() as u64 }),
    );
    Ok(if all_ok { 0 } else { 1 })
}

fn cmd_check(a: &CheckArgs) -> Result<u8, Failure> {
    let text = read(&a.query)?;
    let q = parse(&text).map_err(Error::from)?;
    if let Some(gp) = &a.graph {
        let g = load_graph(gp, None)?;
        validate(&q, &g).map_err(Error::from)?;
    }
    println!("{}", json!({ "ok": true }));
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let trace = match &cli.cmd {
        Cmd::Eval(a) => a.solve.trace,
        Cmd::Extremum(a) => a.solve.trace,
        _ => false,
    };
    let mut logger = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"));
    if trace {
        logger.filter_module("opra::trace", log::LevelFilter::Info);
    }
    logger.init();

    let result = match &cli.cmd {
        Cmd::Eval(a) => cmd_eval(a),
        Cmd::Extremum(a) => cmd_extremum(a),
        Cmd::Embed(a) => cmd_embed(a),
        Cmd::Oracle(a) => cmd_oracle(a),
        Cmd::Corpus(o) => cmd_corpus(o),
        Cmd::Check(a) => cmd_check(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
