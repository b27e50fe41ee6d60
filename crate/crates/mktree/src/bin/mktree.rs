//! Command-line front end: learn topologies from data, score models against
//! exact joints, answer inference queries, cross-check the dynamic program
//! against the exhaustive oracle, and export DOT drawings.
//!
//! All reports are JSON lines on stdout; progress and wall-clock timings go
//! to stderr (controlled by `KTREE_LOG`) so stdout stays byte-reproducible.
//! Exit codes: 2 malformed input, 3 infeasible request, 4 zero-probability
//! evidence.

use clap::{Args, Parser, Subcommand};
use mktree::infer::{evidence_probability, marginal, mpe, Evidence};
use mktree::io::{read_csv_samples, read_json_joint, read_score_table};
use mktree::ktree::{backbone_edges, tree_decomposition, DEFAULT_ORACLE_CAP};
use mktree::learn::{backbone_dp, brute_force_mskt, learn_markov_backbone_ktree, TableScore};
use mktree::model::{
    amended_delta, divergence_report, from_model_json, per_vertex_mi, to_model_json, Amendment,
    DataSource, MarkovKTree, ModelJson,
};
use mktree::tables::VariableId;
use mktree::MkError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "mktree", version, about = "Bounded-treewidth Markov network learning and inference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn the optimal backbone k-tree topology from data and fit a model.
    Learn(LearnArgs),
    /// Score a fitted model against an exact joint (divergence report).
    Score(ScoreArgs),
    /// Query a fitted model: marginal, MPE, or evidence probability.
    Infer(InferArgs),
    /// Cross-check the dynamic program against the exhaustive oracle.
    OracleCheck(OracleArgs),
    /// Export DOT drawings of a model's k-tree or clique tree.
    ExportDot(ExportArgs),
}

#[derive(Args)]
struct LearnArgs {
    /// Tree width bound.
    #[arg(long)]
    k: usize,
    /// Input data file.
    #[arg(long)]
    input: PathBuf,
    /// Input kind: csv-samples or json-joint.
    #[arg(long, default_value = "csv-samples")]
    kind: String,
    /// Additive smoothing for empirical tables.
    #[arg(long, default_value_t = 0.0)]
    pseudocount: f64,
    /// Directory for model.json and tree.dot (stdout-only when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized tie-breaking (reserved; learning is deterministic).
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ScoreArgs {
    /// Exact joint to score against (json-joint).
    #[arg(long)]
    input: PathBuf,
    /// Input kind; only json-joint carries enough information to score.
    #[arg(long, default_value = "json-joint")]
    kind: String,
    /// Fitted model JSON.
    #[arg(long)]
    model: PathBuf,
    /// Per-edge penalty for the reported amended delta.
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
}

#[derive(Args)]
struct InferArgs {
    /// Fitted model JSON.
    #[arg(long)]
    model: PathBuf,
    /// Query kind: marginal, mpe, or evidence.
    #[arg(long)]
    query: String,
    /// Target variable for marginal queries, e.g. X3.
    #[arg(long)]
    x: Option<String>,
    /// Comma-separated evidence, e.g. "X1=0,X4=2".
    #[arg(long, default_value = "")]
    evidence: String,
}

#[derive(Args)]
struct OracleArgs {
    /// Tree width bound.
    #[arg(long)]
    k: usize,
    /// Number of variables per trial.
    #[arg(long)]
    n: usize,
    /// Random score tables to try.
    #[arg(long, default_value_t = 10)]
    trials: usize,
    /// Largest n the exhaustive oracle will accept.
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    oracle_cap: usize,
    /// Seed for the random score tables.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExportArgs {
    /// Fitted model JSON.
    #[arg(long)]
    model: PathBuf,
    /// What to draw: tree or cliques.
    #[arg(long, default_value = "tree")]
    what: String,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Learn(a) => cmd_learn(a),
        Command::Score(a) => cmd_score(a),
        Command::Infer(a) => cmd_infer(a),
        Command::OracleCheck(a) => cmd_oracle_check(a),
        Command::ExportDot(a) => cmd_export_dot(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mktree: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// 2 = malformed input, 3 = infeasible request, 4 = zero-probability evidence.
fn exit_code_for(e: &MkError) -> u8 {
    match e {
        MkError::ZeroProbabilityEvidence => 4,
        MkError::Infeasible(_)
        | MkError::NoRetainingKTree { .. }
        | MkError::OracleCap { .. }
        | MkError::TableCap { .. } => 3,
        _ => 2,
    }
}

fn log_enabled() -> bool {
    std::env::var("KTREE_LOG").is_ok_and(|v| !v.is_empty() && v != "0")
}

macro_rules! progress {
    ($($arg:tt)*) => {
        if log_enabled() {
            eprintln!($($arg)*);
        }
    };
}

fn load_model(path: &Path) -> Result<MarkovKTree, MkError> {
    let json: ModelJson = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    from_model_json(&json)
}

fn cmd_learn(a: LearnArgs) -> Result<ExitCode, MkError> {
    if a.k < 1 {
        return Err(MkError::Infeasible("k must be at least 1".into()));
    }
    // A bare score table yields a topology but no distribution to fit.
    if a.kind == "json-score-table" {
        let (table, meta) = read_score_table(&a.input)?;
        if meta.k != a.k {
            return Err(MkError::Parse(format!(
                "score table was built for k = {}, requested k = {}",
                meta.k, a.k
            )));
        }
        let result = backbone_dp(meta.n, a.k, &table)?;
        progress!(
            "dp finished: {} states expanded in {:.3?}",
            result.stats.states_expanded,
            result.stats.wall
        );
        if let Some(dir) = &a.out {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("tree.dot"), result.tree.to_dot())?;
        }
        let report = json!({
            "command": "learn",
            "n": meta.n,
            "k": a.k,
            "score": result.score,
            "edges": result.tree.canonical_edges(),
            "states_expanded": result.stats.states_expanded,
        });
        println!("{report}");
        return Ok(ExitCode::SUCCESS);
    }
    let owned_joint;
    let owned_csv;
    let dist = match a.kind.as_str() {
        "csv-samples" => {
            owned_csv = read_csv_samples(&a.input)?;
            progress!(
                "loaded {} samples over {} variables",
                owned_csv.samples.len(),
                owned_csv.cards.n()
            );
            DataSource::empirical(&owned_csv.samples, &owned_csv.cards, a.pseudocount)?
        }
        "json-joint" => {
            owned_joint = read_json_joint(&a.input)?;
            DataSource::exact(&owned_joint)?
        }
        other => return Err(MkError::Parse(format!("unknown input kind '{other}'"))),
    };
    let (model, result) = learn_markov_backbone_ktree(&dist, a.k)?;
    progress!(
        "dp finished: {} states expanded in {:.3?}",
        result.stats.states_expanded,
        result.stats.wall
    );
    let mi_terms = per_vertex_mi(model.orientation(), &dist)?;
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(
            dir.join("model.json"),
            serde_json::to_string_pretty(&to_model_json(&model))?,
        )?;
        std::fs::write(dir.join("tree.dot"), model.tree().to_dot())?;
    }
    let report = json!({
        "command": "learn",
        "n": model.n(),
        "k": model.k(),
        "delta": result.score,
        "per_vertex_mi": mi_terms,
        "edges": model.tree().canonical_edges(),
        "states_expanded": result.stats.states_expanded,
    });
    println!("{report}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_score(a: ScoreArgs) -> Result<ExitCode, MkError> {
    if a.kind != "json-joint" {
        return Err(MkError::Parse(
            "score requires an exact joint (--kind json-joint)".into(),
        ));
    }
    let joint = read_json_joint(&a.input)?;
    let model = load_model(&a.model)?;
    let rep = divergence_report(&joint, &model)?;
    let ds = DataSource::exact(&joint)?;
    let amended = amended_delta(
        model.orientation(),
        &Amendment::all_edges(model.tree()),
        &ds,
        a.lambda,
    )?;
    let report = json!({
        "command": "score",
        "kl": rep.kl,
        "kl_finite": rep.kl_finite,
        "delta": rep.delta,
        "sum_marginal_entropy": rep.sum_marginal_entropy,
        "joint_entropy": rep.joint_entropy,
        "residual": if rep.kl_finite { rep.residual() } else { f64::INFINITY },
        "lambda": a.lambda,
        "amended_delta": amended,
    });
    println!("{report}");
    Ok(ExitCode::SUCCESS)
}

/// Parses "X1=0,X4=2" into evidence.
fn parse_evidence(text: &str) -> Result<Evidence, MkError> {
    let mut e = Evidence::empty();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| MkError::Parse(format!("bad evidence item '{item}'")))?;
        let v = parse_var(name)?;
        let s: u32 = value
            .trim()
            .parse()
            .map_err(|_| MkError::Parse(format!("bad evidence state '{value}'")))?;
        if e.is_fixed(v) {
            return Err(MkError::DuplicateVariable(v.0));
        }
        e.fix(v, s);
    }
    Ok(e)
}

fn parse_var(name: &str) -> Result<VariableId, MkError> {
    let name = name.trim();
    let digits = name.strip_prefix('X').unwrap_or(name);
    let i: u16 = digits
        .parse()
        .map_err(|_| MkError::Parse(format!("bad variable name '{name}'")))?;
    if i == 0 {
        return Err(MkError::Parse("variables are numbered from 1".into()));
    }
    Ok(VariableId(i))
}

fn cmd_infer(a: InferArgs) -> Result<ExitCode, MkError> {
    let model = load_model(&a.model)?;
    let evidence = parse_evidence(&a.evidence)?;
    let report = match a.query.as_str() {
        "marginal" => {
            let name = a
                .x
                .as_deref()
                .ok_or_else(|| MkError::Parse("marginal query needs --x".into()))?;
            let x = parse_var(name)?;
            let marg = marginal(&model, x, &evidence)?;
            json!({
                "command": "infer",
                "query": "marginal",
                "x": x.to_string(),
                "evidence": a.evidence,
                "result": marg.probs(),
            })
        }
        "mpe" => {
            let (assignment, log2p) = mpe(&model, &evidence)?;
            json!({
                "command": "infer",
                "query": "mpe",
                "evidence": a.evidence,
                "result": assignment,
                "log2p": log2p,
            })
        }
        "evidence" => {
            let log2p = evidence_probability(&model, &evidence)?;
            json!({
                "command": "infer",
                "query": "evidence",
                "evidence": a.evidence,
                "log2p": log2p,
                "probability": log2p.exp2(),
            })
        }
        other => return Err(MkError::Parse(format!("unknown query '{other}'"))),
    };
    println!("{report}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle_check(a: OracleArgs) -> Result<ExitCode, MkError> {
    if a.oracle_cap > DEFAULT_ORACLE_CAP {
        return Err(MkError::Parse(format!(
            "oracle cap {} exceeds the supported maximum {DEFAULT_ORACLE_CAP}",
            a.oracle_cap
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut all_match = true;
    for trial in 0..a.trials {
        let f = random_table(&mut rng, a.n, a.k);
        let dp = backbone_dp(a.n, a.k, &f)?;
        let oracle = brute_force_mskt(a.n, a.k, &f, &backbone_edges(a.n), a.oracle_cap)?;
        let matched = (dp.score - oracle.score).abs() < 1e-9;
        all_match &= matched;
        let line = json!({
            "command": "oracle-check",
            "trial": trial,
            "n": a.n,
            "k": a.k,
            "dp_score": dp.score,
            "oracle_score": oracle.score,
            "match": matched,
        });
        println!("{line}");
    }
    println!(
        "{}",
        json!({"command": "oracle-check", "summary": if all_match { "pass" } else { "fail" }})
    );
    if all_match {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::FAILURE)
    }
}

/// A dense random score table over parent sets of size ≤ k.
fn random_table(rng: &mut ChaCha8Rng, n: usize, k: usize) -> TableScore {
    let mut table = TableScore::new();
    for x in 1..=n as u16 {
        for bits in 0u32..1 << n {
            if bits >> (x - 1) & 1 == 1 {
                continue;
            }
            let parents: Vec<u16> = (1..=n as u16).filter(|p| bits >> (p - 1) & 1 == 1).collect();
            if parents.is_empty() || parents.len() > k {
                continue;
            }
            table.insert(x, parents, rng.gen_range(-1.0..1.0));
        }
    }
    table
}

fn cmd_export_dot(a: ExportArgs) -> Result<ExitCode, MkError> {
    let model = load_model(&a.model)?;
    let dot = match a.what.as_str() {
        "tree" => model.tree().to_dot(),
        "cliques" => tree_decomposition(model.order())?.to_dot(),
        other => return Err(MkError::Parse(format!("unknown drawing '{other}'"))),
    };
    match &a.out {
        Some(path) => std::fs::write(path, dot)?,
        None => print!("{dot}"),
    }
    Ok(ExitCode::SUCCESS)
}
