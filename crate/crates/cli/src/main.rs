//! `ordfix`: repair programs with the fewest token edits, and build and
//! replay test corpora.
//!
//! Exit codes:
//!
//! | code | meaning                                   |
//! |------|-------------------------------------------|
//! | 0    | success (fixed, accepted, or written)     |
//! | 1    | bad input: I/O, lexing, environment, args |
//! | 2    | no fix within the edit cap                |
//! | 3    | time limit                                |
//! | 4    | memory limit                              |
//! | 5    | internal error                            |
//! | 6    | `check` rejected the program              |

mod bench;
mod diff;

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ordfix_core::corpus::{
    encode_mis, generate_corpus, mis_env, mis_source, mutate_corpus, oracle_min_fix, read_jsonl, write_jsonl,
    GenParams, Group, OracleAnnotation, OracleError, OracleLimits, UndirectedGraph,
};
use ordfix_core::fixer::{fix, FixLimits, FixResult, FixStatus};
use ordfix_core::langs::minijava::{MiniJava, MjEnv};
use ordfix_core::langs::tiny_assign::{TinyAssign, TinyEnv};
use ordfix_core::langs::Frontend;
use ordfix_core::reachability::ReachState;
use ordfix_core::{ModGraph, Token};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_NO_FIX: u8 = 2;
pub const EXIT_TIME: u8 = 3;
pub const EXIT_MEMORY: u8 = 4;
pub const EXIT_INTERNAL: u8 = 5;
pub const EXIT_REJECTED: u8 = 6;

#[derive(Parser)]
#[command(name = "ordfix", version, about = "Minimal-edit repair of compilation errors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Repair one program.
    Fix(FixArgs),
    /// Run the reference checker on one program.
    Check(CheckArgs),
    /// Write random compilable minijava programs as corpus JSONL.
    Gen(GenArgs),
    /// Mutate every record of a corpus.
    Mutate(MutateArgs),
    /// Annotate corpus records with exhaustively searched minimal weights.
    Oracle(OracleArgs),
    /// Fix every record of a corpus and summarize.
    Bench(BenchArgs),
    /// Print the independent-set encoding of a graph.
    Mis(MisArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Lang {
    TinyAssign,
    Minijava,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Human,
}

#[derive(Args)]
struct LangArgs {
    #[arg(long, value_enum, default_value = "minijava")]
    lang: Lang,
    /// Environment file; empty when omitted.
    #[arg(long)]
    env: Option<PathBuf>,
    /// Program file, or `-` for stdin.
    input: PathBuf,
}

#[derive(Args, Clone)]
pub struct LimitArgs {
    /// Largest edit count to search; defaults to the token count plus 8.
    #[arg(long)]
    max_edits: Option<u32>,
    /// Seconds per job; 0 disables the limit.
    #[arg(long, default_value_t = 600.0)]
    time_limit: f64,
    /// Bytes of edge and memo storage per job; 0 disables the limit.
    #[arg(long, default_value_t = 15 << 30)]
    memory_limit: usize,
}

impl LimitArgs {
    pub fn limits(&self) -> FixLimits {
        FixLimits {
            max_edits: self.max_edits,
            time_limit: (self.time_limit > 0.0).then(|| Duration::from_secs_f64(self.time_limit)),
            memory_bytes: (self.memory_limit > 0).then_some(self.memory_limit),
            ..FixLimits::default()
        }
    }
}

#[derive(Args)]
struct FixArgs {
    #[command(flatten)]
    lang: LangArgs,
    #[command(flatten)]
    limits: LimitArgs,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Include wall and CPU time in the JSON report.
    #[arg(long)]
    timing: bool,
    /// Write the modification graph in DOT format here.
    #[arg(long)]
    dump_modgraph: Option<PathBuf>,
    /// Write per-weight, per-symbol reachability edge counts as JSON here,
    /// saturated up to the weight of the fix.
    #[arg(long)]
    dump_reach: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    lang: LangArgs,
}

#[derive(Args)]
struct GenArgs {
    /// First seed; records use consecutive seeds.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long, default_value_t = 20)]
    min_tokens: usize,
    #[arg(long, default_value_t = 60)]
    max_tokens: usize,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MutateArgs {
    #[arg(long, value_parser = parse_group)]
    group: Group,
    /// Mutations per record.
    #[arg(long)]
    errors: u32,
    /// Corpus JSONL, or `-` for stdin.
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 2)]
    kmax: u32,
    /// Reference-checker calls allowed per record.
    #[arg(long, default_value_t = 20_000_000)]
    max_checks: u64,
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
pub struct BenchArgs {
    input: PathBuf,
    #[command(flatten)]
    limits: LimitArgs,
    /// Jobs run concurrently; each job stays on one thread.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Also write one CSV row per record here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct MisArgs {
    #[arg(long)]
    vertices: usize,
    /// Edge as `a-b` with vertices numbered from 0; repeatable.
    #[arg(long = "edge", value_parser = parse_edge)]
    edges: Vec<(usize, usize)>,
}

fn parse_group(s: &str) -> Result<Group, String> {
    s.parse()
}

fn parse_edge(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once('-').ok_or_else(|| format!("edge `{s}` is not of the form a-b"))?;
    let num = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("edge `{s}`: {e}"));
    Ok((num(a)?, num(b)?))
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("reading stdin")?;
        return Ok(s);
    }
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

enum Loaded {
    Tiny(TinyAssign),
    Mj(MiniJava),
}

fn load(args: &LangArgs) -> Result<(Loaded, String)> {
    let env = match &args.env {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => String::new(),
    };
    let loaded = match args.lang {
        Lang::TinyAssign => Loaded::Tiny(TinyAssign::new(TinyEnv::parse(&env).context("environment")?)),
        Lang::Minijava => Loaded::Mj(MiniJava::new(MjEnv::parse(&env).context("environment")?)),
    };
    Ok((loaded, read_input(&args.input)?))
}

pub fn status_code(status: FixStatus) -> u8 {
    match status {
        FixStatus::Fixed => EXIT_OK,
        FixStatus::NoFixWithinCap => EXIT_NO_FIX,
        FixStatus::TimeLimit => EXIT_TIME,
        FixStatus::MemoryLimit => EXIT_MEMORY,
        FixStatus::InvalidInput => EXIT_INPUT,
        FixStatus::InternalError => EXIT_INTERNAL,
    }
}

fn lex<F: Frontend>(lang: &F, text: &str) -> Result<Vec<Token>> {
    lang.lex(text).context("lexing the program")
}

fn fix_one<F: Frontend>(lang: &F, text: &str, args: &FixArgs) -> Result<u8> {
    let tokens = lex(lang, text)?;
    let limits = args.limits.limits();
    if let Some(path) = &args.dump_modgraph {
        let graph = ModGraph::build(&tokens, lang.grammar()).context("building the modification graph")?;
        write_output(Some(path), &graph.to_dot(lang.grammar()))?;
    }
    let result: FixResult = fix(lang, &tokens, &limits);
    if let Some(path) = &args.dump_reach {
        let cap = result.weight.unwrap_or_else(|| limits.cap_for(tokens.len()));
        write_output(Some(path), &format!("{}\n", reach_stats(lang, &tokens, cap)?))?;
    }
    let report = match args.format {
        Format::Json => format!("{}\n", result.to_json(args.timing)),
        Format::Human => diff::render(&tokens, &result),
    };
    write_output(None, &report)?;
    if let Some(m) = &result.message {
        log::warn!("{m}");
    }
    Ok(status_code(result.status))
}

fn reach_stats<F: Frontend>(lang: &F, tokens: &[Token], cap: u32) -> Result<String> {
    let g = lang.grammar();
    let graph = ModGraph::build(tokens, g).context("building the modification graph")?;
    let mut reach = ReachState::new(&graph, g, cap).map_err(|e| anyhow::anyhow!("{e}"))?;
    while reach.next_root_edge().is_some() {}
    Ok(serde_json::to_string(&reach.stats())?)
}

fn check_one<F: Frontend>(lang: &F, text: &str) -> Result<u8> {
    let tokens = lex(lang, text)?;
    let verdict = lang.check_compiles(&tokens);
    let report = json!({
        "ok": verdict.ok,
        "tokens": tokens.len(),
        "dead_at": verdict.dead_at,
        "diagnostic": verdict.diagnostic,
    });
    write_output(None, &format!("{report}\n"))?;
    Ok(if verdict.ok { EXIT_OK } else { EXIT_REJECTED })
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Fix(args) => {
            let (lang, text) = load(&args.lang)?;
            match lang {
                Loaded::Tiny(l) => fix_one(&l, &text, &args),
                Loaded::Mj(l) => fix_one(&l, &text, &args),
            }
        }
        Command::Check(args) => {
            let (lang, text) = load(&args.lang)?;
            match lang {
                Loaded::Tiny(l) => check_one(&l, &text),
                Loaded::Mj(l) => check_one(&l, &text),
            }
        }
        Command::Gen(args) => {
            if args.min_tokens > args.max_tokens {
                bail!("--min-tokens exceeds --max-tokens");
            }
            let params = GenParams::default().with_tokens(args.min_tokens..=args.max_tokens);
            let records = generate_corpus(args.seed, args.count, &params)?;
            write_output(args.output.as_deref(), &write_jsonl(&records))?;
            Ok(EXIT_OK)
        }
        Command::Mutate(args) => {
            if args.errors == 0 {
                bail!("--errors must be at least 1");
            }
            let records = read_jsonl(&read_input(&args.input)?)?;
            let mutants = mutate_corpus(&records, args.group, args.errors)?;
            write_output(args.output.as_deref(), &write_jsonl(&mutants))?;
            Ok(EXIT_OK)
        }
        Command::Oracle(args) => {
            let mut records = read_jsonl(&read_input(&args.input)?)?;
            let limits = OracleLimits {
                k_max: args.kmax,
                max_checks: args.max_checks,
            };
            for r in &mut records {
                let (lang, tokens) = r.load()?;
                r.oracle_weight = Some(match oracle_min_fix(&lang, &tokens, limits) {
                    Ok((Some(weight), _)) => OracleAnnotation::Resolved { weight },
                    Ok((None, _)) => OracleAnnotation::AboveLimit { k_max: args.kmax },
                    Err(OracleError::SearchCap { cap, .. }) => OracleAnnotation::SearchCap { cap },
                });
                log::info!("record {}: {:?}", r.seed, r.oracle_weight);
            }
            write_output(args.output.as_deref(), &write_jsonl(&records))?;
            Ok(EXIT_OK)
        }
        Command::Bench(args) => {
            let records = read_jsonl(&read_input(&args.input)?)?;
            let (summary, rows) = bench::run(&records, &args.limits.limits(), args.jobs.max(1))?;
            if let Some(path) = &args.csv {
                bench::write_csv(path, &rows)?;
            }
            write_output(None, &format!("{}\n", serde_json::to_string(&summary)?))?;
            Ok(EXIT_OK)
        }
        Command::Mis(args) => {
            let g = UndirectedGraph::new(args.vertices, args.edges)?;
            let (_, tokens) = encode_mis(&g);
            let report = json!({
                "env": mis_env().to_text(),
                "program": mis_source(&g),
                "tokens": tokens.len(),
                "statements": g.vertices() + g.vertices() * g.edges().len(),
            });
            write_output(None, &format!("{report}\n"))?;
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ORDFIX_LOG", "warn"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
