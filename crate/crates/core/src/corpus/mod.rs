//! Test assets: random compilable programs, mutants, the independent-set
//! encoding, and an exhaustive minimal-fix oracle.
//!
//! Randomness comes from ChaCha8 seeded through `seed_from_u64`, so a corpus
//! is the same on every platform.

mod gen;
mod mis;
mod mutate;
mod oracle;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use gen::{generate_program, GenError, GenParams, Generated};
pub use mis::{encode_mis, max_independent_set, mis_env, mis_source, GraphError, UndirectedGraph, MIS_ENV};
pub use mutate::{mutate, Group, MutateError, Mutation, MutationOp, MutationSpec};
pub use oracle::{oracle_min_fix, OracleError, OracleLimits, OracleStats};

use crate::langs::minijava::{MiniJava, MjEnv};
use crate::langs::{EnvError, Frontend, LexError};
use crate::modgraph::Token;

pub(crate) fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// One corpus line.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub seed: u64,
    pub env: String,
    pub tokens: Vec<String>,
    #[serde(default)]
    pub mutations: Vec<Mutation>,
    /// Number of mutations applied; a fix never needs more edits.
    pub expected_max_weight: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<Group>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_weight: Option<OracleAnnotation>,
}

/// Ground truth attached by an oracle run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum OracleAnnotation {
    Resolved { weight: u32 },
    AboveLimit { k_max: u32 },
    SearchCap { cap: u64 },
}

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("record {seed}: {source}")]
    Env { seed: u64, source: EnvError },
    #[error("record {seed}: {source}")]
    Lex { seed: u64, source: LexError },
}

impl CorpusRecord {
    pub fn from_program(seed: u64, env: &MjEnv, tokens: &[Token]) -> Self {
        CorpusRecord {
            seed,
            env: env.to_text(),
            tokens: tokens.iter().map(|t| t.lexeme.clone()).collect(),
            mutations: Vec::new(),
            expected_max_weight: 0,
            group: None,
            oracle_weight: None,
        }
    }

    /// The record's language with its environment, and its tokens.
    pub fn load(&self) -> Result<(MiniJava, Vec<Token>), RecordError> {
        let env = MjEnv::parse(&self.env).map_err(|source| RecordError::Env { seed: self.seed, source })?;
        let lang = MiniJava::new(env);
        let tokens = lang
            .lex(&self.tokens.join(" "))
            .map_err(|source| RecordError::Lex { seed: self.seed, source })?;
        Ok((lang, tokens))
    }
}

pub fn write_jsonl(records: &[CorpusRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn read_jsonl(text: &str) -> Result<Vec<CorpusRecord>, RecordError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|source| RecordError::Json { line: i + 1, source }))
        .collect()
}

/// Seed of the mutation applied to the program drawn from `seed`.
pub fn mutation_seed(seed: u64, group: Group, count: u32) -> u64 {
    let g = match group {
        Group::Syn => 1,
        Group::Sem => 2,
        Group::Mix => 3,
    };
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (g << 8 | count as u64)
}

/// Generated programs for seeds `first..first + count`.
pub fn generate_corpus(first: u64, count: u64, params: &GenParams) -> Result<Vec<CorpusRecord>, GenError> {
    (first..first + count)
        .map(|seed| {
            let p = GenParams {
                seed,
                ..params.clone()
            };
            let g = generate_program(&p)?;
            Ok(CorpusRecord::from_program(seed, &g.env, &g.tokens))
        })
        .collect()
}

/// Mutates every record with `count` operators from `group`.
pub fn mutate_corpus(records: &[CorpusRecord], group: Group, count: u32) -> Result<Vec<CorpusRecord>, CorpusError> {
    records
        .iter()
        .map(|r| {
            let (lang, tokens) = r.load()?;
            let spec = MutationSpec::group(group, count, mutation_seed(r.seed, group, count));
            let (mutant, log) = mutate(&lang, &tokens, &spec)?;
            let mut mutations = r.mutations.clone();
            mutations.extend(log);
            Ok(CorpusRecord {
                seed: r.seed,
                env: r.env.clone(),
                tokens: mutant.iter().map(|t| t.lexeme.clone()).collect(),
                mutations,
                expected_max_weight: r.expected_max_weight + count,
                group: Some(group),
                oracle_weight: None,
            })
        })
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error(transparent)]
    Record(#[from] RecordError),
    #[error(transparent)]
    Mutate(#[from] MutateError),
    #[error(transparent)]
    Gen(#[from] GenError),
}
