//! Corpus sweeps.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{Context, Result};
use serde::Serialize;

use ordfix_core::corpus::{CorpusRecord, Group, OracleAnnotation};
use ordfix_core::fixer::{fix, FixLimits};

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub seed: u64,
    pub group: Option<Group>,
    pub tokens: usize,
    pub errors: u32,
    pub status: String,
    pub weight: Option<u32>,
    pub oracle_weight: Option<u32>,
    pub cpu_ms: f64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct Percentiles {
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    pub max: f64,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub records: usize,
    pub statuses: BTreeMap<String, usize>,
    /// Fixed records whose weight is within the mutation count.
    pub within_expected: usize,
    pub oracle_resolved: usize,
    pub oracle_agree: usize,
    pub total_cpu_ms: f64,
    pub cpu_ms: Option<Percentiles>,
    pub rows: Vec<Row>,
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let k = ((sorted.len() as f64 - 1.0) * q).round() as usize;
    sorted[k]
}

fn run_one(r: &CorpusRecord, limits: &FixLimits) -> Result<Row> {
    let (lang, tokens) = r.load()?;
    let result = fix(&lang, &tokens, limits);
    Ok(Row {
        seed: r.seed,
        group: r.group,
        tokens: tokens.len(),
        errors: r.expected_max_weight,
        status: result.status.to_string(),
        weight: result.weight,
        oracle_weight: match r.oracle_weight {
            Some(OracleAnnotation::Resolved { weight }) => Some(weight),
            _ => None,
        },
        cpu_ms: result.timing.cpu_ms,
        elapsed_ms: result.timing.elapsed_ms,
    })
}

/// Fixes every record, `jobs` at a time. Rows keep corpus order.
pub fn run(records: &[CorpusRecord], limits: &FixLimits, jobs: usize) -> Result<(Summary, Vec<Row>)> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<Row>>>> = Mutex::new((0..records.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs.min(records.len()).max(1) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(r) = records.get(i) else { break };
                let row = run_one(r, limits);
                slots.lock().unwrap()[i] = Some(row);
            });
        }
    });
    let rows = slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every record ran"))
        .collect::<Result<Vec<Row>>>()?;

    let mut statuses = BTreeMap::new();
    for r in &rows {
        *statuses.entry(r.status.clone()).or_insert(0) += 1;
    }
    let mut cpu: Vec<f64> = rows.iter().map(|r| r.cpu_ms).collect();
    cpu.sort_by(f64::total_cmp);
    let summary = Summary {
        records: rows.len(),
        statuses,
        within_expected: rows
            .iter()
            .filter(|r| r.weight.is_some_and(|w| w <= r.errors))
            .count(),
        oracle_resolved: rows.iter().filter(|r| r.oracle_weight.is_some()).count(),
        oracle_agree: rows
            .iter()
            .filter(|r| r.oracle_weight.is_some() && r.oracle_weight == r.weight)
            .count(),
        total_cpu_ms: cpu.iter().sum(),
        cpu_ms: (!cpu.is_empty()).then(|| Percentiles {
            p50: percentile(&cpu, 0.5),
            p90: percentile(&cpu, 0.9),
            p99: percentile(&cpu, 0.99),
            max: *cpu.last().unwrap(),
        }),
        rows: rows.clone(),
    };
    Ok((summary, rows))
}

pub fn write_csv(path: &Path, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["seed", "group", "tokens", "errors", "status", "weight", "oracle_weight", "cpu_ms", "elapsed_ms"])?;
    let opt = |x: Option<u32>| x.map(|v| v.to_string()).unwrap_or_default();
    for r in rows {
        let group = r.group.map(|g| format!("{g:?}").to_lowercase()).unwrap_or_default();
        w.write_record([
            r.seed.to_string(),
            group,
            r.tokens.to_string(),
            r.errors.to_string(),
            r.status.clone(),
            opt(r.weight),
            opt(r.oracle_weight),
            format!("{:.3}", r.cpu_ms),
            format!("{:.3}", r.elapsed_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}
