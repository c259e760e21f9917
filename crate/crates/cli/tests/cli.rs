use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;
use tempfile::TempDir;

const TINY_ENV: &str = "var x : A;\nvar y : A;\nvar z : B;\n";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ordfix"));
    c.env_remove("ORDFIX_LOG");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).stdin(Stdio::null()).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&o.stdout),
            String::from_utf8_lossy(&o.stderr)
        )
    })
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn schema(name: &str) -> jsonschema::JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas").join(name);
    let text = std::fs::read_to_string(&path).unwrap();
    let value: Value = serde_json::from_str(&text).unwrap();
    jsonschema::JSONSchema::compile(&value).expect("schema compiles")
}

fn assert_valid(schema_name: &str, instance: &Value) {
    let compiled = schema(schema_name);
    let msgs: Vec<String> = match compiled.validate(instance) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{} at {}", e, e.instance_path)).collect(),
    };
    panic!("{schema_name}: {msgs:?}\n{instance}");
}

fn jsonl(path: &Path) -> Vec<Value> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn fix_running_example() {
    let dir = TempDir::new().unwrap();
    let env = write(&dir, "env.txt", TINY_ENV);
    let prog = write(&dir, "prog.txt", "x = z");
    let o = run(&["fix", "--lang", "tiny-assign", "--env", s(&env), s(&prog)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["status"], "fixed");
    assert_eq!(v["weight"], 2);
    assert_eq!(v["fixed"], serde_json::json!(["x", "=", "y", ";"]));
    assert_eq!(v["edits"].as_array().unwrap().len(), 2);
    assert!(v.get("timing").is_none());
    assert_valid("fix-result.v1.json", &v);
}

#[test]
fn fix_valid_program_needs_no_edits() {
    let dir = TempDir::new().unwrap();
    let env = write(&dir, "env.txt", TINY_ENV);
    let prog = write(&dir, "prog.txt", "x = y ;");
    let o = run(&["fix", "--lang", "tiny-assign", "--env", s(&env), "--timing", s(&prog)]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["weight"], 0);
    assert_eq!(v["edits"], serde_json::json!([]));
    assert!(v["timing"]["cpu_ms"].is_number());
    assert_valid("fix-result.v1.json", &v);
}

#[test]
fn fix_reads_stdin() {
    let dir = TempDir::new().unwrap();
    let env = write(&dir, "env.txt", TINY_ENV);
    let mut child = bin()
        .args(["fix", "--lang", "tiny-assign", "--env", s(&env), "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    {
        use std::io::Write;
        child.stdin.take().unwrap().write_all(b"x = z").unwrap();
    }
    let o = child.wait_with_output().unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["weight"], 2);
}

#[test]
fn fix_below_minimum_cap_reports_no_fix() {
    let dir = TempDir::new().unwrap();
    let env = write(&dir, "env.txt", TINY_ENV);
    let prog = write(&dir, "prog.txt", "x = z");
    let o = run(&["fix", "--lang", "tiny-assign", "--env", s(&env), "--max-edits", "1", s(&prog)]);
    assert_eq!(code(&o), 2);
    let v = stdout_json(&o);
    assert_eq!(v["status"], "no-fix-within-cap");
    assert!(v["weight"].is_null());
    assert_valid("fix-result.v1.json", &v);
}

#[test]
fn fix_human_format_is_a_diff() {
    let dir = TempDir::new().unwrap();
    let env = write(&dir, "env.txt", TINY_ENV);
    let prog = write(&dir, "prog.txt", "x = z");
    let o = run(&["fix", "--lang", "tiny-assign", "--env", s(&env), "--format", "human", s(&prog)]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("-z"), "{text}");
    assert!(text.contains("+y"), "{text}");
    assert!(text.contains("+;"), "{text}");
}

#[test]
fn fix_dumps() {
    let dir = TempDir::new().unwrap();
    let env = write(&dir, "env.txt", TINY_ENV);
    let prog = write(&dir, "prog.txt", "x = z");
    let dot = dir.path().join("g.dot");
    let reach = dir.path().join("reach.json");
    let o = run(&[
        "fix",
        "--lang",
        "tiny-assign",
        "--env",
        s(&env),
        "--dump-modgraph",
        s(&dot),
        "--dump-reach",
        s(&reach),
        s(&prog),
    ]);
    assert_eq!(code(&o), 0);
    let dot = std::fs::read_to_string(dot).unwrap();
    assert!(dot.starts_with("digraph"));
    let stats: Value = serde_json::from_str(&std::fs::read_to_string(reach).unwrap()).unwrap();
    assert!(stats["edges"].as_u64().unwrap() > 0);
    assert!(stats["by_weight_symbol"].as_array().unwrap().iter().all(|r| r["weight"].as_u64().unwrap() <= 2));
}

#[test]
fn input_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let env = write(&dir, "env.txt", "var x A\n");
    let prog = write(&dir, "prog.txt", "x = z");
    assert_eq!(code(&run(&["fix", "--lang", "tiny-assign", "--env", s(&env), s(&prog)])), 1);
    let missing = dir.path().join("missing.txt");
    assert_eq!(code(&run(&["fix", "--lang", "tiny-assign", s(&missing)])), 1);
    let bad = write(&dir, "bad.txt", "x = $");
    assert_eq!(code(&run(&["fix", "--lang", "tiny-assign", s(&bad)])), 1);
    assert_eq!(code(&run(&["fix", "--lang", "cobol", s(&prog)])), 1);
}

#[test]
fn check_accepts_and_rejects() {
    let dir = TempDir::new().unwrap();
    let env = write(&dir, "env.txt", TINY_ENV);
    let good = write(&dir, "good.txt", "x = y ;");
    let bad = write(&dir, "bad.txt", "x = z ;");
    let o = run(&["check", "--lang", "tiny-assign", "--env", s(&env), s(&good)]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["ok"], true);
    assert_valid("check-result.v1.json", &v);
    let o = run(&["check", "--lang", "tiny-assign", "--env", s(&env), s(&bad)]);
    assert_eq!(code(&o), 6);
    let v = stdout_json(&o);
    assert_eq!(v["ok"], false);
    assert!(v["diagnostic"].is_string());
    assert_valid("check-result.v1.json", &v);
}

#[test]
fn gen_is_deterministic_and_valid() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    assert_eq!(code(&run(&["gen", "--seed", "7", "--count", "10", "-o", s(&a)])), 0);
    assert_eq!(code(&run(&["gen", "--seed", "7", "--count", "10", "-o", s(&b)])), 0);
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!ta.is_empty());
    assert_eq!(ta, tb);
    let records = jsonl(&a);
    assert_eq!(records.len(), 10);
    for r in &records {
        assert_valid("corpus-record.v1.json", r);
        assert_eq!(r["expected_max_weight"], 0);
    }
    let o = run(&["gen", "--seed", "7", "--count", "10"]);
    assert_eq!(o.stdout, ta);
}

#[test]
fn mutate_syn_uses_only_syntactic_operators() {
    let dir = TempDir::new().unwrap();
    let corpus = dir.path().join("c.jsonl");
    let mutants = dir.path().join("m.jsonl");
    assert_eq!(code(&run(&["gen", "--seed", "100", "--count", "20", "-o", s(&corpus)])), 0);
    let o = run(&["mutate", "--group", "syn", "--errors", "3", s(&corpus), "-o", s(&mutants)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let records = jsonl(&mutants);
    assert_eq!(records.len(), 20);
    for r in &records {
        assert_valid("corpus-record.v1.json", r);
        assert_eq!(r["expected_max_weight"], 3);
        assert_eq!(r["group"], "syn");
        let ops = r["mutations"].as_array().unwrap();
        assert_eq!(ops.len(), 3);
        for m in ops {
            let op = m["op"].as_str().unwrap();
            assert!(["M.1", "M.2", "M.3", "M.4"].contains(&op), "{op}");
        }
    }
    assert_eq!(code(&run(&["mutate", "--group", "syn", "--errors", "0", s(&corpus)])), 1);
    assert_eq!(code(&run(&["mutate", "--group", "bogus", "--errors", "1", s(&corpus)])), 1);
}

#[test]
fn oracle_then_bench_agree() {
    let dir = TempDir::new().unwrap();
    let corpus = dir.path().join("c.jsonl");
    let mutants = dir.path().join("m.jsonl");
    let annotated = dir.path().join("o.jsonl");
    let csv = dir.path().join("rows.csv");
    let o = run(&["gen", "--seed", "500", "--count", "8", "--max-tokens", "35", "-o", s(&corpus)]);
    assert_eq!(code(&o), 0);
    assert_eq!(code(&run(&["mutate", "--group", "mix", "--errors", "1", s(&corpus), "-o", s(&mutants)])), 0);
    let o = run(&["oracle", "--kmax", "2", s(&mutants), "-o", s(&annotated)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for r in jsonl(&annotated) {
        assert_valid("corpus-record.v1.json", &r);
        assert!(r["oracle_weight"]["status"].is_string());
    }
    let o = run(&["bench", s(&annotated), "--csv", s(&csv)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_valid("bench-summary.v1.json", &v);
    assert_eq!(v["records"], 8);
    assert_eq!(v["statuses"]["fixed"], 8);
    assert_eq!(v["within_expected"], 8);
    assert!(v["oracle_resolved"].as_u64().unwrap() > 0);
    assert_eq!(v["oracle_agree"], v["oracle_resolved"]);
    let rows = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 9);
    assert!(rows.starts_with("seed,group,tokens,errors,status,weight,oracle_weight,cpu_ms,elapsed_ms"));
}

#[test]
fn bench_empty_corpus() {
    let dir = TempDir::new().unwrap();
    let empty = write(&dir, "empty.jsonl", "");
    let o = run(&["bench", s(&empty)]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_valid("bench-summary.v1.json", &v);
    assert_eq!(v["records"], 0);
    assert!(v["cpu_ms"].is_null());
    assert_eq!(v["rows"], serde_json::json!([]));
}

#[test]
fn bench_cpu_time_is_per_job() {
    let dir = TempDir::new().unwrap();
    let corpus = dir.path().join("c.jsonl");
    let mutants = dir.path().join("m.jsonl");
    assert_eq!(code(&run(&["gen", "--seed", "900", "--count", "12", "--max-tokens", "40", "-o", s(&corpus)])), 0);
    assert_eq!(code(&run(&["mutate", "--group", "mix", "--errors", "2", s(&corpus), "-o", s(&mutants)])), 0);
    let serial = stdout_json(&run(&["bench", s(&mutants), "--jobs", "1"]));
    let parallel = stdout_json(&run(&["bench", s(&mutants), "--jobs", "4"]));
    let weights = |v: &Value| -> Vec<Value> { v["rows"].as_array().unwrap().iter().map(|r| r["weight"].clone()).collect() };
    assert_eq!(weights(&serial), weights(&parallel));
    let total = |v: &Value| v["total_cpu_ms"].as_f64().unwrap();
    let wall = |v: &Value| -> f64 { v["rows"].as_array().unwrap().iter().map(|r| r["elapsed_ms"].as_f64().unwrap()).sum() };
    let (ts, tp) = (total(&serial), total(&parallel));
    // CPU accounting must not absorb time spent waiting on other jobs.
    assert!(tp <= 3.0 * ts + 50.0, "serial {ts} ms, parallel {tp} ms");
    assert!(ts <= wall(&serial) + 50.0);
}

#[test]
fn mis_encoding() {
    let o = run(&["mis", "--vertices", "3", "--edge", "0-1", "--edge", "1-2"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_valid("mis.v1.json", &v);
    assert_eq!(v["statements"], 3 + 2 * 3);
    let program = v["program"].as_str().unwrap();
    assert_eq!(program.lines().filter(|l| l.trim() == "v1.addEdge(v2);").count(), 3);
    assert_eq!(code(&run(&["mis", "--vertices", "2", "--edge", "0-0"])), 1);
    assert_eq!(code(&run(&["mis", "--vertices", "2", "--edge", "0-5"])), 1);
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&[])), 1);
}
