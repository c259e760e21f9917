use std::collections::BTreeSet;

use ordfix_core::corpus::*;
use ordfix_core::fixer::{fix, FixLimits};
use ordfix_core::langs::minijava::MiniJava;
use ordfix_core::langs::tiny_assign::{TinyAssign, TinyEnv};
use ordfix_core::langs::{spell, Frontend};
use ordfix_core::Token;

fn tiny(env: &str) -> TinyAssign {
    TinyAssign::new(TinyEnv::parse(env).unwrap())
}

const XYZ: &str = "var x : A;\nvar y : A;\nvar z : B;\n";

/// Plain dynamic-programming token edit distance.
fn edit_distance(a: &[Token], b: &[Token]) -> usize {
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for i in 1..=a.len() {
        let mut diag = row[0];
        row[0] = i;
        for j in 1..=b.len() {
            let up = row[j];
            let same = a[i - 1].lexeme == b[j - 1].lexeme;
            row[j] = (up + 1).min(row[j - 1] + 1).min(diag + usize::from(!same));
            diag = up;
        }
    }
    row[b.len()]
}

#[test]
fn generated_programs_compile() {
    for seed in 0..1000 {
        let g = generate_program(&GenParams::with_seed(seed)).unwrap();
        let lang = MiniJava::new(g.env.clone());
        let verdict = lang.check_compiles(&g.tokens);
        assert!(verdict.ok, "seed {seed}: {verdict}\n{}", spell(&g.tokens));
        for c in g.env.classes.classes() {
            let mut at = c.name.clone();
            let mut steps = 0;
            while let Some(s) = g.env.classes.class(&at).unwrap().superclass.clone() {
                at = s;
                steps += 1;
                assert!(steps <= g.env.classes.classes().len(), "inheritance cycle through {}", c.name);
            }
            assert_eq!(&*at, "Object");
        }
    }
}

#[test]
fn generated_length_is_near_the_reported_average() {
    let total: usize = (0..1000)
        .map(|seed| generate_program(&GenParams::with_seed(seed)).unwrap().tokens.len())
        .sum();
    let mean = total as f64 / 1000.0;
    assert!((30.0..=60.0).contains(&mean), "mean token count {mean}");
}

#[test]
fn generation_is_deterministic() {
    for seed in [0, 7, 12345] {
        let a = generate_corpus(seed, 3, &GenParams::default()).unwrap();
        let b = generate_corpus(seed, 3, &GenParams::default()).unwrap();
        assert_eq!(write_jsonl(&a), write_jsonl(&b));
    }
    let a = generate_program(&GenParams::with_seed(1)).unwrap();
    let b = generate_program(&GenParams::with_seed(2)).unwrap();
    assert_ne!(spell(&a.tokens), spell(&b.tokens));
}

#[test]
fn generation_respects_the_token_range() {
    for seed in 0..100 {
        let g = generate_program(&GenParams::with_seed(seed).with_tokens(10..=25)).unwrap();
        assert!(g.tokens.len() <= 25, "seed {seed}: {} tokens", g.tokens.len());
    }
}

#[test]
fn bad_params_are_rejected() {
    let p = GenParams {
        classes: 3..=2,
        ..GenParams::default()
    };
    assert!(matches!(generate_program(&p), Err(GenError::InvalidParams(_))));
    let p = GenParams {
        classes: 0..=0,
        ..GenParams::default()
    };
    assert!(matches!(generate_program(&p), Err(GenError::InvalidParams(_))));
}

#[test]
fn deleting_a_semicolon_gives_the_running_example() {
    let l = tiny(XYZ);
    let toks = l.lex("x = z ;").unwrap();
    let outcomes: BTreeSet<String> = (0..64)
        .map(|seed| {
            let spec = MutationSpec::new(vec![MutationOp::DeleteFixed], 1, seed);
            let (out, log) = mutate(&l, &toks, &spec).unwrap();
            assert_eq!(log.len(), 1);
            assert_eq!(log[0].op.id(), "M.2");
            spell(&out)
        })
        .collect();
    assert_eq!(outcomes, BTreeSet::from(["x = z".to_string(), "x z ;".to_string()]));
}

#[test]
fn replacing_an_identifier_gives_the_type_error() {
    let l = tiny(XYZ);
    let toks = l.lex("x = y ;").unwrap();
    let outcomes: BTreeSet<String> = (0..64)
        .map(|seed| {
            let spec = MutationSpec::new(vec![MutationOp::ReplaceIdent], 1, seed);
            spell(&mutate(&l, &toks, &spec).unwrap().0)
        })
        .collect();
    assert!(outcomes.contains("x = z ;"));
    assert!(!outcomes.contains("x = y ;"), "an identifier was replaced by itself");
    let mutant = l.lex("x = z ;").unwrap();
    assert!(!l.check_compiles(&mutant).ok);
}

#[test]
fn mutants_stay_within_their_edit_count() {
    let records = generate_corpus(100, 20, &GenParams::default()).unwrap();
    for group in [Group::Syn, Group::Sem, Group::Mix] {
        for count in 1..=3 {
            let mutants = mutate_corpus(&records, group, count).unwrap();
            for (orig, m) in records.iter().zip(&mutants) {
                let (_, a) = orig.load().unwrap();
                let (_, b) = m.load().unwrap();
                assert!(edit_distance(&a, &b) <= count as usize);
                assert_eq!(m.mutations.len(), count as usize);
                assert_eq!(m.expected_max_weight, count);
                let allowed = group.ops();
                assert!(m.mutations.iter().all(|x| allowed.contains(&x.op)));
            }
        }
    }
}

#[test]
fn mutation_is_deterministic_and_validates_its_spec() {
    let l = tiny(XYZ);
    let toks = l.lex("x = y ;").unwrap();
    let spec = MutationSpec::group(Group::Mix, 3, 9);
    assert_eq!(mutate(&l, &toks, &spec).unwrap(), mutate(&l, &toks, &spec).unwrap());
    assert_eq!(
        mutate(&l, &toks, &MutationSpec::new(vec![], 1, 0)).unwrap_err(),
        MutateError::NoOperators
    );
    assert_eq!(
        mutate(&l, &toks, &MutationSpec::group(Group::Syn, 0, 0)).unwrap_err(),
        MutateError::ZeroCount
    );
    let empty: Vec<Token> = Vec::new();
    assert!(matches!(
        mutate(&l, &empty, &MutationSpec::new(vec![MutationOp::DeleteIdent], 1, 0)),
        Err(MutateError::Inapplicable(_))
    ));
}

#[test]
fn operator_ids_round_trip() {
    for op in MutationOp::ALL {
        assert_eq!(op.id().parse::<MutationOp>().unwrap(), op);
        let json = serde_json::to_string(&op).unwrap();
        assert_eq!(json, format!("\"{}\"", op.id()));
    }
    assert!("M.9".parse::<MutationOp>().is_err());
}

#[test]
fn mis_encoding_shape() {
    let g = UndirectedGraph::new(3, vec![(0, 1), (1, 2)]).unwrap();
    let (_, tokens) = encode_mis(&g);
    let statements = tokens.iter().filter(|t| t.lexeme == ";").count();
    assert_eq!(statements, 3 + 2 * 3);
    let src = mis_source(&g);
    let lines: Vec<&str> = src.lines().collect();
    assert_eq!(lines[0], "InMIS v1;");
    assert_eq!(lines[3..6], ["v1.addEdge(v2);"; 3]);
    assert_eq!(lines[6..9], ["v2.addEdge(v3);"; 3]);
}

#[test]
fn graph_validation() {
    assert_eq!(UndirectedGraph::new(2, vec![(1, 1)]).unwrap_err(), GraphError::SelfLoop(1));
    assert_eq!(UndirectedGraph::new(2, vec![(0, 2)]).unwrap_err(), GraphError::OutOfRange(0, 2));
    assert_eq!(
        UndirectedGraph::new(2, vec![(0, 1), (1, 0)]).unwrap_err(),
        GraphError::Duplicate(1, 0)
    );
    assert_eq!(UndirectedGraph::all(4).count(), 64);
}

#[test]
fn independent_sets_of_small_graphs() {
    let g = |n, e: &[(usize, usize)]| UndirectedGraph::new(n, e.to_vec()).unwrap();
    assert_eq!(max_independent_set(&g(3, &[])), 3);
    assert_eq!(max_independent_set(&g(3, &[(0, 1), (1, 2), (0, 2)])), 1);
    assert_eq!(max_independent_set(&g(3, &[(0, 1), (1, 2)])), 2);
    assert_eq!(max_independent_set(&g(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])), 2);
}

fn mis_oracle(g: &UndirectedGraph, k_max: u32) -> Option<u32> {
    let (env, tokens) = encode_mis(g);
    oracle_min_fix(&MiniJava::new(env), &tokens, OracleLimits::new(k_max)).unwrap().0
}

#[test]
fn edgeless_encoding_compiles() {
    let g = UndirectedGraph::new(3, vec![]).unwrap();
    let (env, tokens) = encode_mis(&g);
    assert!(MiniJava::new(env).check_compiles(&tokens).ok);
    assert_eq!(mis_oracle(&g, 0), Some(0));
}

#[test]
fn triangle_needs_two_retypes() {
    let g = UndirectedGraph::new(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap();
    assert_eq!(max_independent_set(&g), 1);
    assert_eq!(mis_oracle(&g, 2), Some(2));
}

#[test]
fn path_needs_one_retype() {
    let g = UndirectedGraph::new(3, vec![(0, 1), (1, 2)]).unwrap();
    assert_eq!(max_independent_set(&g), 2);
    assert_eq!(mis_oracle(&g, 2), Some(1));
    let (env, tokens) = encode_mis(&g);
    let r = fix(&MiniJava::new(env), &tokens, &FixLimits::default());
    assert_eq!(r.weight, Some(1));
    assert_eq!(r.fixed[3].lexeme, "OutMIS", "{}", spell(&r.fixed));
}

#[test]
fn oracle_on_the_running_example() {
    let l = tiny(XYZ);
    let broken = l.lex("x = z").unwrap();
    assert_eq!(oracle_min_fix(&l, &broken, OracleLimits::new(3)).unwrap().0, Some(2));
    assert_eq!(oracle_min_fix(&l, &broken, OracleLimits::new(1)).unwrap().0, None);
    let ok = l.lex("x = y ;").unwrap();
    assert_eq!(oracle_min_fix(&l, &ok, OracleLimits::new(2)).unwrap().0, Some(0));
}

#[test]
fn oracle_and_fixer_agree_without_a_same_typed_variable() {
    let l = tiny("var x : A;\nvar z : B;\n");
    let toks = l.lex("x = z ;").unwrap();
    let oracle = oracle_min_fix(&l, &toks, OracleLimits::new(1)).unwrap().0;
    assert_eq!(oracle, Some(1));
    assert_eq!(fix(&l, &toks, &FixLimits::default()).weight, oracle);
}

#[test]
fn oracle_reports_its_search_cap() {
    let l = tiny(XYZ);
    let broken = l.lex("x = z").unwrap();
    let limits = OracleLimits {
        k_max: 2,
        max_checks: 3,
    };
    assert!(matches!(
        oracle_min_fix(&l, &broken, limits),
        Err(OracleError::SearchCap { cap: 3, .. })
    ));
}

#[test]
fn jsonl_round_trip() {
    let records = generate_corpus(0, 4, &GenParams::default()).unwrap();
    let mut mutants = mutate_corpus(&records, Group::Mix, 2).unwrap();
    mutants[0].oracle_weight = Some(OracleAnnotation::Resolved { weight: 1 });
    let text = write_jsonl(&mutants);
    assert_eq!(text.lines().count(), 4);
    assert_eq!(read_jsonl(&text).unwrap(), mutants);
    let v: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    for key in ["seed", "env", "tokens", "mutations", "expected_max_weight"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!(v["mutations"][0]["op"].as_str().unwrap().starts_with("M."));
    assert!(matches!(read_jsonl("{\"seed\": 1}\n"), Err(RecordError::Json { line: 1, .. })));
}
