mod common;

use std::collections::BTreeMap;

use ordfix_core::grammar::{Grammar, GrammarError, SymbolId, TerminalClass};
use proptest::prelude::*;

use common::{all_strings, recognizes};

fn productions_by_name(g: &Grammar) -> BTreeMap<(String, Vec<String>), usize> {
    let mut m = BTreeMap::new();
    for p in g.productions() {
        let key = (
            g.symbol(p.lhs).name.clone(),
            p.rhs.iter().map(|s| g.symbol(*s).name.clone()).collect(),
        );
        *m.entry(key).or_insert(0) += 1;
    }
    m
}

fn terminals(g: &Grammar) -> Vec<SymbolId> {
    g.terminals().map(|s| s.id).collect()
}

/// Both grammars accept the same strings up to `max_len` symbols.
fn same_language(source: &Grammar, normal: &Grammar, max_len: usize) {
    for w in all_strings(&terminals(source), max_len) {
        let expected = recognizes(source, source.productions(), &w);
        assert_eq!(normal.derives(&w), expected, "disagree on {w:?}");
        assert_eq!(recognizes(normal, normal.productions(), &w), expected);
    }
}

#[test]
fn assignment_production_has_four_symbols() {
    let g = Grammar::parse("start S;\nterminal ID : identifier;\nS -> ID '=' ID ';'\n").unwrap();
    assert_eq!(g.productions().len(), 1);
    assert_eq!(g.productions()[0].rhs.len(), 4);
    let id = g.lookup("ID").unwrap();
    assert_eq!(g.symbol(id).class(), Some(TerminalClass::Identifier));
    assert_eq!(g.fixed_terminal("=").map(|s| g.symbol(s).class()), Some(Some(TerminalClass::Fixed)));
}

#[test]
fn epsilon_production_is_empty() {
    let g = Grammar::parse("start S;\nS -> 'a' B\nB -> .\n").unwrap();
    let b = g.lookup("B").unwrap();
    let p = g.by_lhs(b);
    assert_eq!(p.len(), 1);
    assert!(g.production(p[0]).rhs.is_empty());
}

#[test]
fn undeclared_symbol_is_an_error() {
    let err = Grammar::parse("start S;\nS -> 'a' Q\n").unwrap_err();
    assert!(matches!(err, GrammarError::UndefinedSymbol { ref name, .. } if name == "Q"), "{err:?}");
}

#[test]
fn document_errors() {
    assert_eq!(Grammar::parse("S -> 'a'\n").unwrap_err(), GrammarError::NoStart);
    assert!(matches!(
        Grammar::parse("start S;\nS -> 'a'\nS -> 'a'\n").unwrap_err(),
        GrammarError::DuplicateProduction { line: 3 }
    ));
    assert!(matches!(
        Grammar::parse("start S;\nS -> 'a' @\n").unwrap_err(),
        GrammarError::Syntax { line: 2, .. }
    ));
}

#[test]
fn four_symbol_rule_binarizes_into_three() {
    let g = Grammar::parse("start S;\nS -> 'a' 'b' 'c' 'd'\n").unwrap();
    let n = g.normalize();
    assert_eq!(n.productions().len(), 3);
    let shapes: Vec<Vec<String>> = n
        .productions()
        .iter()
        .map(|p| p.rhs.iter().map(|s| n.symbol(*s).name.clone()).collect())
        .collect();
    assert_eq!(shapes[0][0], "'a'");
    assert_eq!(shapes[1][0], "'b'");
    assert_eq!(shapes[2], vec!["'c'", "'d'"]);
    // each step hands the rest of the rule to the next fresh symbol
    assert_eq!(n.productions()[0].rhs[1], n.productions()[1].lhs);
    assert_eq!(n.productions()[1].rhs[1], n.productions()[2].lhs);
    same_language(&g, &n, 5);
}

#[test]
fn epsilon_rule_is_unchanged() {
    let g = Grammar::parse("start A;\nA -> .\n").unwrap();
    let n = g.normalize();
    assert_eq!(productions_by_name(&g), productions_by_name(&n));
}

#[test]
fn assignment_rule_binarizes_into_three() {
    let g = Grammar::parse("start S;\nterminal ID : identifier;\nS -> ID '=' ID ';'\n").unwrap();
    let n = g.normalize();
    assert_eq!(n.productions().len(), 3);
    assert!(n.is_normalized());
    same_language(&g, &n, 6);
}

#[test]
fn origins_point_back_to_the_source_rule() {
    let g = Grammar::parse("start S;\nS -> 'a' 'b' 'c' 'd'\nS -> 'e'\n").unwrap();
    let n = g.normalize();
    for p in n.productions() {
        let src = n.source(p.origin.production);
        assert_eq!(src.rhs[p.origin.position], p.rhs[0]);
        assert_eq!(n.source_len(p), src.rhs.len());
    }
}

/// A random grammar over nonterminals N0.. and terminals 'a'.. as a document.
fn grammar_doc() -> impl Strategy<Value = String> {
    (1usize..=3, 2usize..=4).prop_flat_map(|(nts, ts)| {
        let symbol = prop_oneof![
            (0..nts).prop_map(|k| format!("N{k}")),
            (0..ts).prop_map(|k| format!("'{}'", (b'a' + k as u8) as char)),
        ];
        let alt = prop::collection::vec(symbol, 0..=4);
        let alts = prop::collection::vec(alt, 1..=3);
        prop::collection::vec(alts, nts).prop_map(|rules| {
            let mut doc = String::from("start N0;\n");
            for (k, alts) in rules.into_iter().enumerate() {
                let mut seen = Vec::new();
                for rhs in alts {
                    if seen.contains(&rhs) {
                        continue;
                    }
                    let body = if rhs.is_empty() { ".".to_string() } else { rhs.join(" ") };
                    doc.push_str(&format!("N{k} -> {body}\n"));
                    seen.push(rhs);
                }
            }
            doc
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normalization_preserves_the_language(doc in grammar_doc()) {
        let g = Grammar::parse(&doc).unwrap();
        let n = g.normalize();
        prop_assert!(n.is_normalized());
        let ts = terminals(&g);
        prop_assume!(ts.len() <= 5);
        for w in all_strings(&ts, 6) {
            let expected = recognizes(&g, g.productions(), &w);
            prop_assert_eq!(n.derives(&w), expected, "{:?} on\n{}", w, doc);
        }
    }

    #[test]
    fn normalization_is_idempotent(doc in grammar_doc()) {
        let n = Grammar::parse(&doc).unwrap().normalize();
        let nn = n.normalize();
        prop_assert_eq!(productions_by_name(&n), productions_by_name(&nn));
    }

    #[test]
    fn fresh_symbols_have_one_rule(doc in grammar_doc()) {
        let n = Grammar::parse(&doc).unwrap().normalize();
        for s in n.symbols().iter().filter(|s| s.fresh) {
            prop_assert_eq!(n.by_lhs(s.id).len(), 1, "{}", s.name);
        }
    }
}
