//! Token-per-line unified diff of a repair.

use ordfix_core::fixer::{FixResult, FixStatus, Op};
use ordfix_core::Token;

pub fn render(original: &[Token], result: &FixResult) -> String {
    let mut out = String::new();
    if result.status != FixStatus::Fixed {
        out.push_str(&format!("status: {}\n", result.status));
        if let Some(m) = &result.message {
            out.push_str(&format!("message: {m}\n"));
        }
        return out;
    }
    let weight = result.weight.unwrap_or(0);
    out.push_str(&format!("status: fixed with {weight} edit{}\n", if weight == 1 { "" } else { "s" }));
    out.push_str("--- original\n+++ fixed\n");
    out.push_str(&format!("@@ -1,{} +1,{} @@\n", original.len(), result.fixed.len()));
    let mut edits = result.edits.ops().iter().peekable();
    for i in 0..=original.len() {
        let mut fate = None;
        while let Some(e) = edits.next_if(|e| e.pos == i) {
            match e.op {
                Op::Insert => out.push_str(&format!("+{}\n", e.token)),
                _ => fate = Some(e),
            }
        }
        let Some(t) = original.get(i) else { break };
        match fate {
            None => out.push_str(&format!(" {}\n", t.lexeme)),
            Some(e) if e.op == Op::Update => out.push_str(&format!("-{}\n+{}\n", t.lexeme, e.token)),
            Some(_) => out.push_str(&format!("-{}\n", t.lexeme)),
        }
    }
    out
}
