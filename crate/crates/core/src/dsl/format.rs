use super::ast::{Literal, Program, Rule, Statement};

fn join(lits: &[Literal], sep: &str) -> String {
    lits.iter().map(Literal::to_string).collect::<Vec<_>>().join(sep)
}

pub(crate) fn format_rule(r: &Rule) -> String {
    let mut out = String::new();
    if let Some(p) = r.probability {
        out.push_str(&format!("{p} :: "));
    }
    out.push_str(&join(&r.head, r.head_connective.separator()));
    if !r.body.is_empty() {
        out.push_str(" :- ");
        out.push_str(&join(&r.body, r.body_connective.separator()));
    }
    out.push('.');
    out
}

/// Text of one statement, exactly as written (no canonicalization).
pub fn format_statement(s: &Statement) -> String {
    match s {
        Statement::Rule(r) => format_rule(r),
        Statement::Constraint { body } => format!(":- {}.", join(body, ", ")),
        Statement::Choice { alternatives } => format!("1{{{}}}1.", join(alternatives, "; ")),
        Statement::DomainDecl { constants } => format!("#entity {}.", constants.join(", ")),
    }
}

/// Canonical text of a program: one statement per line, in canonical order.
pub fn format_program(p: &Program) -> String {
    let canonical = p.canonicalize();
    let mut out = String::new();
    for s in &canonical.statements {
        out.push_str(&format_statement(s));
        out.push('\n');
    }
    out
}
