//! Instantiation of first-order rules over a finite set of constants.
//!
//! Variables shared by head and body are universal: one ground rule per
//! binding. A variable that occurs only in the body is existential there and
//! becomes a disjunction over constants (or, inside a conjunctive body, one
//! rule per binding, which is the same thing split up). A variable that
//! occurs only in the head becomes an inclusive disjunctive head.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dsl::{format_statement, Connective, Literal, Program, Rule, Sign, Statement, Term};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_GROUND_STATEMENTS: usize = 10_000;

/// A variable-free atom, e.g. `has(rex,tail1)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GroundAtom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl GroundAtom {
    pub fn new(predicate: impl Into<String>, args: Vec<String>) -> GroundAtom {
        GroundAtom {
            predicate: predicate.into(),
            args,
        }
    }

    pub fn prop(name: impl Into<String>) -> GroundAtom {
        GroundAtom::new(name, Vec::new())
    }

    /// Returns `None` if the literal still contains variables.
    pub fn from_literal(lit: &Literal) -> Option<GroundAtom> {
        let args = lit
            .args
            .iter()
            .map(|t| match t {
                Term::Constant(c) => Some(c.clone()),
                Term::Variable(_) => None,
            })
            .collect::<Option<Vec<_>>>()?;
        Some(GroundAtom::new(lit.predicate.clone(), args))
    }

    /// `pred(c1,c2)`, or just `pred` for arity zero.
    pub fn canonical_name(&self) -> String {
        self.to_string()
    }

    pub fn to_literal(&self, sign: Sign) -> Literal {
        Literal::new(
            sign,
            self.predicate.clone(),
            self.args.iter().map(|a| Term::Constant(a.clone())).collect(),
        )
    }
}

impl fmt::Display for GroundAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            write!(f, "({})", self.args.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GroundOptions {
    pub max_statements: usize,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions {
            max_statements: DEFAULT_MAX_GROUND_STATEMENTS,
        }
    }
}

type Binding = BTreeMap<String, String>;

fn substitute(lit: &Literal, binding: &Binding) -> Literal {
    let args = lit
        .args
        .iter()
        .map(|t| match t {
            Term::Variable(v) => match binding.get(v) {
                Some(c) => Term::Constant(c.clone()),
                None => t.clone(),
            },
            Term::Constant(_) => t.clone(),
        })
        .collect();
    Literal::new(lit.sign, lit.predicate.clone(), args)
}

fn variables<'a>(lits: impl IntoIterator<Item = &'a Literal>) -> BTreeSet<String> {
    lits.into_iter()
        .flat_map(|l| l.variables().map(str::to_string))
        .collect()
}

/// All assignments of `vars` to constants, in lexicographic order.
fn bindings(vars: &BTreeSet<String>, constants: &[String]) -> Vec<Binding> {
    let vars: Vec<&String> = vars.iter().collect();
    let mut out = vec![Binding::new()];
    for v in vars {
        out = out
            .into_iter()
            .flat_map(|b| {
                constants.iter().map(move |c| {
                    let mut b = b.clone();
                    b.insert(v.clone(), c.clone());
                    b
                })
            })
            .collect();
    }
    out
}

/// Expands each literal over its variables in `existential`, keeping the
/// rest of `binding` fixed.
fn expand_disjunctively(lits: &[Literal], binding: &Binding, existential: &BTreeSet<String>, constants: &[String]) -> Vec<Literal> {
    let mut out = Vec::new();
    for lit in lits {
        let local: BTreeSet<String> = lit
            .variables()
            .filter(|v| existential.contains(*v))
            .map(str::to_string)
            .collect();
        for extra in bindings(&local, constants) {
            let mut b = binding.clone();
            b.extend(extra);
            out.push(substitute(lit, &b));
        }
    }
    out
}

struct Grounder {
    constants: Vec<String>,
    limit: usize,
    out: Vec<Statement>,
}

impl Grounder {
    fn emit(&mut self, s: Statement) -> Result<()> {
        if self.out.len() >= self.limit {
            return Err(Error::GroundingLimit { limit: self.limit });
        }
        self.out.push(s);
        Ok(())
    }

    fn check_domain(&self, vars: &BTreeSet<String>, s: &Statement) -> Result<()> {
        match vars.iter().next() {
            Some(v) if self.constants.is_empty() => Err(Error::EmptyDomain {
                variable: v.clone(),
                statement: format_statement(s),
            }),
            _ => Ok(()),
        }
    }

    fn statement(&mut self, s: &Statement) -> Result<()> {
        if s.is_ground() {
            return self.emit(s.clone());
        }
        let all_vars = variables(s.literals());
        self.check_domain(&all_vars, s)?;
        match s {
            Statement::Rule(r) => self.rule(r, s),
            Statement::Constraint { body } => {
                for b in bindings(&all_vars, &self.constants) {
                    let body = body.iter().map(|l| substitute(l, &b)).collect();
                    self.emit(Statement::Constraint { body })?;
                }
                Ok(())
            }
            Statement::Choice { alternatives } => {
                for b in bindings(&all_vars, &self.constants) {
                    let alternatives = alternatives.iter().map(|l| substitute(l, &b)).collect();
                    self.emit(Statement::Choice { alternatives })?;
                }
                Ok(())
            }
            Statement::DomainDecl { .. } => self.emit(s.clone()),
        }
    }

    fn rule(&mut self, r: &Rule, s: &Statement) -> Result<()> {
        let head_vars = variables(&r.head);
        let body_vars = variables(&r.body);

        // Variables of a fact are universal.
        if r.is_fact() {
            for b in bindings(&head_vars, &self.constants) {
                let head = r.head.iter().map(|l| substitute(l, &b)).collect();
                self.emit_rule(r, head, r.head_connective, Vec::new(), Connective::Single)?;
            }
            return Ok(());
        }

        let universal: BTreeSet<String> = head_vars.intersection(&body_vars).cloned().collect();
        let head_only: BTreeSet<String> = head_vars.difference(&body_vars).cloned().collect();
        let body_only: BTreeSet<String> = body_vars.difference(&head_vars).cloned().collect();

        if !head_only.is_empty() && r.head_connective == Connective::And {
            return Err(Error::Unsupported {
                statement: format_statement(s),
                reason: "head-only (existential) variables in a conjunctive head cannot be expressed as one gate".into(),
            });
        }

        for b in bindings(&universal, &self.constants) {
            let (head, head_connective) = if head_only.is_empty() {
                (r.head.iter().map(|l| substitute(l, &b)).collect(), r.head_connective)
            } else {
                let connective = match r.head_connective {
                    Connective::Xor => Connective::Xor,
                    _ => Connective::Or,
                };
                (expand_disjunctively(&r.head, &b, &head_only, &self.constants), connective)
            };

            if body_only.is_empty() {
                let body = r.body.iter().map(|l| substitute(l, &b)).collect();
                self.emit_rule(r, head, head_connective, body, r.body_connective)?;
            } else if r.body_connective == Connective::And {
                for extra in bindings(&body_only, &self.constants) {
                    let mut full = b.clone();
                    full.extend(extra);
                    let body = r.body.iter().map(|l| substitute(l, &full)).collect();
                    self.emit_rule(r, head.clone(), head_connective, body, Connective::And)?;
                }
            } else {
                let body = expand_disjunctively(&r.body, &b, &body_only, &self.constants);
                self.emit_rule(r, head, head_connective, body, Connective::Or)?;
            }
        }
        Ok(())
    }

    fn emit_rule(
        &mut self,
        original: &Rule,
        head: Vec<Literal>,
        head_connective: Connective,
        body: Vec<Literal>,
        body_connective: Connective,
    ) -> Result<()> {
        let mut rule = Rule::new(head, head_connective, body, body_connective);
        rule.probability = original.probability;
        self.emit(Statement::Rule(rule))
    }
}

/// Grounds `p` with the default statement limit.
pub fn ground_program(p: &Program) -> Result<Program> {
    ground_program_with(p, GroundOptions::default())
}

pub fn ground_program_with(p: &Program, options: GroundOptions) -> Result<Program> {
    let mut g = Grounder {
        constants: p.universe().into_iter().collect(),
        limit: options.max_statements,
        out: Vec::new(),
    };
    for s in &p.statements {
        g.statement(s)?;
    }
    Ok(Program::new(g.out).canonicalize())
}

/// Every ground atom mentioned by a ground program, sorted.
pub fn atoms_of(p: &Program) -> BTreeSet<GroundAtom> {
    p.statements
        .iter()
        .flat_map(|s| s.literals())
        .filter_map(GroundAtom::from_literal)
        .collect()
}
