use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A predicate argument. The case of the first character decides the kind:
/// lowercase-initial names are constants, uppercase- or underscore-initial
/// names are variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "name", rename_all = "lowercase")]
pub enum Term {
    Constant(String),
    Variable(String),
}

impl Term {
    /// Classifies `name` by its initial character. Returns `None` for an
    /// empty name.
    pub fn from_name(name: &str) -> Option<Term> {
        let first = name.chars().next()?;
        if first.is_ascii_lowercase() {
            Some(Term::Constant(name.to_string()))
        } else {
            Some(Term::Variable(name.to_string()))
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Term::Constant(n) | Term::Variable(n) => n,
        }
    }

    pub fn is_variable(&self) -> bool {
        matches!(self, Term::Variable(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
        }
    }
}

/// A possibly strongly-negated atom, `-p(a, X)`.
///
/// Ordering is atom-major: predicate, then arguments, then sign with the
/// positive literal first. Canonical text relies on this order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub sign: Sign,
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Literal {
    pub fn new(sign: Sign, predicate: impl Into<String>, args: Vec<Term>) -> Literal {
        Literal {
            sign,
            predicate: predicate.into(),
            args,
        }
    }

    pub fn pos(predicate: impl Into<String>) -> Literal {
        Literal::new(Sign::Positive, predicate, Vec::new())
    }

    pub fn neg(predicate: impl Into<String>) -> Literal {
        Literal::new(Sign::Negative, predicate, Vec::new())
    }

    /// Syntactic strong negation; applying it twice gives back `self`.
    pub fn negated(&self) -> Literal {
        Literal {
            sign: self.sign.flip(),
            ..self.clone()
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_variable())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Variable(v) => Some(v.as_str()),
            Term::Constant(_) => None,
        })
    }

    pub fn constants(&self) -> impl Iterator<Item = &str> {
        self.args.iter().filter_map(|t| match t {
            Term::Constant(c) => Some(c.as_str()),
            Term::Variable(_) => None,
        })
    }

    fn sort_key(&self) -> (&str, &[Term], Sign) {
        (&self.predicate, &self.args, self.sign)
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Literal {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign == Sign::Negative {
            f.write_str("-")?;
        }
        f.write_str(&self.predicate)?;
        if !self.args.is_empty() {
            f.write_str("(")?;
            for (i, t) in self.args.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{t}")?;
            }
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// How the literals of a rule head or body are combined. `Single` marks a
/// head or body with at most one literal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connective {
    Single,
    And,
    Or,
    Xor,
}

impl Connective {
    pub fn separator(self) -> &'static str {
        match self {
            Connective::Single | Connective::And => ", ",
            Connective::Or => "; ",
            Connective::Xor => " ^ ",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rule {
    pub head: Vec<Literal>,
    pub head_connective: Connective,
    pub body: Vec<Literal>,
    pub body_connective: Connective,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
}

impl Rule {
    /// Builds a rule, normalizing the connective of a one-literal side to
    /// `Single`.
    pub fn new(
        head: Vec<Literal>,
        head_connective: Connective,
        body: Vec<Literal>,
        body_connective: Connective,
    ) -> Rule {
        let mut rule = Rule {
            head,
            head_connective,
            body,
            body_connective,
            probability: None,
        };
        rule.normalize_connectives();
        rule
    }

    pub fn fact(head: Literal) -> Rule {
        Rule::new(vec![head], Connective::Single, Vec::new(), Connective::Single)
    }

    /// `head :- body` with a conjunctive body.
    pub fn conj(head: Literal, body: Vec<Literal>) -> Rule {
        Rule::new(vec![head], Connective::Single, body, Connective::And)
    }

    pub fn with_probability(mut self, p: f64) -> Rule {
        self.probability = Some(p);
        self
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    pub fn is_ground(&self) -> bool {
        self.head.iter().chain(&self.body).all(Literal::is_ground)
    }

    pub(crate) fn normalize_connectives(&mut self) {
        if self.head.len() <= 1 {
            self.head_connective = Connective::Single;
        }
        if self.body.len() <= 1 {
            self.body_connective = Connective::Single;
        }
    }

    fn canonicalize(&mut self) {
        self.head.sort();
        self.head.dedup();
        self.body.sort();
        self.body.dedup();
        self.normalize_connectives();
    }
}

/// One top-level statement of a program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Statement {
    Rule(Rule),
    /// `:- l1, ..., ln.` — the body literals may not all hold together.
    Constraint { body: Vec<Literal> },
    /// `1{ l1; ...; ln }1.` — exactly one of the literals is activated.
    Choice { alternatives: Vec<Literal> },
    /// `#entity c1, c2.`
    DomainDecl { constants: Vec<String> },
}

impl Statement {
    pub fn literals(&self) -> Box<dyn Iterator<Item = &Literal> + '_> {
        match self {
            Statement::Rule(r) => Box::new(r.head.iter().chain(&r.body)),
            Statement::Constraint { body } => Box::new(body.iter()),
            Statement::Choice { alternatives } => Box::new(alternatives.iter()),
            Statement::DomainDecl { .. } => Box::new(std::iter::empty()),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.literals().all(Literal::is_ground)
    }

    fn kind_rank(&self) -> u8 {
        match self {
            Statement::DomainDecl { .. } => 0,
            Statement::Rule(_) => 1,
            Statement::Constraint { .. } => 2,
            Statement::Choice { .. } => 3,
        }
    }

    fn canonicalize(&mut self) {
        match self {
            Statement::Rule(r) => r.canonicalize(),
            Statement::Constraint { body } => {
                body.sort();
                body.dedup();
            }
            Statement::Choice { alternatives } => {
                alternatives.sort();
                alternatives.dedup();
            }
            Statement::DomainDecl { constants } => {
                constants.sort();
                constants.dedup();
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Program {
    pub statements: Vec<Statement>,
    /// Constants declared with `#entity`.
    pub domain: BTreeSet<String>,
}

impl Program {
    pub fn new(statements: Vec<Statement>) -> Program {
        let mut p = Program {
            statements,
            domain: BTreeSet::new(),
        };
        p.refresh_domain();
        p
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    pub fn push(&mut self, statement: Statement) {
        self.statements.push(statement);
        self.refresh_domain();
    }

    pub fn refresh_domain(&mut self) {
        self.domain = self
            .statements
            .iter()
            .filter_map(|s| match s {
                Statement::DomainDecl { constants } => Some(constants.iter().cloned()),
                _ => None,
            })
            .flatten()
            .collect();
    }

    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Rule(r) => Some(r),
            _ => None,
        })
    }

    pub fn is_ground(&self) -> bool {
        self.statements.iter().all(Statement::is_ground)
    }

    /// Constants that variables range over: the declared domain plus every
    /// constant mentioned in a ground fact.
    pub fn universe(&self) -> BTreeSet<String> {
        let mut out = self.domain.clone();
        for r in self.rules() {
            if r.is_fact() && r.is_ground() {
                for l in &r.head {
                    out.extend(l.constants().map(str::to_string));
                }
            }
        }
        out
    }

    /// Sorted literals inside every statement, a single merged domain
    /// declaration first, statements sorted by kind then canonical text,
    /// duplicates removed.
    pub fn canonicalize(&self) -> Program {
        let mut statements: Vec<Statement> = Vec::with_capacity(self.statements.len());
        if !self.domain.is_empty() {
            statements.push(Statement::DomainDecl {
                constants: self.domain.iter().cloned().collect(),
            });
        }
        for s in &self.statements {
            if matches!(s, Statement::DomainDecl { .. }) {
                continue;
            }
            let mut s = s.clone();
            s.canonicalize();
            statements.push(s);
        }
        let mut keyed: Vec<(u8, String, Statement)> = statements
            .into_iter()
            .map(|s| (s.kind_rank(), super::format::format_statement(&s), s))
            .collect();
        keyed.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
        keyed.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
        Program {
            statements: keyed.into_iter().map(|(_, _, s)| s).collect(),
            domain: self.domain.clone(),
        }
    }
}
