//! Probabilistic reading of circuits.
//!
//! Every probability-annotated statement owns an independent Bernoulli
//! switch. A world fixes all switches; its program is the deterministic part
//! plus the switched-on statements, evaluated by ordinary digital
//! propagation. Worlds that end in a contradiction are dropped and the
//! remaining mass renormalized.
//!
//! The second half of the module works on explicit joint distributions and
//! evaluates the conditional-probability expressions of the six dependency
//! forms next to an exact reference computation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::circuit::{compile, Circuit, SignedAtom};
use crate::digital::{run, AtomValue, Model, Selections};
use crate::dsl::{format_statement, Literal, Program, Sign, Statement};
use crate::error::{Error, Result};
use crate::ground::{ground_program, GroundAtom};

pub const MAX_SWITCHES: usize = 20;

/// An independent on/off switch attached to an annotated statement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Switch {
    pub id: usize,
    pub owner: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum WorldOutcome {
    Model(Model),
    Contradiction,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedWorld {
    /// Switch states, indexed by switch id.
    pub switches: Vec<bool>,
    pub weight: f64,
    pub outcome: WorldOutcome,
}

impl WeightedWorld {
    pub fn model(&self) -> Option<&Model> {
        match &self.outcome {
            WorldOutcome::Model(m) => Some(m),
            WorldOutcome::Contradiction => None,
        }
    }
}

/// Ground, compile, and check that nothing non-deterministic is left.
fn deterministic_circuit(p: &Program) -> Result<(Program, Circuit)> {
    let g = ground_program(p)?;
    for s in &g.statements {
        let reason = match s {
            Statement::Choice { .. } => Some("choice statements are not allowed in probabilistic programs"),
            Statement::Rule(r) if r.head.len() > 1 && matches!(r.head_connective, crate::dsl::Connective::Or | crate::dsl::Connective::Xor) => {
                Some("disjunctive heads are not allowed in probabilistic programs")
            }
            _ => None,
        };
        if let Some(reason) = reason {
            return Err(Error::Unsupported {
                statement: format_statement(s),
                reason: reason.into(),
            });
        }
    }
    let c = compile(&g)?;
    if c.switches.len() > MAX_SWITCHES {
        return Err(Error::SwitchLimit {
            count: c.switches.len(),
            limit: MAX_SWITCHES,
        });
    }
    Ok((g, c))
}

/// The switches of `p` after grounding, in compilation order.
pub fn switches(p: &Program) -> Result<Vec<Switch>> {
    let (g, c) = deterministic_circuit(p)?;
    let mut owners: BTreeMap<usize, String> = BTreeMap::new();
    let sources = c
        .gates
        .iter()
        .map(|x| (x.switch, x.source))
        .chain(c.facts.iter().map(|x| (x.switch, x.source)));
    for (switch, source) in sources {
        if let Some(s) = switch {
            owners.entry(s).or_insert_with(|| format_statement(&complete_statement(&g, source)));
        }
    }
    Ok(c.switches
        .iter()
        .enumerate()
        .map(|(id, &probability)| Switch {
            id,
            owner: owners.remove(&id).unwrap_or_default(),
            probability,
        })
        .collect())
}

// Statement `source` of the completed program that `compile` numbered.
fn complete_statement(g: &Program, source: usize) -> Statement {
    crate::circuit::complete_program(g).statements[source].clone()
}

/// All 2^n switch assignments with their weights and outcomes. Switch `i`
/// is bit `i` of the world index.
pub fn enumerate_worlds(p: &Program) -> Result<Vec<WeightedWorld>> {
    let (_, c) = deterministic_circuit(p)?;
    Ok(worlds_of(&c))
}

fn worlds_of(c: &Circuit) -> Vec<WeightedWorld> {
    let n = c.switches.len();
    let none = Selections::new();
    (0u64..(1u64 << n))
        .map(|mask| {
            let switches: Vec<bool> = (0..n).map(|i| mask & (1 << i) != 0).collect();
            let weight = c
                .switches
                .iter()
                .zip(&switches)
                .map(|(&p, &on)| if on { p } else { 1.0 - p })
                .product();
            let out = run(c, &[], &none, Some(&switches));
            let outcome = if out.state.is_consistent() {
                WorldOutcome::Model(Model {
                    values: out.state.values(c),
                    provenance: Vec::new(),
                })
            } else {
                WorldOutcome::Contradiction
            };
            WeightedWorld {
                switches,
                weight,
                outcome,
            }
        })
        .collect()
}

/// Truth of a ground literal in a world. A world is complete: `-x` holds
/// whenever `x` is not derived, so `P(-x) = 1 - P(x)`.
pub fn literal_holds(model: &Model, lit: &SignedAtom) -> bool {
    let derived = model.value(&lit.atom) == AtomValue::True;
    match lit.sign {
        Sign::Positive => derived,
        Sign::Negative => !derived,
    }
}

fn to_signed(lit: &Literal) -> Result<SignedAtom> {
    SignedAtom::from_literal(lit).ok_or_else(|| Error::InvalidInput(format!("query literal `{lit}` must be ground")))
}

fn describe(lits: &[SignedAtom]) -> String {
    lits.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", ")
}

/// Renormalized probability that `query` holds, optionally conditioned on
/// every literal of `given`.
pub fn query_prob(p: &Program, query: &Literal, given: &[Literal]) -> Result<f64> {
    let worlds = enumerate_worlds(p)?;
    query_worlds(&worlds, query, given)
}

pub fn query_worlds(worlds: &[WeightedWorld], query: &Literal, given: &[Literal]) -> Result<f64> {
    let q = to_signed(query)?;
    let evidence = given.iter().map(to_signed).collect::<Result<Vec<_>>>()?;
    let mass = |pred: &dyn Fn(&Model) -> bool| -> f64 {
        worlds
            .iter()
            .filter_map(|w| w.model().map(|m| (w.weight, m)))
            .filter(|(_, m)| pred(m))
            .map(|(w, _)| w)
            .sum()
    };
    let consistent = mass(&|_| true);
    if consistent <= 0.0 {
        return Err(Error::ZeroMass("of every world (all are contradictory)".into()));
    }
    let holds_all = |m: &Model| evidence.iter().all(|e| literal_holds(m, e));
    let given_mass = mass(&holds_all) / consistent;
    if given_mass <= 0.0 {
        return Err(Error::ZeroMass(describe(&evidence)));
    }
    let joint = mass(&|m| holds_all(m) && literal_holds(m, &q)) / consistent;
    Ok((joint / given_mass).clamp(0.0, 1.0))
}

/// A Boolean expression over named propositions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    True,
    Var(String),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Xor(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Expr {
        Expr::Not(Box::new(self))
    }

    pub fn and(self, other: Expr) -> Expr {
        Expr::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Expr) -> Expr {
        Expr::Or(Box::new(self), Box::new(other))
    }

    pub fn xor(self, other: Expr) -> Expr {
        Expr::Xor(Box::new(self), Box::new(other))
    }

    fn vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Expr::True => {}
            Expr::Var(v) => {
                out.insert(v);
            }
            Expr::Not(e) => e.vars(out),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Xor(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }

    fn eval(&self, value: &dyn Fn(&str) -> bool) -> bool {
        match self {
            Expr::True => true,
            Expr::Var(v) => value(v),
            Expr::Not(e) => !e.eval(value),
            Expr::And(a, b) => a.eval(value) && b.eval(value),
            Expr::Or(a, b) => a.eval(value) || b.eval(value),
            Expr::Xor(a, b) => a.eval(value) != b.eval(value),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::True => f.write_str("true"),
            Expr::Var(v) => f.write_str(v),
            Expr::Not(e) => write!(f, "¬{e}"),
            Expr::And(a, b) => write!(f, "({a} ∧ {b})"),
            Expr::Or(a, b) => write!(f, "({a} ∨ {b})"),
            Expr::Xor(a, b) => write!(f, "({a} ⊕ {b})"),
        }
    }
}

/// An explicit joint distribution over a few named propositions.
///
/// Assignment `i` gives proposition `names[k]` the value of bit `k` of `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    names: Vec<String>,
    masses: Vec<f64>,
}

const TABLE_TOLERANCE: f64 = 1e-9;

impl JointTable {
    pub fn new(names: Vec<String>, masses: Vec<f64>) -> Result<JointTable> {
        let unique: BTreeSet<&String> = names.iter().collect();
        if unique.len() != names.len() {
            return Err(Error::InvalidTable("duplicate proposition names".into()));
        }
        if names.len() > 16 {
            return Err(Error::InvalidTable("at most 16 propositions are supported".into()));
        }
        if masses.len() != 1 << names.len() {
            return Err(Error::InvalidTable(format!(
                "{} propositions need {} masses, got {}",
                names.len(),
                1usize << names.len(),
                masses.len()
            )));
        }
        if let Some(m) = masses.iter().find(|m| !m.is_finite() || **m < 0.0) {
            return Err(Error::InvalidTable(format!("mass {m} is negative or not finite")));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > TABLE_TOLERANCE {
            return Err(Error::InvalidTable(format!("masses sum to {total}, not 1")));
        }
        Ok(JointTable { names, masses })
    }

    /// Builds a table from `(assignment, mass)` pairs; unlisted assignments
    /// get zero mass.
    pub fn from_assignments<'a>(
        names: &[&str],
        entries: impl IntoIterator<Item = (&'a [bool], f64)>,
    ) -> Result<JointTable> {
        let mut masses = vec![0.0; 1 << names.len()];
        for (values, mass) in entries {
            if values.len() != names.len() {
                return Err(Error::InvalidTable("assignment length differs from the proposition count".into()));
            }
            let idx = values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v)
                .fold(0usize, |acc, (k, _)| acc | (1 << k));
            masses[idx] += mass;
        }
        JointTable::new(names.iter().map(|s| s.to_string()).collect(), masses)
    }

    pub fn uniform(names: &[&str]) -> JointTable {
        let n = 1usize << names.len();
        JointTable::new(names.iter().map(|s| s.to_string()).collect(), vec![1.0 / n as f64; n])
            .expect("uniform tables are valid")
    }

    /// A random table with strictly positive masses.
    pub fn random<R: Rng + ?Sized>(names: &[&str], rng: &mut R) -> JointTable {
        let n = 1usize << names.len();
        let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln() + 1e-6).collect();
        let total: f64 = raw.iter().sum();
        let masses = raw.iter().map(|m| m / total).collect();
        JointTable {
            names: names.iter().map(|s| s.to_string()).collect(),
            masses,
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn has(&self, name: &str) -> bool {
        self.names.iter().any(|n| n == name)
    }

    fn index_of(&self, name: &str) -> Result<usize> {
        self.names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::InvalidTable(format!("unknown proposition `{name}`")))
    }

    /// Total mass of the assignments satisfying `e`.
    pub fn mass(&self, e: &Expr) -> Result<f64> {
        let mut vars = BTreeSet::new();
        e.vars(&mut vars);
        let bits: BTreeMap<&str, usize> = vars
            .into_iter()
            .map(|v| self.index_of(v).map(|i| (v, i)))
            .collect::<Result<_>>()?;
        Ok(self
            .masses
            .iter()
            .enumerate()
            .filter(|(i, _)| e.eval(&|v| i & (1 << bits[v]) != 0))
            .map(|(_, m)| m)
            .sum())
    }

    /// Parses `{"a=1,b=0,p=1": 0.125, ...}`. Every key must assign the same
    /// propositions; missing assignments have zero mass.
    pub fn from_json(text: &str) -> Result<JointTable> {
        let raw: BTreeMap<String, f64> =
            serde_json::from_str(text).map_err(|e| Error::InvalidTable(e.to_string()))?;
        let mut names: Option<Vec<String>> = None;
        let mut entries = Vec::new();
        for (key, mass) in raw {
            let mut pairs = Vec::new();
            for part in key.split(',') {
                let (name, value) = part
                    .split_once('=')
                    .ok_or_else(|| Error::InvalidTable(format!("malformed assignment `{key}`")))?;
                let value = match value.trim() {
                    "1" | "true" => true,
                    "0" | "false" => false,
                    other => return Err(Error::InvalidTable(format!("value `{other}` in `{key}` is not 0 or 1"))),
                };
                pairs.push((name.trim().to_string(), value));
            }
            pairs.sort();
            let these: Vec<String> = pairs.iter().map(|(n, _)| n.clone()).collect();
            match &names {
                None => names = Some(these),
                Some(n) if *n != these => {
                    return Err(Error::InvalidTable(format!("`{key}` assigns different propositions")))
                }
                Some(_) => {}
            }
            entries.push((pairs.into_iter().map(|(_, v)| v).collect::<Vec<bool>>(), mass));
        }
        let names = names.ok_or_else(|| Error::InvalidTable("empty table".into()))?;
        let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
        JointTable::from_assignments(&name_refs, entries.iter().map(|(v, m)| (v.as_slice(), *m)))
    }

    pub fn to_json(&self) -> String {
        let map: BTreeMap<String, f64> = self
            .masses
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let key = self
                    .names
                    .iter()
                    .enumerate()
                    .map(|(k, n)| format!("{n}={}", (i >> k) & 1))
                    .collect::<Vec<_>>()
                    .join(",");
                (key, *m)
            })
            .collect();
        serde_json::to_string_pretty(&map).expect("string keys serialize")
    }
}

/// Exact `P(event | cond)` by enumerating every assignment of the table.
pub fn oracle_conditional(t: &JointTable, event: &Expr, cond: &Expr) -> Result<f64> {
    let c = t.mass(cond)?;
    if c <= 0.0 {
        return Err(Error::ZeroMass(cond.to_string()));
    }
    Ok(t.mass(&event.clone().and(cond.clone()))? / c)
}

fn v(name: &str) -> Expr {
    Expr::var(name)
}

// A conditional inside a sum; impossible conditions contribute nothing.
fn additive_term(t: &JointTable, event: &Expr, cond: &Expr) -> Result<Option<f64>> {
    if t.mass(cond)? <= 0.0 {
        Ok(None)
    } else {
        oracle_conditional(t, event, cond).map(Some)
    }
}

fn sum_of_terms(terms: [(Option<f64>, f64); 3], cond: &Expr) -> Result<f64> {
    if terms.iter().all(|(t, _)| t.is_none()) {
        return Err(Error::ZeroMass(cond.to_string()));
    }
    Ok(terms.iter().map(|(t, sign)| t.unwrap_or(0.0) * sign).sum())
}

/// The right-hand side of dependency form `form` (1 to 6), computed term by
/// term as written:
///
/// 1. `P(p|a∧b)`
/// 2. `P(p|a) + P(p|b) − P(p|a∧b)`
/// 3. `P(p|q∧a) · P(q|a)`
/// 4. `P(p|a) + P(q|a) − P(p∧q|a)`, the last term taken from form 3
/// 5. `P(p|a∧¬b) + P(p|¬a∧b)`
/// 6. `P(p∧¬q|a) + P(¬p∧q|a)`
///
/// In the additive forms 2 and 5 a term whose condition has zero mass is
/// dropped; the form fails only when every term is undefined.
pub fn formula(form: u8, t: &JointTable) -> Result<f64> {
    let (a, b, p, q) = (v("a"), v("b"), v("p"), v("q"));
    match form {
        1 => oracle_conditional(t, &p, &a.and(b)),
        2 => {
            let ab = a.clone().and(b.clone());
            sum_of_terms(
                [
                    (additive_term(t, &p, &a)?, 1.0),
                    (additive_term(t, &p, &b)?, 1.0),
                    (additive_term(t, &p, &ab)?, -1.0),
                ],
                &a.or(b),
            )
        }
        3 => {
            let q_given_a = oracle_conditional(t, &q, &a)?;
            if q_given_a == 0.0 {
                // P(p∧q|a) <= P(q|a) = 0
                return Ok(0.0);
            }
            Ok(oracle_conditional(t, &p, &q.and(a))? * q_given_a)
        }
        4 => Ok(oracle_conditional(t, &p, &a)? + oracle_conditional(t, &q, &a)? - formula(3, t)?),
        5 => {
            let left = a.clone().and(b.clone().not());
            let right = a.clone().not().and(b.clone());
            sum_of_terms(
                [
                    (additive_term(t, &p, &left)?, 1.0),
                    (additive_term(t, &p, &right)?, 1.0),
                    (None, 0.0),
                ],
                &a.xor(b),
            )
        }
        6 => Ok(oracle_conditional(t, &p.clone().and(q.clone().not()), &a)?
            + oracle_conditional(t, &p.not().and(q), &a)?),
        _ => Err(Error::InvalidInput(format!("form must be 1 to 6, got {form}"))),
    }
}

/// The conditional each form stands for: `(event, condition)`.
pub fn form_event(form: u8) -> Option<(Expr, Expr)> {
    let (a, b, p, q) = (v("a"), v("b"), v("p"), v("q"));
    Some(match form {
        1 => (p, a.and(b)),
        2 => (p, a.or(b)),
        3 => (p.and(q), a),
        4 => (p.or(q), a),
        5 => (p, a.xor(b)),
        6 => (p.xor(q), a),
        _ => return None,
    })
}

/// Propositions a form mentions.
pub fn form_propositions(form: u8) -> &'static [&'static str] {
    match form {
        1 | 2 | 5 => &["a", "b", "p"],
        _ => &["a", "p", "q"],
    }
}

/// Forms whose literal expression must equal the exact conditional.
pub const EXACT_FORMS: [u8; 4] = [1, 3, 4, 6];

#[derive(Debug, Clone, Serialize)]
pub struct FormComparison {
    pub form: u8,
    pub expression: String,
    pub literal: Option<f64>,
    pub oracle: Option<f64>,
    pub deviation: Option<f64>,
    /// True for forms that should match the oracle exactly.
    pub expected_exact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// For every form, the literal value, the exact conditional and the
/// absolute difference. Forms whose propositions are missing from `t`, or
/// whose terms are undefined, carry a note instead of numbers.
pub fn compare_formulas(t: &JointTable) -> Vec<FormComparison> {
    (1u8..=6)
        .map(|form| {
            let (event, cond) = form_event(form).expect("forms 1..=6 exist");
            let expression = format!("P({event} | {cond})");
            let expected_exact = EXACT_FORMS.contains(&form);
            let missing: Vec<&str> = form_propositions(form).iter().copied().filter(|n| !t.has(n)).collect();
            if !missing.is_empty() {
                return FormComparison {
                    form,
                    expression,
                    literal: None,
                    oracle: None,
                    deviation: None,
                    expected_exact,
                    note: Some(format!("not applicable: table lacks {}", missing.join(", "))),
                };
            }
            let literal = formula(form, t);
            let oracle = oracle_conditional(t, &event, &cond);
            let note = match (&literal, &oracle) {
                (Err(e), _) | (_, Err(e)) => Some(e.to_string()),
                _ => None,
            };
            let literal = literal.ok();
            let oracle = oracle.ok();
            FormComparison {
                form,
                expression,
                literal,
                oracle,
                deviation: literal.zip(oracle).map(|(l, o)| (l - o).abs()),
                expected_exact,
                note,
            }
        })
        .collect()
}

/// Every ground atom that appears in any consistent world, for listing.
pub fn world_atoms(worlds: &[WeightedWorld]) -> BTreeSet<GroundAtom> {
    worlds
        .iter()
        .filter_map(WeightedWorld::model)
        .flat_map(|m| m.values.keys().cloned())
        .collect()
}
