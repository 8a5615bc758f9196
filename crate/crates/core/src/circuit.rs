//! Compilation of ground programs into gate networks.
//!
//! Every ground atom gets two channels, one per sign. Channels carry state;
//! gates are stateless functions from channels to channels. Non-deterministic
//! inputs are generators, which the digital engine branches on.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dsl::{format_statement, Connective, Literal, Program, Rule, Sign, Statement};
use crate::error::{Error, Result};
use crate::ground::{atoms_of, GroundAtom};
use crate::scorer::Scorer;

/// A channel identity: a ground atom together with a sign.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SignedAtom {
    pub atom: GroundAtom,
    pub sign: Sign,
}

impl SignedAtom {
    pub fn new(atom: GroundAtom, sign: Sign) -> SignedAtom {
        SignedAtom { atom, sign }
    }

    pub fn pos(name: &str) -> SignedAtom {
        SignedAtom::new(GroundAtom::prop(name), Sign::Positive)
    }

    pub fn neg(name: &str) -> SignedAtom {
        SignedAtom::new(GroundAtom::prop(name), Sign::Negative)
    }

    pub fn from_literal(lit: &Literal) -> Option<SignedAtom> {
        GroundAtom::from_literal(lit).map(|atom| SignedAtom::new(atom, lit.sign))
    }

    pub fn complement(&self) -> SignedAtom {
        SignedAtom::new(self.atom.clone(), self.sign.flip())
    }
}

impl fmt::Display for SignedAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign == Sign::Negative {
            f.write_str("-")?;
        }
        write!(f, "{}", self.atom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ChannelId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    And,
    Or,
    Xor,
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Xor => "XOR",
        })
    }
}

/// When a gate (or a generator guard) fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    /// All inputs active. Vacuously true with no inputs.
    All,
    /// At least one input active.
    Any,
}

impl Condition {
    fn of(body: Connective) -> Condition {
        match body {
            Connective::Or => Condition::Any,
            _ => Condition::All,
        }
    }

    pub fn holds(self, inputs: &[ChannelId], active: impl Fn(ChannelId) -> bool) -> bool {
        match self {
            Condition::All => inputs.iter().all(|&c| active(c)),
            Condition::Any => inputs.iter().any(|&c| active(c)),
        }
    }
}

/// A stateless gate. AND and OR gates activate every output when they fire
/// (a conjunctive head fans out); an XOR gate activates the one output its
/// scorer ranks highest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub condition: Condition,
    pub inputs: Vec<ChannelId>,
    pub outputs: Vec<ChannelId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scorer: Option<String>,
    /// Inert in digital evaluation; the probabilistic engine reads it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub switch: Option<usize>,
    /// Index of the source statement in the compiled program.
    pub source: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cardinality {
    ExactlyOne,
    NonemptySubset,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Guard {
    pub condition: Condition,
    pub inputs: Vec<ChannelId>,
}

/// A non-deterministic input. Unguarded generators always fire; guarded ones
/// fire only when their rule body holds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guard: Option<Guard>,
    pub alternatives: Vec<Vec<ChannelId>>,
    pub cardinality: Cardinality,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub switch: Option<usize>,
    pub source: usize,
}

impl Generator {
    /// Every legal selection, as sorted alternative indices. Exactly-one
    /// generators yield singletons in alternative order; subset generators
    /// yield nonempty subsets in binary counting order.
    pub fn selections(&self) -> Vec<Vec<usize>> {
        let n = self.alternatives.len();
        match self.cardinality {
            Cardinality::ExactlyOne => (0..n).map(|i| vec![i]).collect(),
            Cardinality::NonemptySubset => (1u64..(1u64 << n))
                .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
                .collect(),
        }
    }

    pub fn selection_count(&self) -> u64 {
        let n = self.alternatives.len() as u32;
        match self.cardinality {
            Cardinality::ExactlyOne => n as u64,
            Cardinality::NonemptySubset => (1u64 << n) - 1,
        }
    }

    /// Binary choice points this generator contributes: ceil(log2(options)).
    pub fn choice_points(&self) -> u32 {
        let k = self.selection_count();
        if k <= 1 {
            0
        } else {
            64 - (k - 1).leading_zeros()
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fact {
    pub channel: ChannelId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub switch: Option<usize>,
    pub source: usize,
}

pub type AtomScorer = Arc<dyn Scorer<SignedAtom>>;

#[derive(Clone, Default)]
pub struct CompileOptions {
    /// When set, exclusive-or heads become deterministic XOR gates driven by
    /// this scorer instead of exactly-one generators.
    pub xor_scorer: Option<AtomScorer>,
}

#[derive(Clone, Default, Serialize)]
pub struct Circuit {
    channels: Vec<SignedAtom>,
    #[serde(skip)]
    index: BTreeMap<SignedAtom, ChannelId>,
    pub gates: Vec<Gate>,
    pub generators: Vec<Generator>,
    pub facts: Vec<Fact>,
    /// Probability of each switch, indexed by switch number.
    pub switches: Vec<f64>,
    #[serde(skip)]
    scorers: BTreeMap<String, AtomScorer>,
}

impl fmt::Debug for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Circuit")
            .field("channels", &self.channels)
            .field("gates", &self.gates)
            .field("generators", &self.generators)
            .field("facts", &self.facts)
            .field("switches", &self.switches)
            .field("scorers", &self.scorers.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Circuit {
    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn channel(&self, id: ChannelId) -> &SignedAtom {
        &self.channels[id.0]
    }

    pub fn channels(&self) -> impl Iterator<Item = (ChannelId, &SignedAtom)> {
        self.channels.iter().enumerate().map(|(i, c)| (ChannelId(i), c))
    }

    pub fn channel_id(&self, atom: &SignedAtom) -> Option<ChannelId> {
        self.index.get(atom).copied()
    }

    pub fn atoms(&self) -> impl Iterator<Item = &GroundAtom> {
        self.channels.iter().step_by(2).map(|c| &c.atom)
    }

    pub fn scorer(&self, name: &str) -> Option<&AtomScorer> {
        self.scorers.get(name)
    }

    pub fn choice_points(&self) -> u32 {
        self.generators.iter().map(Generator::choice_points).sum()
    }

    fn with_atoms(atoms: &BTreeSet<GroundAtom>) -> Circuit {
        let mut c = Circuit::default();
        for atom in atoms {
            for sign in [Sign::Positive, Sign::Negative] {
                let sa = SignedAtom::new(atom.clone(), sign);
                c.index.insert(sa.clone(), ChannelId(c.channels.len()));
                c.channels.push(sa);
            }
        }
        c
    }

    fn id_of(&self, lit: &Literal) -> ChannelId {
        let sa = SignedAtom::from_literal(lit).expect("compile checks groundness first");
        self.index[&sa]
    }

    fn ids(&self, lits: &[Literal]) -> Vec<ChannelId> {
        lits.iter().map(|l| self.id_of(l)).collect()
    }
}

/// Material-implication completion: `:- l1, ..., ln.` becomes, for every i,
/// `neg(li) :- l1, ..., l(i-1), l(i+1), ..., ln.` A one-literal constraint
/// becomes the negative fact `neg(l1).` Sorted and deduplicated.
pub fn complete_constraint(body: &[Literal]) -> Vec<Rule> {
    let mut lits = body.to_vec();
    lits.sort();
    lits.dedup();
    let mut rules: Vec<Rule> = (0..lits.len())
        .map(|i| {
            let rest: Vec<Literal> = lits
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, l)| l.clone())
                .collect();
            Rule::conj(lits[i].negated(), rest)
        })
        .collect();
    let mut seen = BTreeSet::new();
    rules.retain(|r| seen.insert(format_statement(&Statement::Rule(r.clone()))));
    let program = Program::new(rules.into_iter().map(Statement::Rule).collect()).canonicalize();
    program.rules().cloned().collect()
}

/// Replaces every constraint of `p` by its completion rules.
pub fn complete_program(p: &Program) -> Program {
    let mut out = Vec::with_capacity(p.statements.len());
    for s in &p.statements {
        match s {
            Statement::Constraint { body } => {
                out.extend(complete_constraint(body).into_iter().map(Statement::Rule))
            }
            other => out.push(other.clone()),
        }
    }
    Program::new(out).canonicalize()
}

/// Adds `1{x; -x}1.` for every atom of `p` that is neither covered by a
/// choice nor fixed by a fact.
pub fn classicalize(p: &Program) -> Program {
    classicalize_over(p, &atoms_of(p))
}

/// Like [`classicalize`], over an explicit atom vocabulary.
pub fn classicalize_over(p: &Program, atoms: &BTreeSet<GroundAtom>) -> Program {
    let mut covered = BTreeSet::new();
    for s in &p.statements {
        match s {
            Statement::Choice { alternatives } => {
                covered.extend(alternatives.iter().filter_map(GroundAtom::from_literal));
            }
            Statement::Rule(r) if r.is_fact() && r.head_connective != Connective::Or && r.head_connective != Connective::Xor => {
                covered.extend(r.head.iter().filter_map(GroundAtom::from_literal));
            }
            _ => {}
        }
    }
    let mut statements = p.statements.clone();
    for atom in atoms.iter().filter(|a| !covered.contains(*a)) {
        statements.push(Statement::Choice {
            alternatives: vec![atom.to_literal(Sign::Positive), atom.to_literal(Sign::Negative)],
        });
    }
    Program::new(statements).canonicalize()
}

pub fn compile(p: &Program) -> Result<Circuit> {
    compile_with(p, &CompileOptions::default())
}

/// Compiles a ground program. Constraints are compiled through their
/// completion rules.
pub fn compile_with(p: &Program, options: &CompileOptions) -> Result<Circuit> {
    if let Some(s) = p.statements.iter().find(|s| !s.is_ground()) {
        return Err(Error::NotGround(format_statement(s)));
    }
    let p = complete_program(p);
    let mut c = Circuit::with_atoms(&atoms_of(&p));
    if let Some(scorer) = &options.xor_scorer {
        c.scorers.insert(scorer.name().to_string(), scorer.clone());
    }

    for (source, s) in p.statements.iter().enumerate() {
        match s {
            Statement::Rule(r) => {
                let switch = r.probability.map(|prob| {
                    c.switches.push(prob);
                    c.switches.len() - 1
                });
                compile_rule(&mut c, r, source, switch, options);
            }
            Statement::Choice { alternatives } => {
                let alternatives = alternatives.iter().map(|l| vec![c.id_of(l)]).collect();
                push_generator(&mut c, None, alternatives, Cardinality::ExactlyOne, None, None, source);
            }
            Statement::DomainDecl { .. } => {}
            Statement::Constraint { .. } => unreachable!("constraints are completed before compilation"),
        }
    }
    Ok(c)
}

fn push_generator(
    c: &mut Circuit,
    guard: Option<Guard>,
    alternatives: Vec<Vec<ChannelId>>,
    cardinality: Cardinality,
    probability: Option<f64>,
    switch: Option<usize>,
    source: usize,
) {
    let name = format!("gen{}", c.generators.len());
    c.generators.push(Generator {
        name,
        guard,
        alternatives,
        cardinality,
        probability,
        switch,
        source,
    });
}

fn compile_rule(c: &mut Circuit, r: &Rule, source: usize, switch: Option<usize>, options: &CompileOptions) {
    let heads = c.ids(&r.head);
    let inputs = c.ids(&r.body);
    let condition = Condition::of(r.body_connective);
    let guard = (!inputs.is_empty()).then(|| Guard {
        condition,
        inputs: inputs.clone(),
    });

    match r.head_connective {
        Connective::Single | Connective::And if inputs.is_empty() => {
            for channel in heads {
                c.facts.push(Fact {
                    channel,
                    probability: r.probability,
                    switch,
                    source,
                });
            }
        }
        Connective::Single | Connective::And => {
            let kind = if condition == Condition::Any { GateKind::Or } else { GateKind::And };
            c.gates.push(Gate {
                kind,
                condition,
                inputs,
                outputs: heads,
                scorer: None,
                probability: r.probability,
                switch,
                source,
            });
        }
        Connective::Or => {
            let alternatives = heads.into_iter().map(|h| vec![h]).collect();
            push_generator(c, guard, alternatives, Cardinality::NonemptySubset, r.probability, switch, source);
        }
        Connective::Xor => match &options.xor_scorer {
            Some(scorer) => c.gates.push(Gate {
                kind: GateKind::Xor,
                condition,
                inputs,
                outputs: heads,
                scorer: Some(scorer.name().to_string()),
                probability: r.probability,
                switch,
                source,
            }),
            None => {
                let alternatives = heads.into_iter().map(|h| vec![h]).collect();
                push_generator(c, guard, alternatives, Cardinality::ExactlyOne, r.probability, switch, source);
            }
        },
    }
}

fn quoted(s: &SignedAtom) -> String {
    format!("\"{}\"", s.to_string().replace('"', "\\\""))
}

/// Graphviz rendering. Only channels that some gate, generator or fact
/// touches are drawn; negative channels are dashed, fact channels doubled.
pub fn export_dot(c: &Circuit) -> String {
    let mut used = BTreeSet::new();
    for g in &c.gates {
        used.extend(g.inputs.iter().chain(&g.outputs).copied());
    }
    for g in &c.generators {
        used.extend(g.alternatives.iter().flatten().copied());
        if let Some(guard) = &g.guard {
            used.extend(guard.inputs.iter().copied());
        }
    }
    let facts: BTreeSet<ChannelId> = c.facts.iter().map(|f| f.channel).collect();
    used.extend(facts.iter().copied());

    let mut out = String::from("digraph circuit {\n");
    if used.is_empty() {
        out.push_str("}\n");
        return out;
    }
    out.push_str("  rankdir=LR;\n");
    for id in &used {
        let ch = c.channel(*id);
        let mut attrs = vec!["shape=ellipse".to_string()];
        if ch.sign == Sign::Negative {
            attrs.push("style=dashed".into());
        }
        if facts.contains(id) {
            attrs.push("peripheries=2".into());
        }
        let _ = writeln!(out, "  {} [{}];", quoted(ch), attrs.join(", "));
    }
    for (i, g) in c.gates.iter().enumerate() {
        let _ = writeln!(out, "  g{i} [shape=box, label=\"{}\"];", g.kind);
    }
    for i in 0..c.generators.len() {
        let _ = writeln!(out, "  gen{i} [shape=diamond, label=\"⊕\"];");
    }
    for (i, g) in c.gates.iter().enumerate() {
        for input in &g.inputs {
            let _ = writeln!(out, "  {} -> g{i};", quoted(c.channel(*input)));
        }
        for output in &g.outputs {
            let _ = writeln!(out, "  g{i} -> {};", quoted(c.channel(*output)));
        }
    }
    for (i, g) in c.generators.iter().enumerate() {
        if let Some(guard) = &g.guard {
            for input in &guard.inputs {
                let _ = writeln!(out, "  {} -> gen{i};", quoted(c.channel(*input)));
            }
        }
        for alt in g.alternatives.iter().flatten() {
            let _ = writeln!(out, "  gen{i} -> {};", quoted(c.channel(*alt)));
        }
    }
    out.push_str("}\n");
    out
}
