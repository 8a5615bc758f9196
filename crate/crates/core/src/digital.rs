//! Boolean evaluation of circuits: least-fixpoint propagation, exhaustive
//! enumeration over generator selections, and model-set comparison.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::circuit::{classicalize_over, compile, Cardinality, ChannelId, Circuit, GateKind, SignedAtom};
use crate::dsl::{Program, Sign};
use crate::error::{Error, Result};
use crate::ground::{atoms_of, ground_program, GroundAtom};
use crate::scorer::argmax;

pub const DEFAULT_MAX_CHOICE_POINTS: u32 = 24;
pub const MAX_CHOICES_ENV: &str = "IG_MAX_CHOICES";

/// Per-generator selections, keyed by generator index. A selection lists
/// alternative indices in increasing order.
pub type Selections = BTreeMap<usize, Vec<usize>>;

/// The set of active channels after a propagation run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivationState {
    active: Vec<bool>,
}

impl ActivationState {
    pub fn is_active(&self, id: ChannelId) -> bool {
        self.active[id.0]
    }

    pub fn active_ids(&self) -> impl Iterator<Item = ChannelId> + '_ {
        self.active
            .iter()
            .enumerate()
            .filter(|(_, a)| **a)
            .map(|(i, _)| ChannelId(i))
    }

    pub fn len(&self) -> usize {
        self.active.iter().filter(|a| **a).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Channels are laid out in (positive, negative) pairs per atom.
    pub fn value(&self, atom_index: usize) -> AtomValue {
        AtomValue::from_channels(self.active[2 * atom_index], self.active[2 * atom_index + 1])
    }

    pub fn values(&self, c: &Circuit) -> BTreeMap<GroundAtom, AtomValue> {
        c.atoms()
            .enumerate()
            .map(|(i, a)| (a.clone(), self.value(i)))
            .collect()
    }

    pub fn contradictions<'c>(&self, c: &'c Circuit) -> Vec<&'c GroundAtom> {
        c.atoms()
            .enumerate()
            .filter(|(i, _)| self.value(*i) == AtomValue::Contradiction)
            .map(|(_, a)| a)
            .collect()
    }

    pub fn is_consistent(&self) -> bool {
        self.active.chunks(2).all(|pair| !(pair[0] && pair[1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomValue {
    Unknown,
    True,
    False,
    Contradiction,
}

impl AtomValue {
    pub fn from_channels(pos: bool, neg: bool) -> AtomValue {
        match (pos, neg) {
            (false, false) => AtomValue::Unknown,
            (true, false) => AtomValue::True,
            (false, true) => AtomValue::False,
            (true, true) => AtomValue::Contradiction,
        }
    }
}

/// One generator decision that led to a model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Choice {
    pub generator: String,
    pub selected: Vec<String>,
}

/// A consistent, gate-closed assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    pub values: BTreeMap<GroundAtom, AtomValue>,
    pub provenance: Vec<Choice>,
}

impl Model {
    /// Known atoms as signed atoms, in atom order.
    pub fn literals(&self) -> Vec<SignedAtom> {
        self.values
            .iter()
            .filter_map(|(a, v)| match v {
                AtomValue::True => Some(SignedAtom::new(a.clone(), Sign::Positive)),
                AtomValue::False => Some(SignedAtom::new(a.clone(), Sign::Negative)),
                _ => None,
            })
            .collect()
    }

    pub fn value(&self, atom: &GroundAtom) -> AtomValue {
        self.values.get(atom).copied().unwrap_or(AtomValue::Unknown)
    }

    pub fn holds(&self, lit: &SignedAtom) -> bool {
        matches!(
            (self.value(&lit.atom), lit.sign),
            (AtomValue::True, Sign::Positive) | (AtomValue::False, Sign::Negative)
        )
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lits: Vec<String> = self.literals().iter().map(|l| l.to_string()).collect();
        f.write_str(&lits.join(" "))
    }
}

pub(crate) struct Outcome {
    pub state: ActivationState,
    /// Lowest-index generator that fired without a selection.
    pub unresolved: Option<usize>,
}

fn check_selection(c: &Circuit, gen: usize, sel: &[usize]) -> Result<()> {
    let g = c.generators.get(gen).ok_or_else(|| Error::InvalidSelection {
        generator: format!("gen{gen}"),
        reason: "no such generator".into(),
    })?;
    let bad = |reason: &str| {
        Err(Error::InvalidSelection {
            generator: g.name.clone(),
            reason: reason.to_string(),
        })
    };
    if sel.is_empty() {
        return bad("empty selection");
    }
    if g.cardinality == Cardinality::ExactlyOne && sel.len() != 1 {
        return bad("exactly one alternative must be selected");
    }
    if sel.windows(2).any(|w| w[0] >= w[1]) {
        return bad("alternative indices must be strictly increasing");
    }
    if sel.iter().any(|&i| i >= g.alternatives.len()) {
        return bad("alternative index out of range");
    }
    Ok(())
}

/// Least fixpoint of the circuit from `inputs`, firing generators with the
/// given selections. `enabled` masks probabilistic switches; `None` means
/// every switch is on.
pub(crate) fn run(
    c: &Circuit,
    inputs: &[ChannelId],
    choices: &Selections,
    enabled: Option<&[bool]>,
) -> Outcome {
    let on = |switch: Option<usize>| match (switch, enabled) {
        (Some(s), Some(mask)) => mask[s],
        _ => true,
    };
    let mut active = vec![false; c.channel_count()];
    for f in c.facts.iter().filter(|f| on(f.switch)) {
        active[f.channel.0] = true;
    }
    for i in inputs {
        active[i.0] = true;
    }

    let mut unresolved;
    loop {
        let mut changed = false;
        let mut activate = |id: ChannelId, active: &mut Vec<bool>| {
            if !active[id.0] {
                active[id.0] = true;
                changed = true;
            }
        };

        for g in c.gates.iter().filter(|g| on(g.switch)) {
            if !g.condition.holds(&g.inputs, |id| active[id.0]) {
                continue;
            }
            if g.kind == GateKind::Xor {
                let candidates: Vec<SignedAtom> = g.outputs.iter().map(|o| c.channel(*o).clone()).collect();
                let pick = g
                    .scorer
                    .as_deref()
                    .and_then(|name| c.scorer(name))
                    .and_then(|s| argmax(s.as_ref(), &candidates))
                    .unwrap_or(0);
                if let Some(&o) = g.outputs.get(pick) {
                    activate(o, &mut active);
                }
            } else {
                for &o in &g.outputs {
                    activate(o, &mut active);
                }
            }
        }

        unresolved = None;
        for (gi, gen) in c.generators.iter().enumerate().filter(|(_, g)| on(g.switch)) {
            let fires = gen
                .guard
                .as_ref()
                .is_none_or(|guard| guard.condition.holds(&guard.inputs, |id| active[id.0]));
            if !fires {
                continue;
            }
            match choices.get(&gi) {
                Some(sel) => {
                    for &alt in sel {
                        for &ch in &gen.alternatives[alt] {
                            activate(ch, &mut active);
                        }
                    }
                }
                None => {
                    unresolved.get_or_insert(gi);
                }
            }
        }

        if !changed {
            break;
        }
    }
    Outcome {
        state: ActivationState { active },
        unresolved,
    }
}

/// Propagates `inputs` through `c` to the least fixpoint.
///
/// Every generator whose guard fires must have an entry in `choices`;
/// the first one without is reported as an error.
pub fn propagate(c: &Circuit, inputs: &[ChannelId], choices: &Selections) -> Result<ActivationState> {
    for (&g, sel) in choices {
        check_selection(c, g, sel)?;
    }
    let out = run(c, inputs, choices, None);
    match out.unresolved {
        Some(g) => Err(Error::UnresolvedGenerator {
            generator: c.generators[g].name.clone(),
        }),
        None => Ok(out.state),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EnumerateOptions {
    pub max_choice_points: u32,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions {
            max_choice_points: DEFAULT_MAX_CHOICE_POINTS,
        }
    }
}

impl EnumerateOptions {
    /// Default options, with the limit taken from `IG_MAX_CHOICES` when set.
    pub fn from_env() -> Self {
        let max_choice_points = std::env::var(MAX_CHOICES_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_MAX_CHOICE_POINTS);
        EnumerateOptions { max_choice_points }
    }
}

pub fn enumerate_models(c: &Circuit) -> Result<Vec<Model>> {
    enumerate_models_with(c, EnumerateOptions::default())
}

/// All consistent models of `c`, deduplicated and sorted by their literals.
///
/// Generators are branched on lazily, lowest index first, and only once
/// their guard fires. Branches that reach a contradiction are pruned
/// immediately since activation only grows.
pub fn enumerate_models_with(c: &Circuit, options: EnumerateOptions) -> Result<Vec<Model>> {
    let points = c.choice_points();
    if points > options.max_choice_points {
        return Err(Error::ChoiceLimit {
            points,
            limit: options.max_choice_points,
        });
    }
    let mut search = Search {
        found: BTreeMap::new(),
        seen: HashSet::new(),
    };
    let mut choices = Selections::new();
    explore(c, &mut choices, &mut search);
    Ok(search.found.into_values().collect())
}

struct Search {
    found: BTreeMap<Vec<SignedAtom>, Model>,
    // (active channels, resolved generators) already expanded; the rest of
    // the search depends on nothing else, so a repeat adds no models
    seen: HashSet<(Vec<bool>, Vec<usize>)>,
}

fn explore(c: &Circuit, choices: &mut Selections, search: &mut Search) {
    let out = run(c, &[], choices, None);
    if !out.state.is_consistent() {
        return;
    }
    if !search
        .seen
        .insert((out.state.active.clone(), choices.keys().copied().collect()))
    {
        return;
    }
    match out.unresolved {
        None => {
            let provenance = choices
                .iter()
                .map(|(&g, sel)| {
                    let gen = &c.generators[g];
                    Choice {
                        generator: gen.name.clone(),
                        selected: sel
                            .iter()
                            .flat_map(|&a| gen.alternatives[a].iter().map(|ch| c.channel(*ch).to_string()))
                            .collect(),
                    }
                })
                .collect();
            let model = Model {
                values: out.state.values(c),
                provenance,
            };
            search.found.entry(model.literals()).or_insert(model);
        }
        Some(g) => {
            for sel in c.generators[g].selections() {
                choices.insert(g, sel);
                explore(c, choices, search);
                choices.remove(&g);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquivalenceMode {
    /// Compare the programs as written; their vocabularies must match.
    AsIs,
    /// Classicalize both over the union of their atoms first.
    Classical,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    /// A model found in only one program; `side` says which.
    Counterexample { model: Model, side: Side },
}

/// Grounds, compiles and enumerates both programs, then compares model sets.
pub fn check_equivalence(p1: &Program, p2: &Program, mode: EquivalenceMode) -> Result<Equivalence> {
    let (g1, g2) = (ground_program(p1)?, ground_program(p2)?);
    let (a1, a2) = (atoms_of(&g1), atoms_of(&g2));
    let (g1, g2) = match mode {
        EquivalenceMode::AsIs => {
            if a1 != a2 {
                let names = |s: BTreeSet<&GroundAtom>| s.into_iter().map(|a| a.to_string()).collect();
                return Err(Error::VocabularyMismatch {
                    only_first: names(a1.difference(&a2).collect()),
                    only_second: names(a2.difference(&a1).collect()),
                });
            }
            (g1, g2)
        }
        EquivalenceMode::Classical => {
            let all: BTreeSet<GroundAtom> = a1.union(&a2).cloned().collect();
            (classicalize_over(&g1, &all), classicalize_over(&g2, &all))
        }
    };
    let options = EnumerateOptions::from_env();
    let m1 = enumerate_models_with(&compile(&g1)?, options)?;
    let m2 = enumerate_models_with(&compile(&g2)?, options)?;
    let k1: BTreeSet<Vec<SignedAtom>> = m1.iter().map(Model::literals).collect();
    let k2: BTreeSet<Vec<SignedAtom>> = m2.iter().map(Model::literals).collect();

    let first = m1.iter().find(|m| !k2.contains(&m.literals())).map(|m| (m, Side::First));
    let second = m2.iter().find(|m| !k1.contains(&m.literals())).map(|m| (m, Side::Second));
    let pick = match (first, second) {
        (Some(a), Some(b)) => Some(if a.0.literals() <= b.0.literals() { a } else { b }),
        (a, b) => a.or(b),
    };
    Ok(match pick {
        None => Equivalence::Equivalent,
        Some((model, side)) => Equivalence::Counterexample {
            model: model.clone(),
            side,
        },
    })
}
