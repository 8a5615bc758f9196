//! Rule induction from co-activation data.
//!
//! Atoms that fire together far more often than chance suggest a compound
//! (`m_a_b :- a, b.`); atoms that exclude each other yet keep the same
//! company suggest a common generalization (`g_a_b :- a; b.`). Association
//! strength is pointwise mutual information in bits.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dsl::{format_statement, parse_literal, Connective, Literal, Program, Rule, Sign, Statement};
use crate::error::{Error, Result};

/// The atoms active during one observation tick.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Episode {
    active: BTreeSet<String>,
}

impl Episode {
    /// Every name must read as a positive ground atom such as `a` or
    /// `has(x,y)`.
    pub fn new<S: AsRef<str>>(atoms: impl IntoIterator<Item = S>) -> Result<Episode> {
        let mut active = BTreeSet::new();
        for a in atoms {
            let a = a.as_ref();
            let lit = parse_literal(a).map_err(|e| Error::InvalidInput(format!("episode atom `{a}`: {e}")))?;
            if lit.sign == Sign::Negative || !lit.is_ground() {
                return Err(Error::InvalidInput(format!("episode atom `{a}` must be a positive ground atom")));
            }
            active.insert(lit.to_string());
        }
        if active.is_empty() {
            return Err(Error::InvalidInput("an episode needs at least one active atom".into()));
        }
        Ok(Episode { active })
    }

    pub fn active(&self) -> &BTreeSet<String> {
        &self.active
    }
}

impl TryFrom<Vec<String>> for Episode {
    type Error = Error;

    fn try_from(v: Vec<String>) -> Result<Episode> {
        Episode::new(v)
    }
}

impl From<Episode> for Vec<String> {
    fn from(e: Episode) -> Vec<String> {
        e.active.into_iter().collect()
    }
}

/// Reads one JSON array of atom names per line; blank lines are skipped.
pub fn read_episodes(text: &str) -> Result<Vec<Episode>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str::<Episode>(l).map_err(|e| Error::InvalidInput(format!("episode line {}: {e}", i + 1)))
        })
        .collect()
}

pub fn write_episodes(episodes: &[Episode]) -> String {
    episodes
        .iter()
        .map(|e| serde_json::to_string(e).expect("string arrays serialize") + "\n")
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AssociationStats {
    pub episodes: u64,
    pub counts: BTreeMap<String, u64>,
    /// Joint counts keyed by the ordered pair `(a, b)` with `a < b`.
    #[serde(serialize_with = "pairs_as_strings")]
    pub joint: BTreeMap<(String, String), u64>,
}

fn pairs_as_strings<S: serde::Serializer>(
    joint: &BTreeMap<(String, String), u64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_map(joint.iter().map(|((a, b), n)| (format!("{a}|{b}"), n)))
}

fn ordered<'a>(a: &'a str, b: &'a str) -> (&'a str, &'a str) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Exact unigram and pair counts.
pub fn count(episodes: &[Episode]) -> Result<AssociationStats> {
    if episodes.is_empty() {
        return Err(Error::InvalidInput("no episodes to count".into()));
    }
    let mut s = AssociationStats::default();
    for e in episodes {
        s.add(e);
    }
    Ok(s)
}

impl AssociationStats {
    fn add(&mut self, e: &Episode) {
        self.episodes += 1;
        let atoms: Vec<&String> = e.active.iter().collect();
        for (i, a) in atoms.iter().enumerate() {
            *self.counts.entry((*a).clone()).or_default() += 1;
            for b in &atoms[i + 1..] {
                *self.joint.entry(((*a).clone(), (*b).clone())).or_default() += 1;
            }
        }
    }

    /// Combines counts over disjoint episode sets.
    pub fn merge(&mut self, other: &AssociationStats) {
        self.episodes += other.episodes;
        for (a, n) in &other.counts {
            *self.counts.entry(a.clone()).or_default() += n;
        }
        for (k, n) in &other.joint {
            *self.joint.entry(k.clone()).or_default() += n;
        }
    }

    pub fn count(&self, a: &str) -> u64 {
        self.counts.get(a).copied().unwrap_or(0)
    }

    pub fn joint_count(&self, a: &str, b: &str) -> u64 {
        if a == b {
            return self.count(a);
        }
        let (x, y) = ordered(a, b);
        self.joint.get(&(x.to_string(), y.to_string())).copied().unwrap_or(0)
    }

    fn pmi_from(&self, joint: f64, a: &str, b: &str) -> Option<f64> {
        let (ca, cb) = (self.count(a), self.count(b));
        if joint <= 0.0 || ca == 0 || cb == 0 {
            return None;
        }
        Some((self.episodes as f64 * joint / (ca as f64 * cb as f64)).log2())
    }

    /// `log2(N·count(a,b) / (count(a)·count(b)))`; undefined when the pair
    /// never co-occurs or either atom is never seen.
    pub fn pmi(&self, a: &str, b: &str) -> Option<f64> {
        let (x, y) = ordered(a, b);
        self.pmi_from(self.joint_count(x, y) as f64, x, y)
    }

    /// PMI with a never-seen pair counted as half an occurrence, which keeps
    /// exclusive pairs finite and strongly negative.
    pub fn pmi_smoothed(&self, a: &str, b: &str) -> Option<f64> {
        let (x, y) = ordered(a, b);
        let j = self.joint_count(x, y);
        self.pmi_from(if j == 0 { 0.5 } else { j as f64 }, x, y)
    }

    /// Co-occurrence counts of `a` with every atom except `a` and `exclude`,
    /// in name order.
    pub fn context_vector(&self, a: &str, exclude: &str) -> Vec<f64> {
        self.counts
            .keys()
            .filter(|c| c.as_str() != a && c.as_str() != exclude)
            .map(|c| self.joint_count(a, c) as f64)
            .collect()
    }

    /// Cosine similarity of the contexts of `a` and `b`, each ignoring the
    /// other. Zero if either context is empty.
    pub fn context_similarity(&self, a: &str, b: &str) -> f64 {
        let (u, v) = (self.context_vector(a, b), self.context_vector(b, a));
        let dot: f64 = u.iter().zip(&v).map(|(x, y)| x * y).sum();
        let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if nu == 0.0 || nv == 0.0 {
            0.0
        } else {
            dot / (nu * nv)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProposalKind {
    Comprehension,
    Generalization,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub left: String,
    pub right: String,
    pub count_left: u64,
    pub count_right: u64,
    pub joint: u64,
    pub pmi: f64,
    /// Set when the PMI was computed with the half-count for a pair that
    /// never co-occurred.
    pub smoothed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub context_similarity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleProposal {
    pub kind: ProposalKind,
    #[serde(serialize_with = "rule_text")]
    pub rule: Rule,
    #[serde(serialize_with = "opt_rule_text", skip_serializing_if = "Option::is_none")]
    pub dual: Option<Rule>,
    pub score: f64,
    pub evidence: Evidence,
}

fn rule_text<S: serde::Serializer>(r: &Rule, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_statement(&Statement::Rule(r.clone())))
}

fn opt_rule_text<S: serde::Serializer>(r: &Option<Rule>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => rule_text(r, s),
        None => s.serialize_none(),
    }
}

impl RuleProposal {
    pub fn rules(&self) -> Vec<Rule> {
        std::iter::once(self.rule.clone()).chain(self.dual.clone()).collect()
    }

    pub fn to_dsl(&self) -> String {
        self.rules()
            .into_iter()
            .map(|r| format_statement(&Statement::Rule(r)) + "\n")
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnOptions {
    pub theta_pos: f64,
    pub theta_neg: f64,
    pub theta_ctx: f64,
    pub min_support: u64,
    /// Cap on proposals of each kind.
    pub k: usize,
    /// Also propose `a, b :- m_a_b.` for every compound.
    pub dual: bool,
}

impl Default for LearnOptions {
    fn default() -> Self {
        LearnOptions {
            theta_pos: 1.0,
            theta_neg: -1.0,
            theta_ctx: 0.7,
            min_support: 5,
            k: 10,
            dual: false,
        }
    }
}

fn identifier_part(atom: &str) -> String {
    let s: String = atom
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    s.trim_end_matches('_').to_string()
}

fn fresh_name(prefix: &str, a: &str, b: &str, taken: &BTreeMap<String, u64>) -> String {
    let mut name = format!("{prefix}_{}_{}", identifier_part(a), identifier_part(b));
    while taken.contains_key(&name) {
        name.push('_');
    }
    name
}

fn atom(name: &str) -> Literal {
    parse_literal(name).expect("episode atoms were validated when read")
}

fn by_strength(a: &RuleProposal, b: &RuleProposal) -> std::cmp::Ordering {
    b.score
        .abs()
        .total_cmp(&a.score.abs())
        .then_with(|| (&a.evidence.left, &a.evidence.right).cmp(&(&b.evidence.left, &b.evidence.right)))
        .then_with(|| a.kind.cmp(&b.kind))
}

/// Candidate compounds and generalizations, strongest association first.
pub fn propose_rules(s: &AssociationStats, opts: &LearnOptions) -> Vec<RuleProposal> {
    let atoms: Vec<&String> = s.counts.keys().collect();
    let mut comprehension = Vec::new();
    let mut generalization = Vec::new();
    for (i, a) in atoms.iter().enumerate() {
        for b in &atoms[i + 1..] {
            let (ca, cb, j) = (s.count(a), s.count(b), s.joint_count(a, b));
            let evidence = |pmi: f64, smoothed: bool, ctx: Option<f64>| Evidence {
                left: a.to_string(),
                right: b.to_string(),
                count_left: ca,
                count_right: cb,
                joint: j,
                pmi,
                smoothed,
                context_similarity: ctx,
            };
            if let Some(pmi) = s.pmi(a, b) {
                if pmi >= opts.theta_pos && j >= opts.min_support {
                    let head = Literal::pos(fresh_name("m", a, b, &s.counts));
                    let parts = vec![atom(a), atom(b)];
                    let dual = opts
                        .dual
                        .then(|| Rule::new(parts.clone(), Connective::And, vec![head.clone()], Connective::Single));
                    comprehension.push(RuleProposal {
                        kind: ProposalKind::Comprehension,
                        rule: Rule::conj(head, parts),
                        dual,
                        score: pmi,
                        evidence: evidence(pmi, false, None),
                    });
                }
            }
            if ca < opts.min_support || cb < opts.min_support {
                continue;
            }
            let Some(pmi) = s.pmi_smoothed(a, b) else { continue };
            if pmi > opts.theta_neg {
                continue;
            }
            let ctx = s.context_similarity(a, b);
            if ctx >= opts.theta_ctx {
                let head = Literal::pos(fresh_name("g", a, b, &s.counts));
                generalization.push(RuleProposal {
                    kind: ProposalKind::Generalization,
                    rule: Rule::new(vec![head], Connective::Single, vec![atom(a), atom(b)], Connective::Or),
                    dual: None,
                    score: pmi,
                    evidence: evidence(pmi, j == 0, Some(ctx)),
                });
            }
        }
    }
    comprehension.sort_by(by_strength);
    comprehension.truncate(opts.k);
    generalization.sort_by(by_strength);
    generalization.truncate(opts.k);
    let mut all: Vec<RuleProposal> = comprehension.into_iter().chain(generalization).collect();
    all.sort_by(by_strength);
    all
}

/// Adds the proposal's rule (and its dual, if any) to `p`.
pub fn apply_proposal(p: &Program, proposal: &RuleProposal) -> Program {
    let mut out = p.clone();
    for r in proposal.rules() {
        out.push(Statement::Rule(r));
    }
    out
}

/// Parameters of the built-in synthetic dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub episodes: usize,
    pub seed: u64,
    /// Rate of the first planted atom `a`.
    pub pair_rate: f64,
    /// Probability that `b` accompanies `a`.
    pub pair_cooccurrence: f64,
    /// Rate of `b` without `a`.
    pub pair_noise: f64,
    /// Background atoms `c1..cN`, each independently active.
    pub background: usize,
    pub background_rate: f64,
    /// Rates of the mutually exclusive atoms `x` and `y`.
    pub exclusive_rate: f64,
}

impl Default for Synthetic {
    fn default() -> Self {
        Synthetic {
            episodes: 1000,
            seed: 7,
            pair_rate: 0.2,
            pair_cooccurrence: 0.9,
            pair_noise: 0.02,
            background: 8,
            background_rate: 0.1,
            exclusive_rate: 0.3,
        }
    }
}

impl Synthetic {
    /// Episodes with a planted co-occurring pair `a`/`b`, a planted
    /// exclusive pair `x`/`y` whose members keep the same background
    /// company, and independent background atoms. Empty ticks are redrawn.
    pub fn generate(&self) -> Vec<Episode> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.episodes);
        while out.len() < self.episodes {
            let mut active: Vec<String> = Vec::new();
            let has_a = rng.gen_bool(self.pair_rate);
            if has_a {
                active.push("a".into());
            }
            let b_rate = if has_a { self.pair_cooccurrence } else { self.pair_noise };
            if rng.gen_bool(b_rate) {
                active.push("b".into());
            }
            let u: f64 = rng.gen();
            if u < self.exclusive_rate {
                active.push("x".into());
            } else if u < 2.0 * self.exclusive_rate {
                active.push("y".into());
            }
            for i in 1..=self.background {
                if rng.gen_bool(self.background_rate) {
                    active.push(format!("c{i}"));
                }
            }
            if let Ok(e) = Episode::new(&active) {
                out.push(e);
            }
        }
        out
    }
}
