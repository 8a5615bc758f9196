//! Independent reference implementations and random program generators
//! shared by the integration tests and the acceptance run.
//!
//! Nothing here calls the grounder, compiler or engines of the library; the
//! oracles work from the parsed syntax tree only.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use inference_gates::dsl::{parse_program, Connective, Literal, Program, Rule, Sign, Statement, Term};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A ground atom as `(predicate, args)`.
pub type Atom = (String, Vec<String>);

pub fn atom_name(a: &Atom) -> String {
    if a.1.is_empty() {
        a.0.clone()
    } else {
        format!("{}({})", a.0, a.1.join(","))
    }
}

/// A model as the sorted list of its signed atoms, `-` for false.
pub fn model_key(assignment: &BTreeMap<Atom, bool>) -> Vec<String> {
    // sort like the library: by atom, then positive before negative, which
    // for total assignments is just atom order
    assignment
        .iter()
        .map(|(a, v)| if *v { atom_name(a) } else { format!("-{}", atom_name(a)) })
        .collect()
}

type Binding = BTreeMap<String, String>;

fn instantiate(lit: &Literal, b: &Binding) -> Atom {
    let args = lit
        .args
        .iter()
        .map(|t| match t {
            Term::Constant(c) => c.clone(),
            Term::Variable(v) => b[v].clone(),
        })
        .collect();
    (lit.predicate.clone(), args)
}

fn holds(lit: &Literal, b: &Binding, m: &BTreeMap<Atom, bool>) -> bool {
    let v = m[&instantiate(lit, b)];
    match lit.sign {
        Sign::Positive => v,
        Sign::Negative => !v,
    }
}

fn bindings(vars: &[String], domain: &[String], base: &Binding) -> Vec<Binding> {
    let mut out = vec![base.clone()];
    for v in vars {
        out = out
            .into_iter()
            .flat_map(|b| {
                domain.iter().map(move |c| {
                    let mut b = b.clone();
                    b.insert(v.clone(), c.clone());
                    b
                })
            })
            .collect();
    }
    out
}

fn vars_of(lits: &[Literal]) -> BTreeSet<String> {
    lits.iter().flat_map(|l| l.variables().map(str::to_string)).collect()
}

/// Every ground atom any literal of `p` can denote over `domain`.
pub fn herbrand_base(p: &Program, domain: &[String]) -> BTreeSet<Atom> {
    let mut out = BTreeSet::new();
    for s in &p.statements {
        for lit in s.literals() {
            let vars: Vec<String> = lit.variables().map(str::to_string).collect();
            for b in bindings(&vars, domain, &Binding::new()) {
                out.insert(instantiate(lit, &b));
            }
        }
    }
    out
}

fn side_holds(lits: &[Literal], conn: Connective, b: &Binding, m: &BTreeMap<Atom, bool>) -> bool {
    match conn {
        Connective::Or => lits.iter().any(|l| holds(l, b, m)),
        // exclusive heads are read inclusively: under a free choice for
        // every atom, an exactly-one generator is satisfied by any true head
        Connective::Xor => lits.iter().any(|l| holds(l, b, m)),
        _ => lits.iter().all(|l| holds(l, b, m)),
    }
}

/// Classical first-order satisfaction of one statement: shared variables
/// are universal, body-only variables existential in the body, head-only
/// variables existential in the head.
fn statement_holds(s: &Statement, domain: &[String], m: &BTreeMap<Atom, bool>) -> bool {
    match s {
        Statement::DomainDecl { .. } => true,
        Statement::Choice { alternatives } => {
            let all: Vec<String> = vars_of(alternatives).into_iter().collect();
            bindings(&all, domain, &Binding::new())
                .iter()
                .all(|b| alternatives.iter().filter(|l| holds(l, b, m)).count() == 1)
        }
        Statement::Constraint { body } => {
            let all: Vec<String> = vars_of(body).into_iter().collect();
            !bindings(&all, domain, &Binding::new())
                .iter()
                .any(|b| body.iter().all(|l| holds(l, b, m)))
        }
        Statement::Rule(r) => {
            let hv = vars_of(&r.head);
            let bv = vars_of(&r.body);
            let shared: Vec<String> = hv.intersection(&bv).cloned().collect();
            let body_only: Vec<String> = bv.difference(&hv).cloned().collect();
            let head_only: Vec<String> = hv.difference(&bv).cloned().collect();
            bindings(&shared, domain, &Binding::new()).iter().all(|b| {
                let body = r.body.is_empty()
                    || bindings(&body_only, domain, b)
                        .iter()
                        .any(|bb| side_holds(&r.body, r.body_connective, bb, m));
                // facts quantify their variables universally
                let head = if r.body.is_empty() {
                    bindings(&head_only, domain, b)
                        .iter()
                        .all(|hb| side_holds(&r.head, r.head_connective, hb, m))
                } else {
                    bindings(&head_only, domain, b)
                        .iter()
                        .any(|hb| side_holds(&r.head, r.head_connective, hb, m))
                };
                !body || head
            })
        }
    }
}

/// All total assignments over the Herbrand base of `p` that classically
/// satisfy every statement, as sorted model keys.
pub fn classical_models(p: &Program, domain: &[String]) -> BTreeSet<Vec<String>> {
    let base: Vec<Atom> = herbrand_base(p, domain).into_iter().collect();
    assert!(base.len() <= 20, "oracle base too large: {}", base.len());
    let mut out = BTreeSet::new();
    for mask in 0u32..(1 << base.len()) {
        let m: BTreeMap<Atom, bool> = base
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), mask & (1 << i) != 0))
            .collect();
        if p.statements.iter().all(|s| statement_holds(s, domain, &m)) {
            out.insert(model_key(&m));
        }
    }
    out
}

/// A ground signed literal in the forward-chaining oracle.
type Signed = (String, bool);

fn signed(l: &Literal) -> Signed {
    let a = (l.predicate.clone(), l.args.iter().map(|t| t.name().to_string()).collect());
    (atom_name(&a), l.sign == Sign::Positive)
}

/// Least set of signed literals closed under the rules and under the
/// completion of each constraint. Input must be ground and free of
/// disjunctive heads and choices.
pub fn forward_chain(rules: &[Statement]) -> BTreeSet<Signed> {
    let mut known: BTreeSet<Signed> = BTreeSet::new();
    loop {
        let before = known.len();
        for s in rules {
            match s {
                Statement::Rule(r) => {
                    let body: Vec<Signed> = r.body.iter().map(signed).collect();
                    let fires = match r.body_connective {
                        Connective::Or => body.iter().any(|l| known.contains(l)),
                        _ => body.iter().all(|l| known.contains(l)),
                    };
                    if fires {
                        known.extend(r.head.iter().map(signed));
                    }
                }
                Statement::Constraint { body } => {
                    let lits: Vec<Signed> = body.iter().map(signed).collect();
                    for (i, l) in lits.iter().enumerate() {
                        if lits.iter().enumerate().all(|(j, o)| j == i || known.contains(o)) {
                            known.insert((l.0.clone(), !l.1));
                        }
                    }
                }
                _ => panic!("forward_chain takes rules and constraints only"),
            }
        }
        if known.len() == before {
            return known;
        }
    }
}

/// Brute-force possible-world probability of `query` (`x` or `-x`, ground,
/// propositional or not) for a ground program whose only randomness is
/// probability annotations. `-x` holds when `x` is not derived.
pub fn switch_oracle(text: &str, query: &str) -> f64 {
    let p = parse_program(text).unwrap();
    let statements: Vec<&Statement> = p
        .statements
        .iter()
        .filter(|s| !matches!(s, Statement::DomainDecl { .. }))
        .collect();
    let annotated: Vec<usize> = statements
        .iter()
        .enumerate()
        .filter(|(_, s)| matches!(s, Statement::Rule(Rule { probability: Some(_), .. })))
        .map(|(i, _)| i)
        .collect();
    let (want, positive) = match query.strip_prefix('-') {
        Some(rest) => (rest.replace(' ', ""), false),
        None => (query.replace(' ', ""), true),
    };
    let (mut hit, mut total) = (0.0, 0.0);
    for mask in 0u32..(1 << annotated.len()) {
        let mut weight = 1.0;
        let mut kept = Vec::new();
        for (i, s) in statements.iter().enumerate() {
            match annotated.iter().position(|&a| a == i) {
                Some(k) => {
                    let Statement::Rule(r) = s else { unreachable!() };
                    let pr = r.probability.unwrap();
                    if mask & (1 << k) != 0 {
                        weight *= pr;
                        kept.push((*s).clone());
                    } else {
                        weight *= 1.0 - pr;
                    }
                }
                None => kept.push((*s).clone()),
            }
        }
        let known = forward_chain(&kept);
        let consistent = !known.iter().any(|(a, v)| *v && known.contains(&(a.clone(), false)));
        if !consistent {
            continue;
        }
        total += weight;
        if known.contains(&(want.clone(), true)) == positive {
            hit += weight;
        }
    }
    hit / total
}

const PROP_ATOMS: [&str; 6] = ["a", "b", "c", "d", "e", "f"];

fn lit_text(rng: &mut ChaCha8Rng, atoms: &[&str]) -> String {
    let a = atoms.choose(rng).unwrap();
    if rng.gen_bool(0.3) {
        format!("-{a}")
    } else {
        a.to_string()
    }
}

fn join_lits(rng: &mut ChaCha8Rng, atoms: &[&str], n: usize, sep: &str) -> String {
    (0..n).map(|_| lit_text(rng, atoms)).collect::<Vec<_>>().join(sep)
}

/// Knobs for [`random_program`].
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub atoms: usize,
    pub rules: usize,
    pub allow_choices: bool,
    pub allow_disjunctive_heads: bool,
    pub allow_constraints: bool,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            atoms: 6,
            rules: 8,
            allow_choices: true,
            allow_disjunctive_heads: true,
            allow_constraints: true,
        }
    }
}

/// A random propositional program over at most `shape.atoms` atoms with at
/// most `shape.rules` statements, as DSL text.
pub fn random_program(seed: u64, shape: Shape) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_atoms = rng.gen_range(2..=shape.atoms);
    let atoms = &PROP_ATOMS[..n_atoms];
    let n = rng.gen_range(1..=shape.rules);
    let mut out = Vec::new();
    for _ in 0..n {
        let roll: f64 = rng.gen();
        if shape.allow_choices && roll < 0.1 {
            let mut pick: Vec<&str> = atoms.to_vec();
            pick.shuffle(&mut rng);
            let k = rng.gen_range(2..=3.min(pick.len()));
            out.push(format!("1{{{}}}1.", pick[..k].join("; ")));
        } else if shape.allow_constraints && roll < 0.2 {
            let k = rng.gen_range(1..=3);
            out.push(format!(":- {}.", join_lits(&mut rng, atoms, k, ", ")));
        } else if roll < 0.3 {
            out.push(format!("{}.", lit_text(&mut rng, atoms)));
        } else {
            let heads = rng.gen_range(1..=2);
            let head_sep = if heads > 1 && shape.allow_disjunctive_heads && rng.gen_bool(0.4) {
                "; "
            } else {
                ", "
            };
            let body = rng.gen_range(1..=3);
            let body_sep = if rng.gen_bool(0.3) { "; " } else { ", " };
            out.push(format!(
                "{} :- {}.",
                join_lits(&mut rng, atoms, heads, head_sep),
                join_lits(&mut rng, atoms, body, body_sep)
            ));
        }
    }
    out.join("\n")
}

/// A random first-order program over constants `c1`, `c2` with unary `p`,
/// `q`, binary `r` and nullary `s`: at most 9 ground atoms.
pub fn random_first_order_program(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let term = |rng: &mut ChaCha8Rng| -> &'static str { ["X", "Y", "X", "Y", "c1", "c2"].choose(rng).unwrap() };
    let lit = |rng: &mut ChaCha8Rng| -> String {
        let sign = if rng.gen_bool(0.25) { "-" } else { "" };
        match rng.gen_range(0..4) {
            0 => format!("{sign}p({})", term(rng)),
            1 => format!("{sign}q({})", term(rng)),
            2 => format!("{sign}r({}, {})", term(rng), term(rng)),
            _ => format!("{sign}s"),
        }
    };
    let mut out = vec!["#entity c1, c2.".to_string()];
    let n = rng.gen_range(1..=6);
    for _ in 0..n {
        let roll: f64 = rng.gen();
        if roll < 0.15 {
            // ground facts keep the models from being too free
            let c = ["c1", "c2"].choose(&mut rng).unwrap();
            out.push(format!("p({c})."));
        } else if roll < 0.25 {
            let k = rng.gen_range(1..=2);
            let body: Vec<String> = (0..k).map(|_| lit(&mut rng)).collect();
            out.push(format!(":- {}.", body.join(", ")));
        } else {
            let heads = rng.gen_range(1..=2);
            let head: Vec<String> = (0..heads).map(|_| lit(&mut rng)).collect();
            let k = rng.gen_range(1..=2);
            let body: Vec<String> = (0..k).map(|_| lit(&mut rng)).collect();
            let head_sep = if heads > 1 && rng.gen_bool(0.5) { "; " } else { ", " };
            let body_sep = if rng.gen_bool(0.3) { "; " } else { ", " };
            out.push(format!("{} :- {}.", head.join(head_sep), body.join(body_sep)));
        }
    }
    out.join("\n")
}

pub fn seeds(count: u64, salt: u64) -> impl Iterator<Item = u64> {
    (0..count).map(move |i| i.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ salt)
}
