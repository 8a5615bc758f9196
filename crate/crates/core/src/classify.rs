//! Dependency-form and mechanism labels for rules.
//!
//! | form | pattern               | mechanism      | operation   |
//! |------|-----------------------|----------------|-------------|
//! | 1    | `p :- a, b.`          | comprehension  | merge       |
//! | 2    | `p :- a; b.`          | generalization | fusion      |
//! | 3    | `p, q :- a.`          | description    | contrast    |
//! | 4    | `p; q :- a.`          | specification  | detachment  |
//!
//! Rules with a one-literal head and body count as degenerate form 1.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fmt::Write as _;

use serde::Serialize;

use crate::dsl::{format_statement, Connective, Literal, Program, Rule, Statement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Form {
    #[serde(rename = "1")]
    ConjunctiveBody = 1,
    #[serde(rename = "2")]
    DisjunctiveBody = 2,
    #[serde(rename = "3")]
    ConjunctiveHead = 3,
    #[serde(rename = "4")]
    DisjunctiveHead = 4,
}

impl Form {
    pub const ALL: [Form; 4] = [
        Form::ConjunctiveBody,
        Form::DisjunctiveBody,
        Form::ConjunctiveHead,
        Form::DisjunctiveHead,
    ];

    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn mechanism(self) -> Mechanism {
        match self {
            Form::ConjunctiveBody => Mechanism::Comprehension,
            Form::DisjunctiveBody => Mechanism::Generalization,
            Form::ConjunctiveHead => Mechanism::Description,
            Form::DisjunctiveHead => Mechanism::Specification,
        }
    }

    /// Forms that must be operational before this one.
    pub fn prerequisites(self) -> &'static [Form] {
        match self {
            Form::ConjunctiveBody => &[],
            Form::DisjunctiveBody | Form::ConjunctiveHead => &[Form::ConjunctiveBody],
            Form::DisjunctiveHead => &[Form::ConjunctiveBody, Form::ConjunctiveHead],
        }
    }

    pub fn dual(self) -> Form {
        match self {
            Form::ConjunctiveBody => Form::ConjunctiveHead,
            Form::ConjunctiveHead => Form::ConjunctiveBody,
            Form::DisjunctiveBody => Form::DisjunctiveHead,
            Form::DisjunctiveHead => Form::DisjunctiveBody,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mechanism {
    Comprehension,
    Generalization,
    Description,
    Specification,
}

impl Mechanism {
    pub fn form(self) -> Form {
        match self {
            Mechanism::Comprehension => Form::ConjunctiveBody,
            Mechanism::Generalization => Form::DisjunctiveBody,
            Mechanism::Description => Form::ConjunctiveHead,
            Mechanism::Specification => Form::DisjunctiveHead,
        }
    }
}

impl fmt::Display for Mechanism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mechanism::Comprehension => "comprehension",
            Mechanism::Generalization => "generalization",
            Mechanism::Description => "description",
            Mechanism::Specification => "specification",
        })
    }
}

/// How a form-1 rule merges its inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MergeKind {
    /// Modifies one entity (`angrydog(X) :- dog(X), angry(X).`).
    Morphism,
    /// Builds a whole from related parts, via binary predicates or
    /// existential variables.
    Composition,
}

/// How a form-3 rule unpacks its input. A naming convention: unary heads
/// individuate, binary heads instantiate parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ContrastKind {
    Individuation,
    Instantiation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FormLabel {
    pub form: Form,
    pub mechanism: Mechanism,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub merge_kind: Option<MergeKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contrast_kind: Option<ContrastKind>,
}

fn body_only_variables(r: &Rule) -> bool {
    let head: BTreeSet<&str> = r.head.iter().flat_map(Literal::variables).collect();
    r.body.iter().flat_map(Literal::variables).any(|v| !head.contains(v))
}

pub fn classify_rule(r: &Rule) -> FormLabel {
    let form = if r.head.len() > 1 {
        match r.head_connective {
            Connective::Or | Connective::Xor => Form::DisjunctiveHead,
            _ => Form::ConjunctiveHead,
        }
    } else if r.body.len() > 1 && r.body_connective == Connective::Or {
        Form::DisjunctiveBody
    } else {
        Form::ConjunctiveBody
    };

    let merge_kind = (form == Form::ConjunctiveBody).then(|| {
        if r.body.iter().any(|l| l.arity() == 2) || body_only_variables(r) {
            MergeKind::Composition
        } else {
            MergeKind::Morphism
        }
    });
    let contrast_kind = (form == Form::ConjunctiveHead).then(|| {
        if r.head.iter().any(|l| l.arity() == 2) {
            ContrastKind::Instantiation
        } else {
            ContrastKind::Individuation
        }
    });

    FormLabel {
        form,
        mechanism: form.mechanism(),
        merge_kind,
        contrast_kind,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RuleLabel {
    /// Position of the rule among the program's statements.
    pub statement: usize,
    pub rule: String,
    #[serde(flatten)]
    pub label: FormLabel,
}

/// Single-head rules that together spell out a form-2 or form-3 rule: the
/// same head with different one-literal bodies, or the same body with
/// different heads.
#[derive(Debug, Clone, Serialize)]
pub struct SplitGroup {
    pub form: Form,
    pub shared: String,
    pub rules: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualityPair {
    pub left: Mechanism,
    pub right: Mechanism,
    pub present: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct MissingPrerequisite {
    pub mechanism: Mechanism,
    pub missing: Vec<Mechanism>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct MechanismReport {
    pub labels: Vec<RuleLabel>,
    pub split_groups: Vec<SplitGroup>,
    pub forms_present: Vec<Form>,
    pub duality_pairs: Vec<DualityPair>,
    pub emergence_order: Vec<Mechanism>,
    pub missing_prerequisites: Vec<MissingPrerequisite>,
}

fn split_groups(labels: &[(usize, &Rule)]) -> Vec<SplitGroup> {
    let mut by_head: BTreeMap<String, Vec<&Rule>> = BTreeMap::new();
    let mut by_body: BTreeMap<String, Vec<&Rule>> = BTreeMap::new();
    for (_, r) in labels {
        if r.head.len() != 1 {
            continue;
        }
        if r.body.len() == 1 {
            by_head.entry(r.head[0].to_string()).or_default().push(r);
        }
        if r.body_connective != Connective::Or {
            let mut body: Vec<String> = r.body.iter().map(Literal::to_string).collect();
            body.sort();
            by_body.entry(body.join(", ")).or_default().push(r);
        }
    }
    let text = |r: &&Rule| format_statement(&Statement::Rule((*r).clone()));
    let mut out = Vec::new();
    for (form, groups) in [(Form::DisjunctiveBody, by_head), (Form::ConjunctiveHead, by_body)] {
        for (shared, rules) in groups {
            let mut rules: Vec<String> = rules.iter().map(text).collect();
            rules.sort();
            rules.dedup();
            if rules.len() >= 2 {
                out.push(SplitGroup { form, shared, rules });
            }
        }
    }
    out
}

/// Topological order of the present forms under [`Form::prerequisites`],
/// lowest form number first among the ready ones. Also requires
/// generalization before specification when both are present.
fn emergence_order(present: &BTreeSet<Form>) -> Vec<Mechanism> {
    let depends = |f: Form, g: Form| {
        f.prerequisites().contains(&g) || (f == Form::DisjunctiveHead && g == Form::DisjunctiveBody)
    };
    let mut remaining: BTreeSet<Form> = present.clone();
    let mut order = Vec::new();
    while let Some(&next) = remaining
        .iter()
        .find(|&&f| !remaining.iter().any(|&g| g != f && depends(f, g)))
    {
        remaining.remove(&next);
        order.push(next.mechanism());
    }
    order
}

pub fn mechanism_report(p: &Program) -> MechanismReport {
    let rules: Vec<(usize, &Rule)> = p
        .statements
        .iter()
        .enumerate()
        .filter_map(|(i, s)| match s {
            Statement::Rule(r) if !r.is_fact() => Some((i, r)),
            _ => None,
        })
        .collect();
    if rules.is_empty() {
        return MechanismReport::default();
    }

    let labels: Vec<RuleLabel> = rules
        .iter()
        .map(|&(statement, r)| RuleLabel {
            statement,
            rule: format_statement(&Statement::Rule(r.clone())),
            label: classify_rule(r),
        })
        .collect();
    let split_groups = split_groups(&rules);

    let present: BTreeSet<Form> = labels
        .iter()
        .map(|l| l.label.form)
        .chain(split_groups.iter().map(|g| g.form))
        .collect();

    let duality_pairs = [Form::ConjunctiveBody, Form::DisjunctiveBody]
        .into_iter()
        .map(|f| DualityPair {
            left: f.mechanism(),
            right: f.dual().mechanism(),
            present: present.contains(&f) && present.contains(&f.dual()),
        })
        .collect();

    let missing_prerequisites = present
        .iter()
        .filter_map(|f| {
            let missing: Vec<Mechanism> = f
                .prerequisites()
                .iter()
                .filter(|g| !present.contains(g))
                .map(|g| g.mechanism())
                .collect();
            (!missing.is_empty()).then_some(MissingPrerequisite {
                mechanism: f.mechanism(),
                missing,
            })
        })
        .collect();

    MechanismReport {
        labels,
        split_groups,
        forms_present: present.iter().copied().collect(),
        duality_pairs,
        emergence_order: emergence_order(&present),
        missing_prerequisites,
    }
}

impl MechanismReport {
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Plain-text table followed by the summary lines.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let width = self.labels.iter().map(|l| l.rule.len()).max().unwrap_or(4).max(4);
        let _ = writeln!(out, "{:<width$}  form  mechanism       detail", "rule");
        for l in &self.labels {
            let detail = match (l.label.merge_kind, l.label.contrast_kind) {
                (Some(MergeKind::Morphism), _) => "merge by morphism",
                (Some(MergeKind::Composition), _) => "merge by composition",
                (_, Some(ContrastKind::Individuation)) => "contrast as individuation",
                (_, Some(ContrastKind::Instantiation)) => "contrast as instantiation",
                _ => "",
            };
            let _ = writeln!(
                out,
                "{:<width$}  {:<4}  {:<14}  {}",
                l.rule,
                l.label.form.number(),
                l.label.mechanism.to_string(),
                detail
            );
        }
        for g in &self.split_groups {
            let _ = writeln!(
                out,
                "split form {} on `{}`: {}",
                g.form.number(),
                g.shared,
                g.rules.join(" ")
            );
        }
        for d in &self.duality_pairs {
            let _ = writeln!(
                out,
                "duality {} <-> {}: {}",
                d.left,
                d.right,
                if d.present { "both present" } else { "incomplete" }
            );
        }
        let order: Vec<String> = self.emergence_order.iter().map(Mechanism::to_string).collect();
        let _ = writeln!(out, "emergence order: {}", order.join(" -> "));
        for m in &self.missing_prerequisites {
            let missing: Vec<String> = m.missing.iter().map(Mechanism::to_string).collect();
            let _ = writeln!(out, "missing before {}: {}", m.mechanism, missing.join(", "));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_program;
    use crate::ground::ground_program;

    fn label(text: &str) -> FormLabel {
        let p = parse_program(text).unwrap();
        let r = p.rules().last().unwrap();
        classify_rule(r)
    }

    fn report(text: &str) -> MechanismReport {
        mechanism_report(&parse_program(text).unwrap())
    }

    #[test]
    fn conjunction_in_body() {
        let l = label("p :- a, b.");
        assert_eq!(l.form, Form::ConjunctiveBody);
        assert_eq!(l.mechanism, Mechanism::Comprehension);
        assert_eq!(l.merge_kind, Some(MergeKind::Morphism));
    }

    #[test]
    fn disjunction_in_head() {
        let l = label("dog(X); cat(X) :- mammal(X).");
        assert_eq!(l.form, Form::DisjunctiveHead);
        assert_eq!(l.mechanism, Mechanism::Specification);
        assert_eq!(label("p ^ q :- a.").form, Form::DisjunctiveHead);
    }

    #[test]
    fn composition() {
        let l = label("car(X) :- engine(Y), wheels(Z), has(X,Y), has(X,Z).");
        assert_eq!(l.form, Form::ConjunctiveBody);
        assert_eq!(l.mechanism, Mechanism::Comprehension);
        assert_eq!(l.merge_kind, Some(MergeKind::Composition));
    }

    #[test]
    fn remaining_forms() {
        assert_eq!(label("mammal(X) :- dog(X); cat(X).").form, Form::DisjunctiveBody);
        let l = label("dog(X), angry(X) :- angrydog(X).");
        assert_eq!(l.form, Form::ConjunctiveHead);
        assert_eq!(l.contrast_kind, Some(ContrastKind::Individuation));
        assert_eq!(label("has(X,Y), tail(Y) :- dog(X), tailof(X,Y).").contrast_kind, Some(ContrastKind::Instantiation));
        assert_eq!(label("p :- a.").form, Form::ConjunctiveBody);
    }

    #[test]
    fn invariant_under_grounding() {
        let text = "#entity rex, tom. angrydog(X) :- dog(X), angry(X). mammal(X) :- dog(X); cat(X). dog(X), angry(X) :- angrydog(X). dog(X); cat(X) :- mammal(X).";
        let p = parse_program(text).unwrap();
        let g = ground_program(&p).unwrap();
        let shape = |r: &Rule| {
            let preds = |ls: &[Literal]| ls.iter().map(|l| l.predicate.clone()).collect::<BTreeSet<_>>();
            (preds(&r.head), preds(&r.body))
        };
        for r in p.rules() {
            let expected = classify_rule(r);
            let instances: Vec<&Rule> = g.rules().filter(|gr| shape(gr) == shape(r)).collect();
            assert_eq!(instances.len(), 2);
            for gr in instances {
                assert_eq!(classify_rule(gr).form, expected.form);
            }
        }
    }

    #[test]
    fn emergence_order_with_forms_1_2_4() {
        let r = report("m :- a, b. g :- a; b. x ; y :- g.");
        assert_eq!(
            r.emergence_order,
            [Mechanism::Comprehension, Mechanism::Generalization, Mechanism::Specification]
        );
        assert_eq!(r.missing_prerequisites.len(), 1);
        assert_eq!(r.missing_prerequisites[0].missing, [Mechanism::Description]);
    }

    #[test]
    fn empty_program() {
        let r = report("");
        assert!(r.is_empty());
        assert!(r.emergence_order.is_empty() && r.duality_pairs.is_empty());
        // facts alone carry no mechanism
        assert!(report("a. b.").is_empty());
    }

    #[test]
    fn only_specification_flags_prerequisites() {
        let r = report("p ; q :- a.");
        assert_eq!(r.emergence_order, [Mechanism::Specification]);
        assert_eq!(r.missing_prerequisites[0].mechanism, Mechanism::Specification);
        assert_eq!(
            r.missing_prerequisites[0].missing,
            [Mechanism::Comprehension, Mechanism::Description]
        );
    }

    #[test]
    fn duality_pairs() {
        let r = report("m :- a, b. a, b :- m.");
        assert!(r.duality_pairs[0].present);
        assert!(!r.duality_pairs[1].present);
    }

    #[test]
    fn split_rules_keep_their_provenance() {
        let r = report("p :- a. p :- b.");
        assert!(r.labels.iter().all(|l| l.label.form == Form::ConjunctiveBody));
        assert_eq!(r.split_groups.len(), 1);
        assert_eq!(r.split_groups[0].form, Form::DisjunctiveBody);
        assert_eq!(r.emergence_order, [Mechanism::Comprehension, Mechanism::Generalization]);

        let r = report("p :- a. q :- a.");
        assert_eq!(r.split_groups[0].form, Form::ConjunctiveHead);
        assert_eq!(r.split_groups[0].shared, "a");
    }

    #[test]
    fn table_mentions_every_rule() {
        let t = report("p :- a, b. p ; q :- c.").to_table();
        assert!(t.contains("p :- a, b."));
        assert!(t.contains("specification"));
        assert!(t.contains("emergence order: comprehension -> specification"));
    }
}
