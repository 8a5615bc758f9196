mod common;

use std::collections::BTreeSet;

use common::{random_program, Shape};
use inference_gates::circuit::{compile, Circuit, SignedAtom};
use inference_gates::digital::{enumerate_models, propagate, ActivationState, Selections};
use inference_gates::dsl::{format_program, parse_program, Program};
use inference_gates::ground::ground_program;
use inference_gates::learn::{count, propose_rules, Episode, LearnOptions};
use inference_gates::prob::{formula, oracle_conditional, Expr, JointTable};
use inference_gates::vectors::{contrast, detach, direction_between, fuse, merge, ConceptVector};
use proptest::prelude::*;
use rand::SeedableRng;

fn circuit(text: &str) -> Circuit {
    compile(&ground_program(&parse_program(text).unwrap()).unwrap()).unwrap()
}

fn first_selection_everywhere(c: &Circuit) -> Selections {
    (0..c.generators.len()).map(|g| (g, vec![0])).collect()
}

fn active(s: &ActivationState) -> BTreeSet<usize> {
    s.active_ids().map(|c| c.0).collect()
}

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 256,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn propagation_is_monotone_and_idempotent(seed in any::<u64>(), picks in proptest::collection::vec(any::<bool>(), 12)) {
        let c = circuit(&random_program(seed, Shape::default()));
        let sel = first_selection_everywhere(&c);
        let n = c.channel_count();
        let small: Vec<_> = c.channels().map(|(id, _)| id).filter(|id| picks[id.0 % 12] && id.0 % 3 == 0).collect();
        let large: Vec<_> = c.channels().map(|(id, _)| id).filter(|id| picks[id.0 % 12]).collect();
        let s1 = active(&propagate(&c, &small, &sel).unwrap());
        let s2 = active(&propagate(&c, &large, &sel).unwrap());
        prop_assert!(s1.is_subset(&s2));
        let again: Vec<_> = c.channels().map(|(id, _)| id).filter(|id| s2.contains(&id.0)).collect();
        prop_assert_eq!(active(&propagate(&c, &again, &sel).unwrap()), s2.clone());
        prop_assert!(s2.len() <= n);
    }

    #[test]
    fn every_model_literal_is_supported(seed in any::<u64>()) {
        let c = circuit(&random_program(seed, Shape::default()));
        for m in enumerate_models(&c).unwrap() {
            let lits: BTreeSet<SignedAtom> = m.literals().into_iter().collect();
            let chosen: BTreeSet<String> = m.provenance.iter().flat_map(|p| p.selected.iter().cloned()).collect();
            let on = |id: &inference_gates::circuit::ChannelId| lits.contains(c.channel(*id));
            for l in &lits {
                let id = c.channel_id(l).unwrap();
                let fact = c.facts.iter().any(|f| f.channel == id);
                let gate = c.gates.iter().any(|g| g.outputs.contains(&id) && g.condition.holds(&g.inputs, |i| on(&i)));
                prop_assert!(fact || gate || chosen.contains(&l.to_string()), "unsupported {} in {}", l, m);
            }
        }
    }

    #[test]
    fn enumeration_is_deterministic_and_order_independent(seed in any::<u64>()) {
        let text = random_program(seed, Shape::default());
        let p = parse_program(&text).unwrap();
        let show = |p: &Program| -> Vec<String> {
            enumerate_models(&compile(&ground_program(p).unwrap()).unwrap())
                .unwrap()
                .iter()
                .map(|m| m.to_string())
                .collect()
        };
        let first = show(&p);
        prop_assert_eq!(&first, &show(&p));
        let mut reversed = p.clone();
        reversed.statements.reverse();
        prop_assert_eq!(&first, &show(&reversed));
        prop_assert_eq!(format_program(&p), format_program(&reversed));
    }

    #[test]
    fn fuse_detach_round_trip(pairs in proptest::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 1..9)) {
        let a = ConceptVector::new("a", pairs.iter().map(|p| p.0).collect());
        let b = ConceptVector::new("b", pairs.iter().map(|p| p.1).collect());
        let f = fuse(&a, &b).unwrap();
        prop_assert_eq!(&f, &fuse(&b, &a).unwrap());
        prop_assert!(f.range.components.iter().all(|r| *r >= 0.0));
        for (target, other) in [(&a, &b), (&b, &a)] {
            let back = detach(&f, &direction_between(target, other)).unwrap();
            for (x, y) in back.components.iter().zip(&target.components) {
                prop_assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
            }
        }
    }

    #[test]
    fn contrast_conserves_and_decreases(
        p in proptest::collection::vec(-10f64..10.0, 3),
        dict in proptest::collection::vec(proptest::collection::vec(-10f64..10.0, 3), 1..5),
    ) {
        let p = ConceptVector::new("p", p);
        let dict: Vec<ConceptVector> = dict.into_iter().enumerate().map(|(i, v)| ConceptVector::new(format!("d{i}"), v)).collect();
        let c = contrast(&p, &dict, 20).unwrap();
        let mut parts = c.extracted.clone();
        parts.push(c.residual.clone());
        let total = merge(&parts).unwrap();
        for (x, y) in total.components.iter().zip(&p.components) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
        prop_assert!(c.residual_norms.windows(2).all(|w| w[1] < w[0]));
        prop_assert_eq!(c.residual_norms.len(), c.extracted.len() + 1);
    }

    #[test]
    fn exact_forms_match_oracle(seed in any::<u64>()) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let t = JointTable::random(&["a", "b", "p", "q"], &mut rng);
        let (a, b, p, q) = (Expr::var("a"), Expr::var("b"), Expr::var("p"), Expr::var("q"));
        let exact = [
            (1, oracle_conditional(&t, &p, &a.clone().and(b.clone())).unwrap()),
            (3, oracle_conditional(&t, &p.clone().and(q.clone()), &a).unwrap()),
            (4, oracle_conditional(&t, &p.clone().or(q.clone()), &a).unwrap()),
            (6, oracle_conditional(&t, &p.clone().xor(q.clone()), &a).unwrap()),
        ];
        for (form, oracle) in exact {
            prop_assert!((formula(form, &t).unwrap() - oracle).abs() <= 1e-9, "form {}", form);
        }
        let pq = oracle_conditional(&t, &p.and(q), &a).unwrap();
        prop_assert!((formula(4, &t).unwrap() - (pq + formula(6, &t).unwrap())).abs() <= 1e-9);
    }

    #[test]
    fn pmi_symmetric_and_support_monotone(
        episodes in proptest::collection::vec(proptest::collection::btree_set(0usize..6, 1..4), 1..60),
        low in 1u64..6,
        extra in 0u64..6,
    ) {
        let names = ["a", "b", "c", "d", "e", "f"];
        let eps: Vec<Episode> = episodes.iter().map(|e| Episode::new(e.iter().map(|i| names[*i])).unwrap()).collect();
        let s = count(&eps).unwrap();
        for x in names {
            for y in names {
                prop_assert_eq!(s.pmi(x, y), s.pmi(y, x));
            }
        }
        let show = |min_support| -> BTreeSet<String> {
            propose_rules(&s, &LearnOptions { min_support, k: usize::MAX, ..LearnOptions::default() })
                .iter()
                .map(|p| p.to_dsl())
                .collect()
        };
        prop_assert!(show(low + extra).is_subset(&show(low)));
        for p in propose_rules(&s, &LearnOptions::default()) {
            if p.kind == inference_gates::learn::ProposalKind::Comprehension {
                prop_assert!(p.evidence.pmi >= 1.0 && p.evidence.joint >= 5);
            }
        }
    }
}
