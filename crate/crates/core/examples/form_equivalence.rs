//! A disjunctive body is the same as one rule per disjunct, and a
//! conjunctive head the same as one rule per head, under classical
//! semantics. Dropping a body literal is not.

use inference_gates::digital::{check_equivalence, Equivalence, EquivalenceMode};
use inference_gates::dsl::parse_program;

fn main() -> Result<(), inference_gates::Error> {
    let pairs = [
        ("p :- a; b.", "p :- a. p :- b."),
        ("p, q :- a.", "p :- a. q :- a."),
        ("p :- a, b.", "p :- a."),
    ];
    for (left, right) in pairs {
        let verdict = check_equivalence(&parse_program(left)?, &parse_program(right)?, EquivalenceMode::Classical)?;
        match verdict {
            Equivalence::Equivalent => println!("{left:<12} ≡ {right}"),
            Equivalence::Counterexample { model, side } => {
                println!("{left:<12} ≢ {right}   ({{{model}}} only in the {side:?} program)")
            }
        }
    }
    Ok(())
}
