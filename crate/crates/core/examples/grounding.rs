//! Variables range over the declared constants. Body-only variables turn
//! into alternatives; head-only variables into a disjunctive head.

use inference_gates::dsl::{format_program, parse_program};
use inference_gates::ground::ground_program;

fn main() -> Result<(), inference_gates::Error> {
    let sources = [
        "#entity rex.\nmammal(X) :- dog(X); cat(X).",
        "#entity x, y.\np(X) :- a(X, Y).",
        "#entity x, y.\nanimal(X); plant(X) :- living(X).\nsomething(X) :- thing(X, Y), red(Y).",
    ];
    for src in sources {
        println!("{src}\n  grounds to");
        for line in format_program(&ground_program(&parse_program(src)?)?).lines() {
            println!("    {line}");
        }
        println!();
    }
    Ok(())
}
