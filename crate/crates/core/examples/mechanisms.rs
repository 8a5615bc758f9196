//! Every rule is one of four dependency forms, each the signature of an
//! inferential mechanism; the report also checks dualities and the order in
//! which the mechanisms can emerge.

use inference_gates::classify::mechanism_report;
use inference_gates::dsl::parse_program;

fn main() -> Result<(), inference_gates::Error> {
    let program = parse_program(
        "#entity rex, c, e, w.
         mammal(X) :- dog(X); cat(X).
         dog(X); cat(X) :- mammal(X).
         car(X) :- engine(Y), wheels(Z), has(X, Y), has(X, Z).
         engine(Y), wheels(Z) :- car(X), has(X, Y), has(X, Z).
         dog(rex). has(c, e). has(c, w).",
    )?;
    print!("{}", mechanism_report(&program).to_table());
    Ok(())
}
