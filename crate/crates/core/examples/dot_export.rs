//! Graphviz output for the circuit of a completed constraint with free
//! choices. Pipe into `dot -Tsvg`.

use inference_gates::circuit::{compile, export_dot};
use inference_gates::dsl::parse_program;
use inference_gates::ground::ground_program;

fn main() -> Result<(), inference_gates::Error> {
    let program = parse_program(
        "p :- a, b.  -a :- -p, b.  -b :- -p, a.
         1{a; -a}1.  1{b; -b}1.  1{p; -p}1.",
    )?;
    print!("{}", export_dot(&compile(&ground_program(&program)?)?));
    Ok(())
}
