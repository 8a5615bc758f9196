//! Annotated statements are independent switches; a query's probability is
//! the mass of the worlds where it holds.

use inference_gates::dsl::{parse_literal, parse_program};
use inference_gates::prob::{enumerate_worlds, query_prob};

fn main() -> Result<(), inference_gates::Error> {
    let program = parse_program("0.5 :: a.\n0.3 :: b :- a.")?;
    for w in enumerate_worlds(&program)? {
        let model = w.model().map_or("contradiction".to_string(), |m| format!("{{{m}}}"));
        println!("switches {:?}  weight {:.2}  {model}", w.switches, w.weight);
    }
    let b = parse_literal("b")?;
    println!("P(b)     = {:.12}", query_prob(&program, &b, &[])?);
    println!("P(b | a) = {:.12}", query_prob(&program, &b, &[parse_literal("a")?])?);
    println!("P(-b)    = {:.12}", query_prob(&program, &parse_literal("-b")?, &[])?);
    Ok(())
}
