//! Free choices over every atom turn enumeration into classical model
//! checking: 7 of the 8 assignments satisfy a ∧ b → p.

use inference_gates::circuit::{classicalize, compile};
use inference_gates::digital::enumerate_models;
use inference_gates::dsl::{format_program, parse_program};
use inference_gates::ground::ground_program;

fn main() -> Result<(), inference_gates::Error> {
    let program = parse_program(":- a, b, -p.")?;
    let classical = classicalize(&inference_gates::circuit::complete_program(&ground_program(&program)?));
    print!("{}", format_program(&classical));
    println!("---");
    for model in enumerate_models(&compile(&classical)?)? {
        let via: Vec<String> = model
            .provenance
            .iter()
            .map(|c| format!("{}={}", c.generator, c.selected.join("+")))
            .collect();
        println!("{model:<10} via {}", via.join(" "));
    }
    Ok(())
}
