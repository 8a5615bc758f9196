//! A constraint becomes the family of rules that enforce it in a circuit.

use inference_gates::circuit::complete_constraint;
use inference_gates::dsl::{format_statement, parse_literal, Statement};

fn main() {
    let body: Vec<_> = ["a", "b", "-p"].iter().map(|s| parse_literal(s).unwrap()).collect();
    println!(":- a, b, -p.  completes to");
    for rule in complete_constraint(&body) {
        println!("    {}", format_statement(&Statement::Rule(rule)));
    }
}
