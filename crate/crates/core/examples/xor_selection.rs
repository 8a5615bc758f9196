//! An exclusive-or head becomes a deterministic gate when a scorer decides
//! which output to activate; without one it stays a free choice.

use std::sync::Arc;

use inference_gates::circuit::{compile, compile_with, CompileOptions};
use inference_gates::digital::{enumerate_models, propagate, Selections};
use inference_gates::dsl::parse_program;
use inference_gates::ground::ground_program;
use inference_gates::scorer::TableScorer;

fn main() -> Result<(), inference_gates::Error> {
    let program = ground_program(&parse_program("animal.\ndog ^ cat ^ bird :- animal.")?)?;

    let free = compile(&program)?;
    println!("as a generator:");
    for m in enumerate_models(&free)? {
        println!("    {m}");
    }

    let prior = TableScorer::new(
        "prior",
        [("dog".to_string(), 0.5), ("cat".to_string(), 0.3), ("bird".to_string(), 0.2)],
        0.0,
    );
    let c = compile_with(&program, &CompileOptions { xor_scorer: Some(Arc::new(prior)) })?;
    let state = propagate(&c, &[], &Selections::new())?;
    let on: Vec<String> = state.active_ids().map(|id| c.channel(id).to_string()).collect();
    println!("with the prior scorer: {}", on.join(" "));
    Ok(())
}
