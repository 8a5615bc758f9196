//! Rule proposals from a planted synthetic dataset, then one proposal
//! applied to a program.

use inference_gates::circuit::compile;
use inference_gates::dsl::{format_program, parse_program};
use inference_gates::learn::{apply_proposal, count, propose_rules, LearnOptions, Synthetic};

fn main() -> Result<(), inference_gates::Error> {
    let episodes = Synthetic::default().generate();
    let stats = count(&episodes)?;
    let proposals = propose_rules(&stats, &LearnOptions { dual: true, ..LearnOptions::default() });
    for p in &proposals {
        print!("{}", p.to_dsl());
        println!("    % {:?}, PMI {:.2} bits, joint {}", p.kind, p.evidence.pmi, p.evidence.joint);
    }

    let base = parse_program("a. b.")?;
    let learned = apply_proposal(&base, &proposals[1]);
    println!("---\n{}", format_program(&learned));
    println!(
        "gates before {}, after {}",
        compile(&base)?.gates.len(),
        compile(&learned)?.gates.len()
    );
    Ok(())
}
