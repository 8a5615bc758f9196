//! The six conditional-probability expressions against exact conditionals,
//! on a random table and on one where a and b never co-occur.

use inference_gates::prob::{compare_formulas, JointTable};
use rand::SeedableRng;

fn show(title: &str, t: &JointTable) {
    println!("{title}");
    for c in compare_formulas(t) {
        let num = |v: Option<f64>| v.map_or("   n/a  ".to_string(), |v| format!("{v:.6}"));
        println!(
            "  form {} {:<22} literal {}  exact {}  |Δ| {}{}",
            c.form,
            c.expression,
            num(c.literal),
            num(c.oracle),
            num(c.deviation),
            c.note.map_or(String::new(), |n| format!("  ({n})"))
        );
    }
}

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    show("random table over a, b, p, q", &JointTable::random(&["a", "b", "p", "q"], &mut rng));
    let exclusive = JointTable::from_assignments(
        &["a", "b", "p"],
        [
            (&[true, false, true][..], 0.25),
            (&[true, false, false][..], 0.25),
            (&[false, true, true][..], 0.25),
            (&[false, true, false][..], 0.25),
        ],
    )
    .unwrap();
    show("a and b mutually exclusive", &exclusive);
}
