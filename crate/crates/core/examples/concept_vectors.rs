//! Merge and contrast, fuse and detach on small vectors.

use inference_gates::scorer::FnScorer;
use inference_gates::vectors::{contrast, detach, detach_scored, direction_between, fuse, merge, ConceptVector};

fn main() -> Result<(), inference_gates::Error> {
    let a = ConceptVector::new("a", vec![3.0, 0.0, 0.0]);
    let b = ConceptVector::new("b", vec![0.0, 2.0, 0.0]);
    let c = ConceptVector::new("c", vec![0.0, 0.0, 1.0]);
    let p = merge(&[a.clone(), b.clone(), c.clone()])?;
    println!("merge a+b+c = {:?}", p.components);

    let parts = contrast(&p, &[c, b, a.clone()], 10)?;
    let labels: Vec<&str> = parts.extracted.iter().map(|v| v.label.as_str()).collect();
    println!("contrast extracts {labels:?}, residual norms {:?}", parts.residual_norms);

    let x = ConceptVector::new("x", vec![1.0, 3.0]);
    let y = ConceptVector::new("y", vec![3.0, 1.0]);
    let f = fuse(&x, &y)?;
    println!("fuse x,y: center {:?} range {:?}", f.center.components, f.range.components);
    println!("detach toward x: {:?}", detach(&f, &direction_between(&x, &y))?.components);

    let near_y = FnScorer::new("near-y", |v: &[f64]| -(v[0] - 3.0).abs() - (v[1] - 1.0).abs());
    let (dir, v) = detach_scored(&f, &near_y)?;
    println!("scored detach picks direction {dir:?} -> {:?}", v.components);
    Ok(())
}
