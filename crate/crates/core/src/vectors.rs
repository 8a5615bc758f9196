//! The four core operations on real-valued concept vectors.
//!
//! Merge adds parts into a compound; contrast peels parts back off one at a
//! time, always taking the dictionary element that leaves the smallest
//! residual. Fuse keeps a pair as a center plus a per-axis half-width, and
//! detach picks a corner of that box again.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scorer::Scorer;

/// Upper bound on the number of nonzero-range axes a scorer may rank over.
pub const MAX_DETACH_AXES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptVector {
    pub label: String,
    pub components: Vec<f64>,
}

impl ConceptVector {
    pub fn new(label: impl Into<String>, components: Vec<f64>) -> ConceptVector {
        ConceptVector {
            label: label.into(),
            components,
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.components)
    }

    fn check_finite(&self) -> Result<()> {
        if self.components.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("vector `{}` has non-finite components", self.label)))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionResult {
    pub center: ConceptVector,
    /// Componentwise half-distance between the fused points; never negative.
    pub range: ConceptVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contrast {
    pub extracted: Vec<ConceptVector>,
    pub residual: ConceptVector,
    /// Residual norm before the first and after every extraction.
    pub residual_norms: Vec<f64>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn same_dim(expected: usize, v: &ConceptVector) -> Result<()> {
    if v.dim() == expected {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected,
            found: v.dim(),
        })
    }
}

pub fn merge(parts: &[ConceptVector]) -> Result<ConceptVector> {
    let first = parts
        .first()
        .ok_or_else(|| Error::InvalidInput("merge needs at least one vector".into()))?;
    let mut sum = vec![0.0; first.dim()];
    for p in parts {
        same_dim(first.dim(), p)?;
        p.check_finite()?;
        for (s, x) in sum.iter_mut().zip(&p.components) {
            *s += x;
        }
    }
    let label = parts.iter().map(|p| p.label.as_str()).collect::<Vec<_>>().join("+");
    Ok(ConceptVector::new(label, sum))
}

/// Greedy residual decomposition of `p` over `dictionary`.
///
/// Each step subtracts the element closest to the current residual, but only
/// if that strictly lowers the residual norm. Ties go to the earlier
/// element. Elements may be extracted more than once.
pub fn contrast(p: &ConceptVector, dictionary: &[ConceptVector], max_steps: usize) -> Result<Contrast> {
    if dictionary.is_empty() {
        return Err(Error::InvalidInput("contrast needs a non-empty dictionary".into()));
    }
    p.check_finite()?;
    for d in dictionary {
        same_dim(p.dim(), d)?;
        d.check_finite()?;
    }
    let mut residual = p.components.clone();
    let mut extracted = Vec::new();
    let mut norms = vec![norm(&residual)];
    for _ in 0..max_steps {
        let current = *norms.last().unwrap();
        let best = dictionary
            .iter()
            .map(|d| distance(&residual, &d.components))
            .enumerate()
            .fold(None::<(usize, f64)>, |best, (i, e)| match best {
                Some((_, b)) if b <= e => best,
                _ => Some((i, e)),
            });
        let Some((i, _)) = best else { break };
        let next: Vec<f64> = residual.iter().zip(&dictionary[i].components).map(|(r, c)| r - c).collect();
        // recompute rather than trust the distance so the recorded norms
        // are exactly those of the stored residuals
        let next_norm = norm(&next);
        if next_norm >= current {
            break;
        }
        residual = next;
        norms.push(next_norm);
        extracted.push(dictionary[i].clone());
    }
    Ok(Contrast {
        extracted,
        residual: ConceptVector::new(format!("{}-residual", p.label), residual),
        residual_norms: norms,
    })
}

pub fn fuse(a: &ConceptVector, b: &ConceptVector) -> Result<FusionResult> {
    same_dim(a.dim(), b)?;
    a.check_finite()?;
    b.check_finite()?;
    let (center, range) = a
        .components
        .iter()
        .zip(&b.components)
        .map(|(x, y)| ((x + y) / 2.0, (x - y).abs() / 2.0))
        .unzip();
    // label order is irrelevant to the result, so keep it symmetric
    let (lo, hi) = if a.label <= b.label { (&a.label, &b.label) } else { (&b.label, &a.label) };
    Ok(FusionResult {
        center: ConceptVector::new(format!("{lo}~{hi}"), center),
        range: ConceptVector::new(format!("{lo}~{hi}-range"), range),
    })
}

/// `center + direction ∘ range`, with `direction` drawn from {-1, 0, 1}.
pub fn detach(f: &FusionResult, direction: &[i8]) -> Result<ConceptVector> {
    same_dim(f.center.dim(), &f.range)?;
    if direction.len() != f.center.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.center.dim(),
            found: direction.len(),
        });
    }
    if let Some(d) = direction.iter().find(|d| !matches!(d, -1..=1)) {
        return Err(Error::InvalidInput(format!("direction component {d} is not -1, 0 or 1")));
    }
    Ok(point(f, direction))
}

fn point(f: &FusionResult, direction: &[i8]) -> ConceptVector {
    let components = f
        .center
        .components
        .iter()
        .zip(&f.range.components)
        .zip(direction)
        .map(|((c, r), d)| match d {
            0 => *c,
            _ => c + f64::from(*d) * r,
        })
        .collect();
    ConceptVector::new(format!("{}-detached", f.center.label), components)
}

/// The sign pattern that reconstructs `a` from `fuse(a, b)`.
pub fn direction_between(a: &ConceptVector, b: &ConceptVector) -> Vec<i8> {
    a.components
        .iter()
        .zip(&b.components)
        .map(|(x, y)| if x > y { 1 } else if x < y { -1 } else { 0 })
        .collect()
}

/// Candidate direction patterns in lexicographic order (-1 before +1),
/// varying only the axes with nonzero range.
pub fn candidate_directions(f: &FusionResult) -> Result<Vec<Vec<i8>>> {
    let axes: Vec<usize> = (0..f.range.dim()).filter(|&i| f.range.components[i] != 0.0).collect();
    if axes.len() > MAX_DETACH_AXES {
        return Err(Error::InvalidInput(format!(
            "{} axes with nonzero range exceed the limit of {MAX_DETACH_AXES} for scored detachment",
            axes.len()
        )));
    }
    let k = axes.len();
    Ok((0u32..(1 << k))
        .map(|bits| {
            let mut d = vec![0i8; f.range.dim()];
            for (j, &axis) in axes.iter().enumerate() {
                // the first axis is the most significant bit
                d[axis] = if bits & (1 << (k - 1 - j)) != 0 { 1 } else { -1 };
            }
            d
        })
        .collect())
}

/// Detaches the candidate point the scorer rates highest; ties go to the
/// lexicographically smallest direction.
pub fn detach_scored<S: Scorer<[f64]> + ?Sized>(f: &FusionResult, scorer: &S) -> Result<(Vec<i8>, ConceptVector)> {
    same_dim(f.center.dim(), &f.range)?;
    let mut best: Option<(f64, Vec<i8>, ConceptVector)> = None;
    for d in candidate_directions(f)? {
        let v = point(f, &d);
        let s = scorer.score(&v.components);
        if !s.is_finite() {
            return Err(Error::InvalidInput(format!("scorer `{}` returned {s}", scorer.name())));
        }
        if best.as_ref().is_none_or(|(b, _, _)| s > *b) {
            best = Some((s, d, v));
        }
    }
    let (_, d, v) = best.expect("at least the all-zero candidate exists");
    Ok((d, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scorer::{FnScorer, Uniform};

    fn cv(label: &str, c: &[f64]) -> ConceptVector {
        ConceptVector::new(label, c.to_vec())
    }

    #[test]
    fn merge_sums() {
        let m = merge(&[cv("a", &[4.0, 0.0]), cv("b", &[2.0, 0.0])]).unwrap();
        assert_eq!(m.components, [6.0, 0.0]);
        assert_eq!(merge(&[cv("v", &[1.5])]).unwrap().components, [1.5]);
        assert!(matches!(
            merge(&[cv("a", &[1.0]), cv("b", &[1.0, 2.0])]),
            Err(Error::DimensionMismatch { expected: 1, found: 2 })
        ));
        assert!(merge(&[]).is_err());
    }

    #[test]
    fn contrast_takes_larger_part_first() {
        let d = [cv("b", &[2.0, 0.0]), cv("a", &[4.0, 0.0])];
        let c = contrast(&cv("p", &[6.0, 0.0]), &d, 10).unwrap();
        let labels: Vec<&str> = c.extracted.iter().map(|v| v.label.as_str()).collect();
        assert_eq!(labels, ["a", "b"]);
        assert_eq!(c.residual.components, [0.0, 0.0]);
        assert_eq!(c.residual_norms, [6.0, 2.0, 0.0]);
    }

    #[test]
    fn contrast_of_zero_extracts_nothing() {
        let c = contrast(&cv("p", &[0.0, 0.0]), &[cv("a", &[1.0, 0.0])], 10).unwrap();
        assert!(c.extracted.is_empty());
        assert_eq!(c.residual.components, [0.0, 0.0]);
    }

    #[test]
    fn contrast_orthogonal_parts_by_norm() {
        let d = [cv("c", &[0.0, 0.0, 1.0]), cv("a", &[3.0, 0.0, 0.0]), cv("b", &[0.0, 2.0, 0.0])];
        let c = contrast(&cv("p", &[3.0, 2.0, 1.0]), &d, 10).unwrap();
        let labels: Vec<&str> = c.extracted.iter().map(|v| v.label.as_str()).collect();
        assert_eq!(labels, ["a", "b", "c"]);
        assert_eq!(c.residual.norm(), 0.0);
    }

    #[test]
    fn contrast_respects_max_steps() {
        let c = contrast(&cv("p", &[5.0]), &[cv("u", &[1.0])], 3).unwrap();
        assert_eq!(c.extracted.len(), 3);
        assert_eq!(c.residual.components, [2.0]);
        assert!(contrast(&cv("p", &[5.0]), &[], 3).is_err());
    }

    #[test]
    fn fuse_and_detach() {
        let a = cv("a", &[1.0, 3.0]);
        let b = cv("b", &[3.0, 1.0]);
        let f = fuse(&a, &b).unwrap();
        assert_eq!(f.center.components, [2.0, 2.0]);
        assert_eq!(f.range.components, [1.0, 1.0]);
        assert_eq!(f, fuse(&b, &a).unwrap());
        assert_eq!(detach(&f, &[-1, 1]).unwrap().components, [1.0, 3.0]);
        assert_eq!(detach(&f, &direction_between(&b, &a)).unwrap().components, [3.0, 1.0]);
        assert!(detach(&f, &[2, 0]).is_err());
        assert!(matches!(detach(&f, &[1]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn zero_range_detaches_to_center() {
        let a = cv("a", &[1.0, -2.0]);
        let f = fuse(&a, &a).unwrap();
        assert_eq!(f.center.components, a.components);
        assert_eq!(f.range.components, [0.0, 0.0]);
        for d in [[1, 1], [-1, 0], [0, -1]] {
            assert_eq!(detach(&f, &d).unwrap().components, a.components);
        }
    }

    #[test]
    fn scored_detach() {
        let f = fuse(&cv("a", &[1.0, 0.0, 3.0]), &cv("b", &[3.0, 0.0, 1.0])).unwrap();
        let dirs = candidate_directions(&f).unwrap();
        assert_eq!(dirs, [vec![-1, 0, -1], vec![-1, 0, 1], vec![1, 0, -1], vec![1, 0, 1]]);
        let (d, v) = detach_scored(&f, &Uniform).unwrap();
        assert_eq!(d, [-1, 0, -1]);
        assert_eq!(v.components, [1.0, 0.0, 1.0]);
        let near_b = FnScorer::new("near-b", |x: &[f64]| -distance(x, &[3.0, 0.0, 1.0]));
        assert_eq!(detach_scored(&f, &near_b).unwrap().1.components, [3.0, 0.0, 1.0]);
        let nan = FnScorer::new("nan", |_: &[f64]| f64::NAN);
        assert!(detach_scored(&f, &nan).is_err());
    }

    #[test]
    fn scored_detach_guard() {
        let a = cv("a", &[0.0; 17]);
        let b = cv("b", &[1.0; 17]);
        assert!(detach_scored(&fuse(&a, &b).unwrap(), &Uniform).is_err());
    }

    #[test]
    fn vectors_round_trip_json() {
        let f = fuse(&cv("a", &[1.0]), &cv("b", &[2.0])).unwrap();
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<FusionResult>(&text).unwrap(), f);
    }
}
