//! Pluggable selection metrics.
//!
//! The same interface picks the output of an exclusive-or gate (candidates
//! are signed atoms) and the direction of a detachment (candidates are
//! vectors). Higher scores win; ties go to the earliest candidate.

use std::collections::BTreeMap;

pub trait Scorer<C: ?Sized>: Send + Sync {
    fn name(&self) -> &str;

    /// Must return a finite value.
    fn score(&self, candidate: &C) -> f64;
}

/// Scores every candidate equally, so tie-breaking alone decides.
#[derive(Debug, Clone, Copy, Default)]
pub struct Uniform;

impl<C: ?Sized> Scorer<C> for Uniform {
    fn name(&self) -> &str {
        "uniform"
    }

    fn score(&self, _candidate: &C) -> f64 {
        0.0
    }
}

/// Wraps a closure.
pub struct FnScorer<F> {
    name: String,
    f: F,
}

impl<F> FnScorer<F> {
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnScorer { name: name.into(), f }
    }
}

impl<C: ?Sized, F: Fn(&C) -> f64 + Send + Sync> Scorer<C> for FnScorer<F> {
    fn name(&self) -> &str {
        &self.name
    }

    fn score(&self, candidate: &C) -> f64 {
        (self.f)(candidate)
    }
}

/// Looks scores up by the candidate's display text; unknown candidates get
/// `default`. Handy for ranking alternatives by prior probability.
#[derive(Debug, Clone)]
pub struct TableScorer {
    name: String,
    scores: BTreeMap<String, f64>,
    default: f64,
}

impl TableScorer {
    pub fn new(name: impl Into<String>, scores: impl IntoIterator<Item = (String, f64)>, default: f64) -> Self {
        TableScorer {
            name: name.into(),
            scores: scores.into_iter().collect(),
            default,
        }
    }
}

impl<C: ?Sized + std::fmt::Display> Scorer<C> for TableScorer {
    fn name(&self) -> &str {
        &self.name
    }

    fn score(&self, candidate: &C) -> f64 {
        self.scores
            .get(&candidate.to_string())
            .copied()
            .unwrap_or(self.default)
    }
}

/// Index of the highest-scoring candidate, first one on ties.
pub fn argmax<C, S>(scorer: &S, candidates: &[C]) -> Option<usize>
where
    S: Scorer<C> + ?Sized,
{
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        let s = scorer.score(c);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}
