//! Brute-force reference implementations used to validate the main pipeline.
//!
//! Nothing here shares code with the paths it checks: retrieval is an
//! explicit-index bilinear scan, and question answering is plain token
//! overlap. These exist for tests and self-checks, not for production use.

use std::collections::BTreeSet;

use crate::corpus::{Episode, QAItem};
use crate::numcore::Matrix;

/// Number of distinct tokens shared by two token lists.
pub fn token_overlap(a: &[String], b: &[String]) -> usize {
    let sa: BTreeSet<&str> = a.iter().map(String::as_str).collect();
    let sb: BTreeSet<&str> = b.iter().map(String::as_str).collect();
    sa.intersection(&sb).count()
}

/// Index of the candidate with the greatest token overlap against `probe`,
/// lowest index on ties.
pub fn best_by_overlap(probe: &[String], candidates: &[Vec<String>]) -> usize {
    let mut best = 0usize;
    let mut best_score = usize::MIN;
    for (i, c) in candidates.iter().enumerate() {
        let s = token_overlap(probe, c);
        if s > best_score {
            best_score = s;
            best = i;
        }
    }
    best
}

/// Answers a question by pure token overlap: pick the story overlapping the
/// correct-answer evidence via the question, fuse, then pick the answer
/// overlapping the fused sequence. Returns (story index, answer index).
pub fn overlap_answer(q: &QAItem, stories: &[Vec<String>]) -> (usize, usize) {
    let story_idx = best_by_overlap(&q.question, stories);
    let mut fused = q.question.clone();
    fused.extend(stories[story_idx].iter().cloned());
    let answers: Vec<Vec<String>> = q.answers.iter().cloned().collect();
    let answer_idx = best_by_overlap_probe_each(&answers, &fused);
    (story_idx, answer_idx)
}

/// Argmax over candidate probes against one target, lowest index on ties.
fn best_by_overlap_probe_each(probes: &[Vec<String>], target: &[String]) -> usize {
    let mut best = 0usize;
    let mut best_score = usize::MIN;
    for (i, p) in probes.iter().enumerate() {
        let s = token_overlap(p, target);
        if s > best_score {
            best_score = s;
            best = i;
        }
    }
    best
}

/// Fraction of questions whose planted answer the overlap pipeline recovers,
/// with stories taken as ground-truth description plus dialogue.
pub fn overlap_pipeline_accuracy(episodes: &[Episode]) -> f64 {
    let mut hits = 0usize;
    let mut total = 0usize;
    for ep in episodes {
        let stories: Vec<Vec<String>> = ep
            .pairs
            .iter()
            .map(|p| {
                p.description
                    .iter()
                    .chain(p.dialogue.iter())
                    .cloned()
                    .collect()
            })
            .collect();
        for qa in &ep.qa_items {
            let (_, answer) = overlap_answer(qa, &stories);
            total += 1;
            if answer == qa.correct_answer_index {
                hits += 1;
            }
        }
    }
    hits as f64 / total as f64
}

/// Exhaustive description retrieval with explicit index arithmetic:
/// `argmax_i sum_a sum_b c[a] * M[a][b] * e_i[b]`, lowest index on ties.
pub fn exhaustive_retrieve(combined: &[f64], features: &[Vec<f64>], m: &Matrix) -> usize {
    let mut best = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    for (i, e) in features.iter().enumerate() {
        let mut score = 0.0;
        for a in 0..combined.len() {
            for b in 0..e.len() {
                score += combined[a] * m.get(a, b) * e[b];
            }
        }
        if score > best_score {
            best_score = score;
            best = i;
        }
    }
    best
}
