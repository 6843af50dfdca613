//! Toy featurizers standing in for pretrained extractors.
//!
//! Scenes get per-frame attribute-basis vectors that are average-pooled and
//! unit-normalized. Sentences get seeded random token embeddings averaged
//! under a fixed position decay, then unit-normalized. Both are deterministic
//! functions of their inputs and the configured feature seed, so the same
//! scene or sentence always maps to the same vector.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CorpusConfig, FrameSpec};
use crate::error::{Error, Result};
use crate::numcore::{axpy, l2_normalize};

/// FNV-1a over bytes; stable across platforms and Rust releases.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Deterministic direction vector for a namespaced key.
fn basis_vector(namespace: &str, key: &str, dim: usize, seed: u64) -> Vec<f64> {
    let tag = format!("{seed}/{namespace}/{key}");
    let mut rng = ChaCha8Rng::seed_from_u64(fnv1a64(tag.as_bytes()));
    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Pools the attribute-basis vectors of each frame by arithmetic mean and
/// normalizes the result to unit length.
pub fn featurize_scene(spec: &[FrameSpec], cfg: &CorpusConfig) -> Result<Vec<f64>> {
    if spec.is_empty() {
        return Err(Error::Degenerate {
            op: "featurize_scene",
            norm: 0.0,
        });
    }
    let dim = cfg.scene_dim;
    let mut pooled = vec![0.0; dim];
    for frame in spec {
        let c = basis_vector("character", &frame.character.to_string(), dim, cfg.feature_seed);
        let a = basis_vector("action", &frame.action.to_string(), dim, cfg.feature_seed);
        let l = basis_vector("location", &frame.location.to_string(), dim, cfg.feature_seed);
        for i in 0..dim {
            pooled[i] += (c[i] + a[i] + l[i]) / 3.0;
        }
    }
    let inv = 1.0 / spec.len() as f64;
    pooled.iter_mut().for_each(|x| *x *= inv);
    l2_normalize(&pooled).map_err(|_| Error::Degenerate {
        op: "featurize_scene",
        norm: 0.0,
    })
}

/// Averages seeded token embeddings under a fixed position decay and
/// normalizes to unit length. `dim` selects the target space (dialogue or
/// description), which may differ.
pub fn featurize_sentence(tokens: &[String], dim: usize, cfg: &CorpusConfig) -> Result<Vec<f64>> {
    if tokens.is_empty() {
        return Err(Error::Degenerate {
            op: "featurize_sentence",
            norm: 0.0,
        });
    }
    let mut pooled = vec![0.0; dim];
    let mut weight_sum = 0.0;
    let mut weight = 1.0;
    for token in tokens {
        let emb = basis_vector("token", token, dim, cfg.feature_seed);
        axpy(&mut pooled, weight, &emb);
        weight_sum += weight;
        weight *= cfg.sentence_decay;
    }
    pooled.iter_mut().for_each(|x| *x /= weight_sum);
    l2_normalize(&pooled).map_err(|_| Error::Degenerate {
        op: "featurize_sentence",
        norm: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::{dot, l2_norm};

    fn cfg() -> CorpusConfig {
        CorpusConfig::default()
    }

    fn frame(c: u32, a: u32, l: u32) -> FrameSpec {
        FrameSpec {
            character: c,
            action: a,
            location: l,
        }
    }

    #[test]
    fn scene_feature_has_configured_dimension() {
        let mut c = cfg();
        c.scene_dim = 2048;
        let v = featurize_scene(&[frame(0, 1, 2)], &c).unwrap();
        assert_eq!(v.len(), 2048);
        assert!((l2_norm(&v) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_frame_scene_is_normalized_frame_basis() {
        let c = cfg();
        let one = featurize_scene(&[frame(1, 2, 3)], &c).unwrap();
        let repeated = featurize_scene(&[frame(1, 2, 3); 4], &c).unwrap();
        // pooling identical frames changes nothing after normalization
        for (a, b) in one.iter().zip(&repeated) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn scene_feature_is_frame_order_invariant() {
        let c = cfg();
        let frames = vec![frame(0, 1, 2), frame(3, 4, 5), frame(6, 2, 1)];
        let mut reversed = frames.clone();
        reversed.reverse();
        let a = featurize_scene(&frames, &c).unwrap();
        let b = featurize_scene(&reversed, &c).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_scene_is_degenerate() {
        assert!(matches!(
            featurize_scene(&[], &cfg()),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn sentence_feature_has_configured_dimension() {
        let toks: Vec<String> = ["a", "b"].iter().map(|s| s.to_string()).collect();
        let v = featurize_sentence(&toks, 4800, &cfg()).unwrap();
        assert_eq!(v.len(), 4800);
        assert!((l2_norm(&v) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sentence_feature_is_deterministic() {
        let toks: Vec<String> = ["we", "love", "singing"].iter().map(|s| s.to_string()).collect();
        let a = featurize_sentence(&toks, 48, &cfg()).unwrap();
        let b = featurize_sentence(&toks, 48, &cfg()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_sentence_is_degenerate() {
        assert!(matches!(
            featurize_sentence(&[], 48, &cfg()),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn distinct_sentences_stay_distinct() {
        // Monte Carlo distinctness: random sentences with different token
        // multisets should not collide. Reorderings of the same multiset are
        // intentionally close (the position decay is a weak signal) and are
        // skipped here.
        let c = cfg();
        let words = [
            "alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel", "india",
            "juliet", "kilo", "lima", "mike", "november", "oscar", "papa",
        ];
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move |bound: usize| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % bound as u64) as usize
        };
        let mut sentences: Vec<Vec<String>> = Vec::new();
        while sentences.len() < 100 {
            let len = 3 + next(5);
            let toks: Vec<String> = (0..len).map(|_| words[next(words.len())].to_string()).collect();
            sentences.push(toks);
        }
        let feats: Vec<Vec<f64>> = sentences
            .iter()
            .map(|s| featurize_sentence(s, 48, &c).unwrap())
            .collect();
        let multiset = |s: &Vec<String>| {
            let mut m = s.clone();
            m.sort();
            m
        };
        for i in 0..sentences.len() {
            for j in (i + 1)..sentences.len() {
                if multiset(&sentences[i]) == multiset(&sentences[j]) {
                    continue;
                }
                let cos = dot(&feats[i], &feats[j]).unwrap();
                assert!(
                    cos < 0.99,
                    "{:?} vs {:?} cosine {cos} too close",
                    sentences[i],
                    sentences[j]
                );
            }
        }
    }
}
