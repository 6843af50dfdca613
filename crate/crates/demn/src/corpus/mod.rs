//! Synthetic story corpus: episode/QA data types, tokenization, vocabulary,
//! deterministic generation, toy featurization, splits, and the on-disk
//! corpus format.

mod featurize;
mod generate;
mod io;

pub use featurize::{featurize_scene, featurize_sentence, fnv1a64};
pub use generate::{generate_corpus, QuestionKind, ACTIONS, CHARACTERS, LOCATIONS};
pub use io::{load_corpus, write_corpus};

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Number of candidate answers per question.
pub const ANSWER_CHOICES: usize = 5;

/// One video frame, reduced to its attribute tuple. Indices refer to the
/// generator's character/action/location pools.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameSpec {
    pub character: u32,
    pub action: u32,
    pub location: u32,
}

/// A scene paired with its dialogue, its ground-truth description, and the
/// fixed feature vectors standing in for pretrained extractors.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenePair {
    pub scene_spec: Vec<FrameSpec>,
    pub dialogue: Vec<String>,
    pub description: Vec<String>,
    pub scene_feature: Vec<f64>,
    pub dialogue_feature: Vec<f64>,
    pub description_feature: Vec<f64>,
}

/// A five-way multiple-choice question tied to one scene-dialogue pair.
#[derive(Debug, Clone, PartialEq)]
pub struct QAItem {
    pub question: Vec<String>,
    pub answers: [Vec<String>; ANSWER_CHOICES],
    pub correct_answer_index: usize,
    pub relevant_pair_index: usize,
}

/// An ordered list of scene-dialogue pairs plus the questions about them.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub id: String,
    pub pairs: Vec<ScenePair>,
    pub qa_items: Vec<QAItem>,
}

/// Feature dimensions carried by a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureDims {
    pub scene: usize,
    pub dialogue: usize,
    pub description: usize,
}

impl Episode {
    /// Validates internal consistency: nonempty pairs, in-range QA labels.
    pub fn validate(&self) -> Result<()> {
        if self.pairs.is_empty() {
            return Err(Error::Corpus(format!("episode {} has no pairs", self.id)));
        }
        for (qi, qa) in self.qa_items.iter().enumerate() {
            if qa.relevant_pair_index >= self.pairs.len() {
                return Err(Error::Corpus(format!(
                    "episode {} question {} points at pair {} of {}",
                    self.id,
                    qi,
                    qa.relevant_pair_index,
                    self.pairs.len()
                )));
            }
            if qa.correct_answer_index >= ANSWER_CHOICES {
                return Err(Error::Corpus(format!(
                    "episode {} question {} has correct index {}",
                    self.id, qi, qa.correct_answer_index
                )));
            }
        }
        Ok(())
    }
}

/// Returns the feature dimensions used by `episodes`, checking consistency.
pub fn feature_dims(episodes: &[Episode]) -> Result<FeatureDims> {
    let first = episodes
        .iter()
        .flat_map(|e| e.pairs.first())
        .next()
        .ok_or_else(|| Error::Corpus("empty corpus".into()))?;
    let dims = FeatureDims {
        scene: first.scene_feature.len(),
        dialogue: first.dialogue_feature.len(),
        description: first.description_feature.len(),
    };
    for ep in episodes {
        for p in &ep.pairs {
            if p.scene_feature.len() != dims.scene
                || p.dialogue_feature.len() != dims.dialogue
                || p.description_feature.len() != dims.description
            {
                return Err(Error::Corpus(format!(
                    "inconsistent feature dims in episode {}",
                    ep.id
                )));
            }
        }
    }
    Ok(dims)
}

/// Configuration for generation and featurization.
#[derive(Debug, Clone)]
pub struct CorpusConfig {
    pub scene_dim: usize,
    pub dialogue_dim: usize,
    pub description_dim: usize,
    /// Seed for the attribute-basis and token-embedding draws. Independent of
    /// the corpus seed so the featurizers stay a fixed function across corpora.
    pub feature_seed: u64,
    /// How many entries of each template pool the generator may use.
    pub characters: usize,
    pub actions: usize,
    pub locations: usize,
    /// Position decay for sentence features.
    pub sentence_decay: f64,
    /// Question families the generator draws from.
    pub question_kinds: Vec<QuestionKind>,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            scene_dim: 32,
            dialogue_dim: 48,
            description_dim: 48,
            feature_seed: 1729,
            characters: CHARACTERS.len(),
            actions: ACTIONS.len(),
            locations: LOCATIONS.len(),
            sentence_decay: 0.95,
            question_kinds: QuestionKind::ALL.to_vec(),
        }
    }
}

impl CorpusConfig {
    pub fn dims(&self) -> FeatureDims {
        FeatureDims {
            scene: self.scene_dim,
            dialogue: self.dialogue_dim,
            description: self.description_dim,
        }
    }
}

/// Lowercases, splits on whitespace, and strips trailing punctuation from
/// each token. Tokens that are all punctuation are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let lower = raw.to_lowercase();
            let trimmed = lower.trim_end_matches(['.', ',', '!', '?', ';', ':']);
            if trimmed.is_empty() {
                None
            } else {
                Some(trimmed.to_string())
            }
        })
        .collect()
}

/// Token-id table with reserved specials.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocab {
    token_to_id: BTreeMap<String, usize>,
    id_to_token: Vec<String>,
}

pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";
pub const SEP_TOKEN: &str = "<sep>";

impl Vocab {
    pub const PAD: usize = 0;
    pub const UNK: usize = 1;
    pub const SEP: usize = 2;

    /// Builds a vocabulary over every token that occurs in the corpus:
    /// dialogues, descriptions, questions, and answers. Ids are dense,
    /// with the specials first and content tokens in sorted order.
    pub fn build(episodes: &[Episode]) -> Result<Vocab> {
        if episodes.is_empty() {
            return Err(Error::Corpus("cannot build vocab from empty corpus".into()));
        }
        let mut tokens: std::collections::BTreeSet<&str> = std::collections::BTreeSet::new();
        for ep in episodes {
            for p in &ep.pairs {
                tokens.extend(p.dialogue.iter().map(String::as_str));
                tokens.extend(p.description.iter().map(String::as_str));
            }
            for qa in &ep.qa_items {
                tokens.extend(qa.question.iter().map(String::as_str));
                for a in &qa.answers {
                    tokens.extend(a.iter().map(String::as_str));
                }
            }
        }
        let mut id_to_token = vec![
            PAD_TOKEN.to_string(),
            UNK_TOKEN.to_string(),
            SEP_TOKEN.to_string(),
        ];
        for t in tokens {
            if t != PAD_TOKEN && t != UNK_TOKEN && t != SEP_TOKEN {
                id_to_token.push(t.to_string());
            }
        }
        let token_to_id = id_to_token
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        Ok(Vocab {
            token_to_id,
            id_to_token,
        })
    }

    /// Rebuilds a vocabulary from its full id-ordered token list (as stored
    /// in checkpoints). The three specials must come first.
    pub fn from_tokens(id_to_token: Vec<String>) -> Result<Vocab> {
        if id_to_token.len() < 3
            || id_to_token[Self::PAD] != PAD_TOKEN
            || id_to_token[Self::UNK] != UNK_TOKEN
            || id_to_token[Self::SEP] != SEP_TOKEN
        {
            return Err(Error::Corpus("token list is missing the specials".into()));
        }
        let token_to_id: BTreeMap<String, usize> = id_to_token
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        if token_to_id.len() != id_to_token.len() {
            return Err(Error::Corpus("duplicate token in vocabulary".into()));
        }
        Ok(Vocab {
            token_to_id,
            id_to_token,
        })
    }

    /// Id for a token; out-of-vocabulary tokens map to UNK.
    pub fn id(&self, token: &str) -> usize {
        self.token_to_id.get(token).copied().unwrap_or(Self::UNK)
    }

    pub fn token(&self, id: usize) -> &str {
        &self.id_to_token[id]
    }

    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    pub fn ids(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.id(t)).collect()
    }

    pub fn tokens(&self) -> &[String] {
        &self.id_to_token
    }
}

/// Splits episodes into train/val/test by episode id order. Sizes are the
/// floor allocations with the remainder going to train, so no pair or
/// question ever crosses splits.
pub fn split_dataset(
    mut episodes: Vec<Episode>,
    ratios: (f64, f64, f64),
) -> Result<(Vec<Episode>, Vec<Episode>, Vec<Episode>)> {
    let (r_train, r_val, r_test) = ratios;
    if r_train < 0.0 || r_val < 0.0 || r_test < 0.0 {
        return Err(Error::Split("negative ratio".into()));
    }
    if (r_train + r_val + r_test - 1.0).abs() > 1e-9 {
        return Err(Error::Split(format!(
            "ratios sum to {}, expected 1",
            r_train + r_val + r_test
        )));
    }
    let nonzero = [r_train, r_val, r_test].iter().filter(|&&r| r > 0.0).count();
    let n = episodes.len();
    if n < nonzero {
        return Err(Error::Split(format!(
            "{n} episodes cannot cover {nonzero} nonzero splits"
        )));
    }
    episodes.sort_by(|a, b| a.id.cmp(&b.id));

    let n_train_floor = (n as f64 * r_train).floor() as usize;
    let n_val = (n as f64 * r_val).floor() as usize;
    let n_test = (n as f64 * r_test).floor() as usize;
    let n_train = n - n_val - n_test; // floor + remainder
    debug_assert!(n_train >= n_train_floor);

    let mut rest = episodes.split_off(n_train);
    let test = rest.split_off(n_val);
    Ok((episodes, rest, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_pair(dim: usize) -> ScenePair {
        ScenePair {
            scene_spec: vec![FrameSpec {
                character: 0,
                action: 0,
                location: 0,
            }],
            dialogue: vec!["hello".into()],
            description: vec!["someone".into(), "waves".into()],
            scene_feature: vec![1.0; dim],
            dialogue_feature: vec![1.0; dim],
            description_feature: vec![1.0; dim],
        }
    }

    fn tiny_episode(id: &str) -> Episode {
        Episode {
            id: id.into(),
            pairs: vec![tiny_pair(4)],
            qa_items: vec![],
        }
    }

    #[test]
    fn tokenize_strips_trailing_punctuation() {
        assert_eq!(
            tokenize("It is really pretty."),
            vec!["it", "is", "really", "pretty"]
        );
    }

    #[test]
    fn tokenize_empty_text() {
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn tokenize_is_idempotent_on_rejoined_output() {
        let once = tokenize("Look! We LOVE singing, at the beach?");
        let rejoined = once.join(" ");
        assert_eq!(tokenize(&rejoined), once);
    }

    #[test]
    fn vocab_counts_distinct_tokens_plus_specials() {
        let mut ep = tiny_episode("ep0");
        ep.pairs[0].dialogue = vec!["a".into(), "b".into(), "a".into()];
        ep.pairs[0].description = vec!["c".into()];
        let v = Vocab::build(std::slice::from_ref(&ep)).unwrap();
        assert_eq!(v.len(), 3 + 3);
        assert_eq!(v.id(PAD_TOKEN), Vocab::PAD);
        assert_eq!(v.id(UNK_TOKEN), Vocab::UNK);
        assert_eq!(v.id(SEP_TOKEN), Vocab::SEP);
        assert_eq!(v.id("zzz"), Vocab::UNK);
    }

    #[test]
    fn vocab_sizes_add_for_disjoint_corpora() {
        let mut ep1 = tiny_episode("ep0");
        ep1.pairs[0].dialogue = vec!["aa".into()];
        ep1.pairs[0].description = vec!["bb".into()];
        let mut ep2 = tiny_episode("ep1");
        ep2.pairs[0].dialogue = vec!["cc".into()];
        ep2.pairs[0].description = vec!["dd".into()];
        let v1 = Vocab::build(std::slice::from_ref(&ep1)).unwrap();
        let v2 = Vocab::build(std::slice::from_ref(&ep2)).unwrap();
        let both = Vocab::build(&[ep1, ep2]).unwrap();
        assert_eq!(both.len() - 3, (v1.len() - 3) + (v2.len() - 3));
    }

    #[test]
    fn vocab_requires_nonempty_corpus() {
        assert!(matches!(Vocab::build(&[]), Err(Error::Corpus(_))));
    }

    #[test]
    fn split_paper_scale_episode_counts() {
        let episodes: Vec<Episode> = (0..171).map(|i| tiny_episode(&format!("ep{i:04}"))).collect();
        let (train, val, test) = split_dataset(episodes, (0.6, 0.2, 0.2)).unwrap();
        assert_eq!((train.len(), val.len(), test.len()), (103, 34, 34));
    }

    #[test]
    fn split_small_corpus() {
        let episodes: Vec<Episode> = (0..10).map(|i| tiny_episode(&format!("ep{i:04}"))).collect();
        let (train, val, test) = split_dataset(episodes, (0.6, 0.2, 0.2)).unwrap();
        assert_eq!((train.len(), val.len(), test.len()), (6, 2, 2));
    }

    #[test]
    fn split_is_a_partition() {
        let episodes: Vec<Episode> = (0..23).map(|i| tiny_episode(&format!("ep{i:04}"))).collect();
        let all_ids: std::collections::BTreeSet<String> =
            episodes.iter().map(|e| e.id.clone()).collect();
        let (train, val, test) = split_dataset(episodes, (0.5, 0.25, 0.25)).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for e in train.iter().chain(&val).chain(&test) {
            assert!(seen.insert(e.id.clone()), "episode {} duplicated", e.id);
        }
        assert_eq!(seen, all_ids);
    }

    #[test]
    fn split_rejects_too_few_episodes() {
        let episodes = vec![tiny_episode("ep0"), tiny_episode("ep1")];
        assert!(matches!(
            split_dataset(episodes, (0.6, 0.2, 0.2)),
            Err(Error::Split(_))
        ));
    }

    #[test]
    fn split_rejects_bad_ratios() {
        let episodes = vec![tiny_episode("ep0")];
        assert!(matches!(
            split_dataset(episodes, (0.5, 0.2, 0.2)),
            Err(Error::Split(_))
        ));
    }
}
