//! Video story understanding: learns a scene-to-dialogue embedding and a
//! combined-to-description embedding with hinge rank losses, retrieves the
//! nearest description for a scene-dialogue pair, and reconstructs the pair
//! into a textual story.
//!
//! Training is two-phase. Phase one fits the scene map so an embedded scene
//! scores higher against its own dialogue than against sampled contrastive
//! dialogues. Phase two freezes the scene map, forms the unit-normalized
//! combined vector (embedded scene plus dialogue), and fits the description
//! map the same way against contrastive descriptions.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::{Episode, ScenePair};
use crate::error::{Error, Result};
use crate::memory::Story;
use crate::numcore::{
    add_outer, dot, hinge_rank, l2_norm, l2_normalize, sgd_step, vec_mat, Matrix, ParamGroup,
};

/// Default ranking margin.
pub const DEFAULT_MARGIN: f64 = 1.0;

/// Trainable embedding matrices plus the ranking margin.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbedderParams {
    /// Scene space to dialogue space.
    pub scene_map: ParamGroup,
    /// Combined (dialogue-space) vector to description space.
    pub desc_map: ParamGroup,
    pub margin: f64,
}

impl EmbedderParams {
    /// Seeded uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
    pub fn init(scene_dim: usize, dialogue_dim: usize, description_dim: usize, seed: u64) -> Self {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |rows: usize, cols: usize, name: &str| {
            let bound = 1.0 / (rows as f64).sqrt();
            let data = (0..rows * cols)
                .map(|_| rng.gen_range(-bound..bound))
                .collect();
            ParamGroup::new(name, Matrix::from_vec(rows, cols, data).unwrap())
        };
        EmbedderParams {
            scene_map: draw(scene_dim, dialogue_dim, "scene_map"),
            desc_map: draw(dialogue_dim, description_dim, "desc_map"),
            margin: DEFAULT_MARGIN,
        }
    }

    pub fn scene_dim(&self) -> usize {
        self.scene_map.value.rows()
    }

    pub fn dialogue_dim(&self) -> usize {
        self.scene_map.value.cols()
    }

    pub fn description_dim(&self) -> usize {
        self.desc_map.value.cols()
    }
}

/// Embeds a scene feature into dialogue space: row vector times matrix.
pub fn embed_scene(scene: &[f64], scene_map: &Matrix) -> Result<Vec<f64>> {
    vec_mat(scene, scene_map)
}

/// Unit-normalized sum of the embedded scene and its dialogue vector.
pub fn combine(scene: &[f64], dialogue: &[f64], scene_map: &Matrix) -> Result<Vec<f64>> {
    let embedded = embed_scene(scene, scene_map)?;
    if embedded.len() != dialogue.len() {
        return Err(Error::shape(
            "combine",
            format!("embedded {} vs dialogue {}", embedded.len(), dialogue.len()),
        ));
    }
    let sum: Vec<f64> = embedded.iter().zip(dialogue).map(|(a, b)| a + b).collect();
    let norm = l2_norm(&sum);
    if !(norm > crate::numcore::NORM_EPS) {
        return Err(Error::Degenerate {
            op: "combine",
            norm,
        });
    }
    l2_normalize(&sum)
}

/// Per-example hinge rank loss over bilinear scores `anchor^T M x`, plus the
/// analytic gradient with respect to `M`.
///
/// Terms that satisfy the margin contribute nothing to either the loss or the
/// gradient.
pub fn hinge_rank_loss(
    anchor: &[f64],
    positive: &[f64],
    negatives: &[Vec<f64>],
    m: &Matrix,
    margin: f64,
) -> Result<(f64, Matrix)> {
    if negatives.is_empty() {
        return Err(Error::Contract(
            "hinge_rank_loss: at least one negative required".into(),
        ));
    }
    let projected = vec_mat(anchor, m)?;
    let pos_score = dot(&projected, positive)?;
    let neg_scores: Vec<f64> = negatives
        .iter()
        .map(|n| dot(&projected, n))
        .collect::<Result<_>>()?;
    let (loss, active) = hinge_rank(pos_score, &neg_scores, margin);

    // d/dM of anchor^T M x is the rank-one matrix anchor x^T; every violating
    // term contributes (negative - positive) on the right side.
    let mut grad = Matrix::zeros(m.rows(), m.cols());
    let mut right = vec![0.0; m.cols()];
    let mut n_active = 0usize;
    for (neg, &is_active) in negatives.iter().zip(&active) {
        if is_active {
            for (r, &x) in right.iter_mut().zip(neg) {
                *r += x;
            }
            n_active += 1;
        }
    }
    if n_active > 0 {
        for (r, &p) in right.iter_mut().zip(positive) {
            *r -= n_active as f64 * p;
        }
        add_outer(&mut grad, anchor, &right);
    }
    Ok((loss, grad))
}

/// One description candidate in the external pool.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptionCandidate {
    pub tokens: Vec<String>,
    pub feature: Vec<f64>,
}

/// All ground-truth descriptions of `episodes`, in episode then pair order.
pub fn description_pool(episodes: &[Episode]) -> Vec<DescriptionCandidate> {
    episodes
        .iter()
        .flat_map(|e| &e.pairs)
        .map(|p| DescriptionCandidate {
            tokens: p.description.clone(),
            feature: p.description_feature.clone(),
        })
        .collect()
}

/// Index (and scores) of the candidate whose feature has the highest
/// dot-product similarity with the projected combined vector. Ties break to
/// the lowest index.
pub fn retrieve_description(
    combined: &[f64],
    candidates: &[DescriptionCandidate],
    desc_map: &Matrix,
) -> Result<(usize, Vec<f64>)> {
    if candidates.is_empty() {
        return Err(Error::Retrieval("empty candidate pool".into()));
    }
    let projected = vec_mat(combined, desc_map)?;
    let mut scores = Vec::with_capacity(candidates.len());
    let mut best = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    for (i, c) in candidates.iter().enumerate() {
        let s = dot(&projected, &c.feature)?;
        if s > best_score {
            best_score = s;
            best = i;
        }
        scores.push(s);
    }
    Ok((best, scores))
}

/// Where a reconstructed story takes its description from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescriptionMode {
    /// Nearest description retrieved from the candidate pool.
    Retrieved,
    /// The pair's own ground-truth description.
    GroundTruth,
}

/// Builds the story for one scene-dialogue pair: the chosen description
/// concatenated with the dialogue.
pub fn reconstruct_story(
    pair: &ScenePair,
    pair_index: usize,
    pool: &[DescriptionCandidate],
    params: &EmbedderParams,
    mode: DescriptionMode,
) -> Result<Story> {
    let description = match mode {
        DescriptionMode::GroundTruth => pair.description.clone(),
        DescriptionMode::Retrieved => {
            if pool.is_empty() {
                return Err(Error::Retrieval(
                    "retrieved mode needs a nonempty description pool".into(),
                ));
            }
            let c = combine(&pair.scene_feature, &pair.dialogue_feature, &params.scene_map.value)?;
            let (idx, _) = retrieve_description(&c, pool, &params.desc_map.value)?;
            pool[idx].tokens.clone()
        }
    };
    Story::new(description, pair.dialogue.clone(), pair_index)
}

/// Two-phase training configuration.
#[derive(Debug, Clone)]
pub struct EmbedTrainConfig {
    pub lr: f64,
    /// Epochs for each phase.
    pub epochs: usize,
    /// Contrastive examples sampled per training pair.
    pub negatives: usize,
    pub seed: u64,
}

impl Default for EmbedTrainConfig {
    fn default() -> Self {
        EmbedTrainConfig {
            lr: 0.1,
            epochs: 15,
            negatives: 8,
            seed: 7,
        }
    }
}

/// Per-phase mean losses, one entry per epoch.
#[derive(Debug, Clone, Default)]
pub struct EmbedTrainLog {
    pub scene_phase: Vec<f64>,
    pub desc_phase: Vec<f64>,
}

/// Trains the two embedding matrices on the training episodes.
///
/// Deterministic for a fixed seed: example order and negative sampling come
/// from one seeded generator.
pub fn train_embedder(
    train: &[Episode],
    cfg: &EmbedTrainConfig,
) -> Result<(EmbedderParams, EmbedTrainLog)> {
    let dims = crate::corpus::feature_dims(train)?;
    let mut params = EmbedderParams::init(dims.scene, dims.dialogue, dims.description, cfg.seed);
    let mut log = EmbedTrainLog::default();
    if cfg.negatives == 0 {
        return Err(Error::Contract("train_embedder: negatives must be >= 1".into()));
    }

    let pairs: Vec<&ScenePair> = train.iter().flat_map(|e| &e.pairs).collect();
    if pairs.len() < 2 {
        return Err(Error::Corpus(
            "need at least two pairs for contrastive training".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9);

    // Phase one: scene map against contrastive dialogues.
    for _ in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for &idx in &order {
            let negatives = sample_negatives(&mut rng, pairs.len(), idx, cfg.negatives)
                .into_iter()
                .map(|j| pairs[j].dialogue_feature.clone())
                .collect::<Vec<_>>();
            let (loss, grad) = hinge_rank_loss(
                &pairs[idx].scene_feature,
                &pairs[idx].dialogue_feature,
                &negatives,
                &params.scene_map.value,
                params.margin,
            )?;
            if !loss.is_finite() {
                return Err(Error::Divergence("scene-phase loss is non-finite".into()));
            }
            params.scene_map.grad.add_assign(&grad)?;
            sgd_step([&mut params.scene_map], cfg.lr)?;
            epoch_loss += loss;
        }
        log.scene_phase.push(epoch_loss / pairs.len() as f64);
    }

    // Phase two: freeze the scene map, fit the description map on combined
    // vectors against contrastive descriptions.
    let combined: Vec<Vec<f64>> = pairs
        .iter()
        .map(|p| combine(&p.scene_feature, &p.dialogue_feature, &params.scene_map.value))
        .collect::<Result<_>>()?;
    for _ in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for &idx in &order {
            let negatives = sample_negatives(&mut rng, pairs.len(), idx, cfg.negatives)
                .into_iter()
                .map(|j| pairs[j].description_feature.clone())
                .collect::<Vec<_>>();
            let (loss, grad) = hinge_rank_loss(
                &combined[idx],
                &pairs[idx].description_feature,
                &negatives,
                &params.desc_map.value,
                params.margin,
            )?;
            if !loss.is_finite() {
                return Err(Error::Divergence("description-phase loss is non-finite".into()));
            }
            params.desc_map.grad.add_assign(&grad)?;
            sgd_step([&mut params.desc_map], cfg.lr)?;
            epoch_loss += loss;
        }
        log.desc_phase.push(epoch_loss / pairs.len() as f64);
    }

    Ok((params, log))
}

/// Uniform sample of `k` indices from `0..n` excluding `skip`, without
/// replacement. Clamps to the available count.
fn sample_negatives(rng: &mut ChaCha8Rng, n: usize, skip: usize, k: usize) -> Vec<usize> {
    let mut candidates: Vec<usize> = (0..n).filter(|&i| i != skip).collect();
    candidates.shuffle(rng);
    candidates.truncate(k.min(n - 1));
    candidates
}

// --- checkpoint io ---------------------------------------------------------

const CHECKPOINT_VERSION: u32 = 1;

use crate::ckpt::{expect_magic_and_version, read_f64s, read_u32, write_f64s, write_u32, MAGIC};

/// Binary checkpoint: magic, version, the three dimensions, then both
/// matrices row-major as little-endian 64-bit reals. Round trips bit-exactly.
pub fn save_checkpoint(params: &EmbedderParams, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(MAGIC)?;
    write_u32(&mut w, CHECKPOINT_VERSION)?;
    write_u32(&mut w, params.scene_dim() as u32)?;
    write_u32(&mut w, params.dialogue_dim() as u32)?;
    write_u32(&mut w, params.description_dim() as u32)?;
    write_f64s(&mut w, params.scene_map.value.data())?;
    write_f64s(&mut w, params.desc_map.value.data())?;
    w.flush()?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<EmbedderParams> {
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    expect_magic_and_version(&mut r, CHECKPOINT_VERSION)?;
    let scene_dim = read_u32(&mut r)? as usize;
    let dialogue_dim = read_u32(&mut r)? as usize;
    let description_dim = read_u32(&mut r)? as usize;
    if scene_dim == 0 || dialogue_dim == 0 || description_dim == 0 {
        return Err(Error::Checkpoint("zero dimension in header".into()));
    }
    let m1 = read_f64s(&mut r, scene_dim * dialogue_dim)?;
    let m2 = read_f64s(&mut r, dialogue_dim * description_dim)?;
    let mut trailing = Vec::new();
    r.read_to_end(&mut trailing)?;
    if !trailing.is_empty() {
        return Err(Error::Checkpoint(format!(
            "{} unexpected trailing bytes",
            trailing.len()
        )));
    }
    Ok(EmbedderParams {
        scene_map: ParamGroup::new("scene_map", Matrix::from_vec(scene_dim, dialogue_dim, m1)?),
        desc_map: ParamGroup::new(
            "desc_map",
            Matrix::from_vec(dialogue_dim, description_dim, m2)?,
        ),
        margin: DEFAULT_MARGIN,
    })
}

/// Fraction of pairs whose retrieved description text equals their own
/// ground-truth description, retrieving from `pool`.
pub fn retrieval_top1(
    params: &EmbedderParams,
    episodes: &[Episode],
    pool: &[DescriptionCandidate],
) -> Result<f64> {
    let mut hits = 0usize;
    let mut total = 0usize;
    for ep in episodes {
        for pair in &ep.pairs {
            let c = combine(&pair.scene_feature, &pair.dialogue_feature, &params.scene_map.value)?;
            let (idx, _) = retrieve_description(&c, pool, &params.desc_map.value)?;
            total += 1;
            if pool[idx].tokens == pair.description {
                hits += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::Corpus("no pairs to evaluate retrieval on".into()));
    }
    Ok(hits as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_corpus, CorpusConfig};
    use crate::numcore::finite_diff_grad;
    use rand::Rng;

    fn unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        l2_normalize(&v).unwrap()
    }

    #[test]
    fn embed_scene_identity_and_zero() {
        let v = l2_normalize(&[1.0, 2.0, -1.0]).unwrap();
        assert_eq!(embed_scene(&v, &Matrix::identity(3)).unwrap(), v);
        let zero = Matrix::zeros(3, 4);
        assert_eq!(embed_scene(&v, &zero).unwrap(), vec![0.0; 4]);
    }

    #[test]
    fn combine_with_zero_map_returns_dialogue() {
        let l = l2_normalize(&[0.2, -0.4, 0.9]).unwrap();
        let v = l2_normalize(&[1.0, 1.0]).unwrap();
        let m = Matrix::zeros(2, 3);
        let c = combine(&v, &l, &m).unwrap();
        for (a, b) in c.iter().zip(&l) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn combine_identity_map_with_equal_inputs_is_the_input() {
        let l = l2_normalize(&[3.0, 4.0]).unwrap();
        let c = combine(&l, &l, &Matrix::identity(2)).unwrap();
        for (a, b) in c.iter().zip(&l) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn combine_output_is_unit_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let v = unit(&mut rng, 6);
            let l = unit(&mut rng, 4);
            let m = Matrix::from_vec(6, 4, (0..24).map(|_| rng.gen_range(-0.5..0.5)).collect())
                .unwrap();
            let c = combine(&v, &l, &m).unwrap();
            assert!((l2_norm(&c) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn combine_degenerate_sum_is_an_error() {
        // identity map and opposite vectors cancel exactly
        let l = l2_normalize(&[1.0, 0.0]).unwrap();
        let v: Vec<f64> = l.iter().map(|x| -x).collect();
        assert!(matches!(
            combine(&v, &l, &Matrix::identity(2)),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn hinge_loss_margin_satisfied_is_zero_with_zero_gradient() {
        // anchor^T M positive = 2.0, anchor^T M negative = 0.5
        let m = Matrix::from_vec(1, 2, vec![2.0, 0.5]).unwrap();
        let (loss, grad) = hinge_rank_loss(&[1.0], &[1.0, 0.0], &[vec![0.0, 1.0]], &m, 1.0).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grad.data().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn hinge_loss_direct_arithmetic() {
        let m = Matrix::from_vec(1, 2, vec![0.3, 0.4]).unwrap();
        let (loss, _) = hinge_rank_loss(&[1.0], &[1.0, 0.0], &[vec![0.0, 1.0]], &m, 1.0).unwrap();
        assert!((loss - 1.1).abs() < 1e-12);
    }

    #[test]
    fn hinge_loss_rejects_empty_negatives() {
        let m = Matrix::identity(2);
        assert!(matches!(
            hinge_rank_loss(&[1.0, 0.0], &[1.0, 0.0], &[], &m, 1.0),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn hinge_loss_is_negative_permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = Matrix::from_vec(3, 4, (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let a = unit(&mut rng, 3);
        let p = unit(&mut rng, 4);
        let mut negs: Vec<Vec<f64>> = (0..5).map(|_| unit(&mut rng, 4)).collect();
        let (l1, _) = hinge_rank_loss(&a, &p, &negs, &m, 1.0).unwrap();
        negs.reverse();
        let (l2, _) = hinge_rank_loss(&a, &p, &negs, &m, 1.0).unwrap();
        assert!((l1 - l2).abs() < 1e-12);
    }

    #[test]
    fn hinge_gradient_matches_finite_differences() {
        // 20 random draws, both matrix shapes used in training.
        for draw in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + draw);
            let (rows, cols) = if draw % 2 == 0 { (5, 7) } else { (6, 6) };
            let a = unit(&mut rng, rows);
            let p = unit(&mut rng, cols);
            let negs: Vec<Vec<f64>> = (0..4).map(|_| unit(&mut rng, cols)).collect();
            let m = Matrix::from_vec(
                rows,
                cols,
                (0..rows * cols).map(|_| rng.gen_range(-0.5..0.5)).collect(),
            )
            .unwrap();
            let (_, analytic) = hinge_rank_loss(&a, &p, &negs, &m, 1.0).unwrap();

            let mut params = vec![ParamGroup::new("m", m)];
            let numeric = finite_diff_grad(&mut params, 1e-5, |ps| {
                hinge_rank_loss(&a, &p, &negs, &ps[0].value, 1.0).map(|(l, _)| l)
            })
            .unwrap();
            let err = crate::numcore::max_relative_error(analytic.data(), numeric[0].data());
            assert!(err < 1e-4, "draw {draw}: rel err {err}");
        }
    }

    #[test]
    fn scaling_the_map_scales_scores_but_not_the_argmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = Matrix::from_vec(4, 4, (0..16).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let c = unit(&mut rng, 4);
        let candidates: Vec<DescriptionCandidate> = (0..10)
            .map(|i| DescriptionCandidate {
                tokens: vec![format!("d{i}")],
                feature: unit(&mut rng, 4),
            })
            .collect();
        let (best, scores) = retrieve_description(&c, &candidates, &m).unwrap();
        let mut scaled = m.clone();
        scaled.scale(3.5);
        let (best2, scores2) = retrieve_description(&c, &candidates, &scaled).unwrap();
        assert_eq!(best, best2);
        for (s, t) in scores.iter().zip(&scores2) {
            assert!((t - 3.5 * s).abs() < 1e-9);
        }
    }

    #[test]
    fn retrieval_single_candidate_and_self_similarity() {
        let c = l2_normalize(&[0.3, -0.8, 0.5]).unwrap();
        let lone = vec![DescriptionCandidate {
            tokens: vec!["only".into()],
            feature: l2_normalize(&[1.0, 1.0, 1.0]).unwrap(),
        }];
        assert_eq!(retrieve_description(&c, &lone, &Matrix::identity(3)).unwrap().0, 0);

        let pair = vec![
            DescriptionCandidate {
                tokens: vec!["pos".into()],
                feature: c.clone(),
            },
            DescriptionCandidate {
                tokens: vec!["neg".into()],
                feature: c.iter().map(|x| -x).collect(),
            },
        ];
        assert_eq!(retrieve_description(&c, &pair, &Matrix::identity(3)).unwrap().0, 0);
    }

    #[test]
    fn retrieval_matches_exhaustive_scan_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let m = Matrix::from_vec(5, 6, (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let candidates: Vec<DescriptionCandidate> = (0..1000)
            .map(|i| DescriptionCandidate {
                tokens: vec![format!("d{i}")],
                feature: unit(&mut rng, 6),
            })
            .collect();
        let features: Vec<Vec<f64>> = candidates.iter().map(|c| c.feature.clone()).collect();
        for _ in 0..20 {
            let c = unit(&mut rng, 5);
            let (got, _) = retrieve_description(&c, &candidates, &m).unwrap();
            let expect = crate::oracle::exhaustive_retrieve(&c, &features, &m);
            assert_eq!(got, expect);
        }
    }

    #[test]
    fn retrieval_rejects_empty_pool() {
        assert!(matches!(
            retrieve_description(&[1.0], &[], &Matrix::identity(1)),
            Err(Error::Retrieval(_))
        ));
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let eps = generate_corpus(7, 3, 4, 1, &CorpusConfig::default()).unwrap();
        let cfg = EmbedTrainConfig {
            epochs: 0,
            ..EmbedTrainConfig::default()
        };
        let (params, log) = train_embedder(&eps, &cfg).unwrap();
        let dims = crate::corpus::feature_dims(&eps).unwrap();
        let init = EmbedderParams::init(dims.scene, dims.dialogue, dims.description, cfg.seed);
        assert_eq!(params, init);
        assert!(log.scene_phase.is_empty());
    }

    #[test]
    fn training_is_seed_deterministic() {
        let eps = generate_corpus(7, 3, 4, 1, &CorpusConfig::default()).unwrap();
        let cfg = EmbedTrainConfig {
            epochs: 2,
            ..EmbedTrainConfig::default()
        };
        let (a, _) = train_embedder(&eps, &cfg).unwrap();
        let (b, _) = train_embedder(&eps, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reconstruct_story_modes() {
        let eps = generate_corpus(7, 2, 3, 1, &CorpusConfig::default()).unwrap();
        let dims = crate::corpus::feature_dims(&eps).unwrap();
        let params = EmbedderParams::init(dims.scene, dims.dialogue, dims.description, 1);
        let pair = &eps[0].pairs[0];

        let gt = reconstruct_story(pair, 0, &[], &params, DescriptionMode::GroundTruth).unwrap();
        assert_eq!(gt.description, pair.description);
        assert_eq!(gt.dialogue, pair.dialogue);

        let singleton = vec![DescriptionCandidate {
            tokens: pair.description.clone(),
            feature: pair.description_feature.clone(),
        }];
        let retrieved =
            reconstruct_story(pair, 0, &singleton, &params, DescriptionMode::Retrieved).unwrap();
        assert_eq!(retrieved.description, pair.description);

        assert!(matches!(
            reconstruct_story(pair, 0, &[], &params, DescriptionMode::Retrieved),
            Err(Error::Retrieval(_))
        ));
    }

    #[test]
    fn checkpoint_round_trip_is_bit_exact() {
        let params = EmbedderParams::init(4, 6, 5, 99);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("embed.ckpt");
        save_checkpoint(&params, &path).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(loaded.scene_map.value, params.scene_map.value);
        assert_eq!(loaded.desc_map.value, params.desc_map.value);

        let path2 = dir.path().join("embed2.ckpt");
        save_checkpoint(&loaded, &path2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn checkpoint_rejects_bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.ckpt");
        std::fs::write(&path, b"NOPE0000").unwrap();
        assert!(matches!(load_checkpoint(&path), Err(Error::Checkpoint(_))));
    }
}
