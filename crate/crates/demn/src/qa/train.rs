//! Supervised training of the two QA scorers with the joint hinge rank loss.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    build_triplets, joint_loss_with_grads, AblationMode, ModelDims, QAModelParams,
    RetrievalContext, StoryVariant, TripletIds,
};
use crate::corpus::{Episode, Vocab};
use crate::error::{Error, Result};
use crate::numcore::sgd_step;

#[derive(Debug, Clone)]
pub struct TrainQaConfig {
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
    pub mode: AblationMode,
    pub attention: bool,
    pub variant: StoryVariant,
    pub dims: ModelDims,
    pub story_margin: f64,
    pub answer_margin: f64,
}

impl Default for TrainQaConfig {
    fn default() -> Self {
        TrainQaConfig {
            lr: 0.05,
            epochs: 50,
            seed: 7,
            mode: AblationMode::QLVE,
            attention: true,
            variant: StoryVariant::default(),
            dims: ModelDims::default(),
            story_margin: 1.0,
            answer_margin: 1.0,
        }
    }
}

/// Mean joint loss per epoch.
#[derive(Debug, Clone, Default)]
pub struct QaTrainLog {
    pub epoch_mean_loss: Vec<f64>,
}

/// Trains a fresh model on the training episodes. One SGD step per question,
/// questions shuffled per epoch from the seeded generator. Deterministic for
/// a fixed seed.
pub fn train_qa(
    train: &[Episode],
    retrieval: Option<&RetrievalContext>,
    cfg: &TrainQaConfig,
) -> Result<(QAModelParams, QaTrainLog)> {
    if train.is_empty() {
        return Err(Error::Corpus("no training episodes".into()));
    }
    let vocab = Vocab::build(train)?;
    let mut model = QAModelParams::init(vocab, cfg.dims, cfg.seed);
    model.story_margin = cfg.story_margin;
    model.answer_margin = cfg.answer_margin;

    // Triplets are a pure function of corpus, mode, and (frozen) embedder, so
    // build them once up front.
    let mut triplets: Vec<TripletIds> = Vec::new();
    for ep in train {
        for qa in &ep.qa_items {
            let t = build_triplets(ep, qa, retrieval, cfg.mode, cfg.variant)?;
            triplets.push(TripletIds::resolve(&t, &model.vocab));
        }
    }
    if triplets.is_empty() {
        return Err(Error::Corpus("no questions in the training split".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x51ab_2e9d);
    let mut log = QaTrainLog::default();
    for _ in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for &qi in &order {
            model.zero_grads();
            let loss = joint_loss_with_grads(&mut model, &triplets[qi], cfg.attention)?;
            sgd_step(model.groups_mut(), cfg.lr)?;
            epoch_loss += loss;
        }
        log.epoch_mean_loss.push(epoch_loss / triplets.len() as f64);
    }
    Ok((model, log))
}
