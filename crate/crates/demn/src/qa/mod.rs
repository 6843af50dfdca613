//! The question-answering pipeline: story selection, question-story fusion,
//! answer selection, supervised triplet construction, the joint hinge rank
//! loss through both scorers, and end-to-end training and inference.

mod train;

pub use train::{train_qa, QaTrainLog, TrainQaConfig};

use std::io::Write as _;
use std::path::Path;

use rand_chacha::ChaCha8Rng;

use crate::corpus::{Episode, QAItem, Vocab, ANSWER_CHOICES, SEP_TOKEN};
use crate::embedder::{DescriptionCandidate, DescriptionMode, EmbedderParams};
use crate::error::{Error, Result};
use crate::memory::{Story, StoryMemory};
use crate::numcore::hinge_rank;
use crate::scorer::{
    backward_pair, backward_side, encode_side, score_with_cache, AttentionTrace, ScorerConfig,
    ScorerParams, SideGrad,
};

/// Which inputs the model may use: question, dialogue, scene, ground-truth
/// description. Declared in report column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AblationMode {
    Q,
    QL,
    QV,
    QE,
    QVE,
    QLV,
    QLE,
    QLVE,
}

impl AblationMode {
    pub const ALL: [AblationMode; 8] = [
        AblationMode::Q,
        AblationMode::QL,
        AblationMode::QV,
        AblationMode::QE,
        AblationMode::QVE,
        AblationMode::QLV,
        AblationMode::QLE,
        AblationMode::QLVE,
    ];

    /// Whether stories take part at all; mode Q answers from the question alone.
    pub fn uses_story(self) -> bool {
        !matches!(self, AblationMode::Q)
    }

    /// Whether story text includes the dialogue sentence.
    pub fn uses_dialogue(self) -> bool {
        matches!(
            self,
            AblationMode::QL | AblationMode::QLV | AblationMode::QLE | AblationMode::QLVE
        )
    }

    /// Where story descriptions come from. Ground truth wins whenever E is in
    /// the input set; V alone retrieves through the embedder.
    pub fn description_source(self) -> Option<DescriptionMode> {
        match self {
            AblationMode::Q | AblationMode::QL => None,
            AblationMode::QV | AblationMode::QLV => Some(DescriptionMode::Retrieved),
            AblationMode::QE | AblationMode::QVE | AblationMode::QLE | AblationMode::QLVE => {
                Some(DescriptionMode::GroundTruth)
            }
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let canon: String = s
            .to_uppercase()
            .chars()
            .filter(|c| c.is_ascii_alphabetic())
            .collect();
        Ok(match canon.as_str() {
            "Q" => AblationMode::Q,
            "QL" => AblationMode::QL,
            "QV" => AblationMode::QV,
            "QE" => AblationMode::QE,
            "QVE" => AblationMode::QVE,
            "QLV" => AblationMode::QLV,
            "QLE" => AblationMode::QLE,
            "QLVE" => AblationMode::QLVE,
            _ => return Err(Error::Contract(format!("unknown mode `{s}`"))),
        })
    }
}

impl std::fmt::Display for AblationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            AblationMode::Q => "Q",
            AblationMode::QL => "Q+L",
            AblationMode::QV => "Q+V",
            AblationMode::QE => "Q+E",
            AblationMode::QVE => "Q+V+E",
            AblationMode::QLV => "Q+L+V",
            AblationMode::QLE => "Q+L+E",
            AblationMode::QLVE => "Q+L+V+E",
        };
        f.write_str(s)
    }
}

/// How a story is presented to the story-selection scorer. The default is the
/// description-plus-dialogue form; the alternative concatenates the question
/// with the dialogue instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StoryVariant {
    #[default]
    DescriptionDialogue,
    QuestionDialogue,
}

/// The mode-visible parts of one story.
#[derive(Debug, Clone, PartialEq)]
pub struct StoryView {
    pub description: Option<Vec<String>>,
    pub dialogue: Option<Vec<String>>,
}

impl StoryView {
    /// Builds the view of `story` under `mode`. Mode Q yields no view.
    pub fn compose(story: &Story, mode: AblationMode) -> Option<StoryView> {
        if !mode.uses_story() {
            return None;
        }
        let description = mode.description_source().map(|_| story.description.clone());
        let dialogue = mode.uses_dialogue().then(|| story.dialogue.clone());
        Some(StoryView {
            description,
            dialogue,
        })
    }

    /// Concatenated story text without separators.
    pub fn tokens(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(d) = &self.description {
            out.extend(d.iter().cloned());
        }
        if let Some(l) = &self.dialogue {
            out.extend(l.iter().cloned());
        }
        out
    }
}

/// Story text used when ranking stories against a question.
pub fn story_selection_tokens(
    story: &Story,
    mode: AblationMode,
    variant: StoryVariant,
    question: &[String],
) -> Option<Vec<String>> {
    match variant {
        StoryVariant::DescriptionDialogue => StoryView::compose(story, mode).map(|v| v.tokens()),
        StoryVariant::QuestionDialogue => {
            if !mode.uses_story() {
                return None;
            }
            let mut out = question.to_vec();
            out.extend(story.dialogue.iter().cloned());
            Some(out)
        }
    }
}

/// Fuses a question with a story view: question, then each present story part,
/// with a separator token in front of every part. No view returns the
/// question alone.
pub fn fuse(question: &[String], view: Option<&StoryView>) -> Vec<String> {
    let mut out = question.to_vec();
    if let Some(v) = view {
        for part in [&v.description, &v.dialogue].into_iter().flatten() {
            out.push(SEP_TOKEN.to_string());
            out.extend(part.iter().cloned());
        }
    }
    out
}

/// Both scoring functions plus the vocabulary they index with.
#[derive(Debug, Clone, PartialEq)]
pub struct QAModelParams {
    pub vocab: Vocab,
    /// Story-selection scorer.
    pub story_scorer: ScorerParams,
    /// Answer-selection scorer.
    pub answer_scorer: ScorerParams,
    pub story_margin: f64,
    pub answer_margin: f64,
}

/// Architecture knobs shared by both scorers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelDims {
    pub embed_dim: usize,
    pub hidden: usize,
    pub attn_dim: usize,
}

impl Default for ModelDims {
    fn default() -> Self {
        ModelDims {
            embed_dim: 32,
            hidden: 32,
            attn_dim: 32,
        }
    }
}

impl QAModelParams {
    /// Seeded init; the two scorers share the architecture but draw separate
    /// parameters.
    pub fn init(vocab: Vocab, dims: ModelDims, seed: u64) -> Self {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = ScorerConfig {
            vocab_size: vocab.len(),
            embed_dim: dims.embed_dim,
            hidden: dims.hidden,
            attn_dim: dims.attn_dim,
        };
        let story_scorer = ScorerParams::init(cfg, &mut rng);
        let answer_scorer = ScorerParams::init(cfg, &mut rng);
        QAModelParams {
            vocab,
            story_scorer,
            answer_scorer,
            story_margin: 1.0,
            answer_margin: 1.0,
        }
    }

    pub fn dims(&self) -> ModelDims {
        ModelDims {
            embed_dim: self.story_scorer.cfg.embed_dim,
            hidden: self.story_scorer.cfg.hidden,
            attn_dim: self.story_scorer.cfg.attn_dim,
        }
    }

    pub fn zero_grads(&mut self) {
        self.story_scorer.zero_grads();
        self.answer_scorer.zero_grads();
    }

    pub fn groups_mut(&mut self) -> Vec<&mut crate::numcore::ParamGroup> {
        let mut gs = self.story_scorer.groups_mut();
        gs.extend(self.answer_scorer.groups_mut());
        gs
    }

    /// Owned, prefix-named copies of every group (`g.*` then `h.*`).
    pub fn to_groups(&self) -> Vec<crate::numcore::ParamGroup> {
        let mut gs = self.story_scorer.to_groups("g");
        gs.extend(self.answer_scorer.to_groups("h"));
        gs
    }

    /// Rebuilds a model from groups produced by [`Self::to_groups`].
    pub fn from_groups(
        vocab: Vocab,
        dims: ModelDims,
        margins: (f64, f64),
        groups: &[crate::numcore::ParamGroup],
    ) -> Result<Self> {
        let cfg = ScorerConfig {
            vocab_size: vocab.len(),
            embed_dim: dims.embed_dim,
            hidden: dims.hidden,
            attn_dim: dims.attn_dim,
        };
        Ok(QAModelParams {
            vocab,
            story_scorer: ScorerParams::from_groups(cfg, "g", groups)?,
            answer_scorer: ScorerParams::from_groups(cfg, "h", groups)?,
            story_margin: margins.0,
            answer_margin: margins.1,
        })
    }
}

/// Result of ranking stories against a question.
#[derive(Debug, Clone)]
pub struct StorySelection {
    pub index: usize,
    pub scores: Vec<f64>,
    /// 1-based rank of the gold story when a label was supplied; ties count
    /// pessimistically (every equal-scored competitor ranks ahead).
    pub rank_of_gold: Option<usize>,
    pub trace: Option<AttentionTrace>,
}

/// Scores every story against the question and picks the argmax, ties to the
/// lowest index.
pub fn select_story(
    scorer: &ScorerParams,
    vocab: &Vocab,
    question: &[String],
    stories: &[Vec<String>],
    attention_on: bool,
    gold_index: Option<usize>,
) -> Result<StorySelection> {
    if stories.is_empty() {
        return Err(Error::Contract("select_story: no stories".into()));
    }
    let q_side = encode_side(scorer, &vocab.ids(question))?;
    let mut scores = Vec::with_capacity(stories.len());
    let mut best = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    let mut best_trace = None;
    for (i, story) in stories.iter().enumerate() {
        let side = encode_side(scorer, &vocab.ids(story))?;
        let (score, cache) = score_with_cache(scorer, &q_side, &side, attention_on)?;
        if score > best_score {
            best_score = score;
            best = i;
            best_trace = cache.trace(&side);
        }
        scores.push(score);
    }
    let rank_of_gold = gold_index.map(|g| {
        1 + scores
            .iter()
            .enumerate()
            .filter(|(i, &s)| *i != g && s >= scores[g])
            .count()
    });
    Ok(StorySelection {
        index: best,
        scores,
        rank_of_gold,
        trace: best_trace,
    })
}

/// Result of ranking the five candidate answers.
#[derive(Debug, Clone)]
pub struct AnswerSelection {
    pub index: usize,
    pub scores: Vec<f64>,
    pub trace: Option<AttentionTrace>,
}

/// Scores each answer against the fused sequence; argmax, lowest index wins
/// ties. Exactly five answers are required.
pub fn select_answer(
    scorer: &ScorerParams,
    vocab: &Vocab,
    fused: &[String],
    answers: &[Vec<String>],
    attention_on: bool,
) -> Result<AnswerSelection> {
    if answers.len() != ANSWER_CHOICES {
        return Err(Error::Contract(format!(
            "select_answer: expected {ANSWER_CHOICES} answers, got {}",
            answers.len()
        )));
    }
    let fused_side = encode_side(scorer, &vocab.ids(fused))?;
    let mut scores = Vec::with_capacity(answers.len());
    let mut best = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    let mut best_trace = None;
    for (i, answer) in answers.iter().enumerate() {
        let side = encode_side(scorer, &vocab.ids(answer))?;
        let (score, cache) = score_with_cache(scorer, &fused_side, &side, attention_on)?;
        if score > best_score {
            best_score = score;
            best = i;
            best_trace = cache.trace(&side);
        }
        scores.push(score);
    }
    Ok(AnswerSelection {
        index: best,
        scores,
        trace: best_trace,
    })
}

/// Inference-time switches.
#[derive(Debug, Clone, Copy)]
pub struct InferenceOptions {
    pub mode: AblationMode,
    pub attention: bool,
    pub variant: StoryVariant,
}

/// Full output of answering one question.
#[derive(Debug, Clone)]
pub struct Prediction {
    /// Selected story; absent in mode Q.
    pub story_index: Option<usize>,
    pub story_scores: Vec<f64>,
    pub story_rank: Option<usize>,
    pub fused: Vec<String>,
    pub answer_index: usize,
    pub answer_scores: Vec<f64>,
    pub story_trace: Option<AttentionTrace>,
    pub answer_trace: Option<AttentionTrace>,
}

/// Answers one question: read the episode's stories from memory, select the
/// best story, fuse, then select the answer.
pub fn answer_question(
    model: &QAModelParams,
    mem: &StoryMemory,
    episode_id: &str,
    q: &QAItem,
    opts: InferenceOptions,
) -> Result<Prediction> {
    let (fused, story_index, story_scores, story_rank, story_trace) = if opts.mode.uses_story() {
        let stories = mem.read_stories(episode_id)?;
        let texts: Vec<Vec<String>> = stories
            .iter()
            .map(|s| {
                story_selection_tokens(s, opts.mode, opts.variant, &q.question)
                    .expect("story mode produces tokens")
            })
            .collect();
        let sel = select_story(
            &model.story_scorer,
            &model.vocab,
            &q.question,
            &texts,
            opts.attention,
            Some(q.relevant_pair_index),
        )?;
        let view = StoryView::compose(&stories[sel.index], opts.mode);
        let fused = fuse(&q.question, view.as_ref());
        (fused, Some(sel.index), sel.scores, sel.rank_of_gold, sel.trace)
    } else {
        (fuse(&q.question, None), None, Vec::new(), None, None)
    };

    let answers: Vec<Vec<String>> = q.answers.to_vec();
    let ans = select_answer(
        &model.answer_scorer,
        &model.vocab,
        &fused,
        &answers,
        opts.attention,
    )?;
    Ok(Prediction {
        story_index,
        story_scores,
        story_rank,
        fused,
        answer_index: ans.index,
        answer_scores: ans.scores,
        story_trace,
        answer_trace: ans.trace,
    })
}

/// Retrieval inputs needed when a mode reconstructs descriptions through the
/// embedder.
pub struct RetrievalContext<'a> {
    pub params: &'a EmbedderParams,
    pub pool: &'a [DescriptionCandidate],
}

/// Reconstructs every pair of every episode into memory. Description source
/// follows the mode; modes without V or E still store ground truth so the
/// memory stays well formed.
pub fn build_memory(
    episodes: &[Episode],
    retrieval: Option<&RetrievalContext>,
    mode: AblationMode,
) -> Result<StoryMemory> {
    let source = mode
        .description_source()
        .unwrap_or(DescriptionMode::GroundTruth);
    let mut mem = StoryMemory::new();
    for ep in episodes {
        for (i, pair) in ep.pairs.iter().enumerate() {
            let story = match source {
                DescriptionMode::GroundTruth => {
                    Story::new(pair.description.clone(), pair.dialogue.clone(), i)?
                }
                DescriptionMode::Retrieved => {
                    let ctx = retrieval.ok_or_else(|| {
                        Error::Retrieval(
                            "mode with V but no E needs a trained embedder and pool".into(),
                        )
                    })?;
                    crate::embedder::reconstruct_story(
                        pair,
                        i,
                        ctx.pool,
                        ctx.params,
                        DescriptionMode::Retrieved,
                    )?
                }
            };
            mem.write_story(&ep.id, story);
        }
    }
    Ok(mem)
}

/// One supervised story candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct StoryTriplet {
    pub tokens: Vec<String>,
    pub correct: bool,
}

/// One supervised answer candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct AnswerTriplet {
    pub tokens: Vec<String>,
    pub correct: bool,
}

/// The two triplet groups for one question: (question, story, label) for
/// every story of the episode, and (fused, answer, label) for every answer.
#[derive(Debug, Clone, PartialEq)]
pub struct Triplets {
    pub question: Vec<String>,
    pub stories: Vec<StoryTriplet>,
    /// Fused sequence built from the correct pair's story.
    pub fused: Vec<String>,
    pub answers: Vec<AnswerTriplet>,
}

impl Triplets {
    pub fn validate(&self) -> Result<()> {
        if self.answers.len() != ANSWER_CHOICES {
            return Err(Error::Contract("wrong answer triplet count".into()));
        }
        if self.answers.iter().filter(|a| a.correct).count() != 1 {
            return Err(Error::Contract("exactly one answer must be correct".into()));
        }
        if !self.stories.is_empty() && self.stories.iter().filter(|s| s.correct).count() != 1 {
            return Err(Error::Contract("exactly one story must be correct".into()));
        }
        Ok(())
    }
}

/// Builds the supervised triplets for one question under a mode and variant.
pub fn build_triplets(
    episode: &Episode,
    q: &QAItem,
    retrieval: Option<&RetrievalContext>,
    mode: AblationMode,
    variant: StoryVariant,
) -> Result<Triplets> {
    if q.relevant_pair_index >= episode.pairs.len() {
        return Err(Error::Contract(format!(
            "supervision label {} outside episode of {} pairs",
            q.relevant_pair_index,
            episode.pairs.len()
        )));
    }
    let (stories, fused) = if mode.uses_story() {
        let source = mode
            .description_source()
            .unwrap_or(DescriptionMode::GroundTruth);
        let mut stories = Vec::with_capacity(episode.pairs.len());
        let mut correct_story = None;
        for (i, pair) in episode.pairs.iter().enumerate() {
            let story = match source {
                DescriptionMode::GroundTruth => {
                    Story::new(pair.description.clone(), pair.dialogue.clone(), i)?
                }
                DescriptionMode::Retrieved => {
                    let ctx = retrieval.ok_or_else(|| {
                        Error::Retrieval("retrieved descriptions need an embedder".into())
                    })?;
                    crate::embedder::reconstruct_story(
                        pair,
                        i,
                        ctx.pool,
                        ctx.params,
                        DescriptionMode::Retrieved,
                    )?
                }
            };
            let tokens = story_selection_tokens(&story, mode, variant, &q.question)
                .expect("story mode produces tokens");
            if i == q.relevant_pair_index {
                correct_story = Some(story);
            }
            stories.push(StoryTriplet {
                tokens,
                correct: i == q.relevant_pair_index,
            });
        }
        let view = StoryView::compose(&correct_story.expect("label in range"), mode);
        (stories, fuse(&q.question, view.as_ref()))
    } else {
        (Vec::new(), fuse(&q.question, None))
    };

    let answers = q
        .answers
        .iter()
        .enumerate()
        .map(|(r, a)| AnswerTriplet {
            tokens: a.clone(),
            correct: r == q.correct_answer_index,
        })
        .collect();

    let t = Triplets {
        question: q.question.clone(),
        stories,
        fused,
        answers,
    };
    t.validate()?;
    Ok(t)
}

/// Triplets with tokens resolved to vocabulary ids, ready for scoring.
#[derive(Debug, Clone)]
pub struct TripletIds {
    pub question: Vec<usize>,
    pub stories: Vec<(Vec<usize>, bool)>,
    pub fused: Vec<usize>,
    pub answers: Vec<(Vec<usize>, bool)>,
}

impl TripletIds {
    pub fn resolve(t: &Triplets, vocab: &Vocab) -> Self {
        TripletIds {
            question: vocab.ids(&t.question),
            stories: t
                .stories
                .iter()
                .map(|s| (vocab.ids(&s.tokens), s.correct))
                .collect(),
            fused: vocab.ids(&t.fused),
            answers: t
                .answers
                .iter()
                .map(|a| (vocab.ids(&a.tokens), a.correct))
                .collect(),
        }
    }
}

/// One hinge group: anchor sequence scored against one positive and its
/// negatives through a scorer, with gradients accumulated when requested.
fn hinge_group(
    scorer: &mut ScorerParams,
    anchor_ids: &[usize],
    candidates: &[(Vec<usize>, bool)],
    margin: f64,
    attention_on: bool,
    with_grads: bool,
) -> Result<f64> {
    if candidates.len() < 2 {
        return Ok(0.0); // no negatives, no ranking terms
    }
    let anchor = encode_side(scorer, anchor_ids)?;
    let mut sides = Vec::with_capacity(candidates.len());
    let mut caches = Vec::with_capacity(candidates.len());
    let mut pos_idx = None;
    for (i, (ids, correct)) in candidates.iter().enumerate() {
        let side = encode_side(scorer, ids)?;
        let (_, cache) = score_with_cache(scorer, &anchor, &side, attention_on)?;
        if *correct {
            pos_idx = Some(i);
        }
        sides.push(side);
        caches.push(cache);
    }
    let pos_idx = pos_idx.ok_or_else(|| Error::Contract("no positive candidate".into()))?;
    let pos_score = caches[pos_idx].score;
    let neg_scores: Vec<f64> = caches
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != pos_idx)
        .map(|(_, c)| c.score)
        .collect();
    let (loss, active) = hinge_rank(pos_score, &neg_scores, margin);
    if !with_grads || loss == 0.0 {
        return Ok(loss);
    }

    let n_active = active.iter().filter(|&&a| a).count() as f64;
    let mut anchor_grad = SideGrad::new(&anchor);
    let mut neg_iter = active.iter();
    for (i, side) in sides.iter().enumerate() {
        let upstream = if i == pos_idx {
            -n_active
        } else if *neg_iter.next().expect("mask aligned") {
            1.0
        } else {
            continue;
        };
        let mut side_grad = SideGrad::new(side);
        backward_pair(
            scorer,
            &anchor,
            side,
            &caches[i],
            upstream,
            &mut anchor_grad,
            &mut side_grad,
        )?;
        backward_side(scorer, side, &side_grad);
    }
    backward_side(scorer, &anchor, &anchor_grad);
    Ok(loss)
}

/// The joint loss: story ranking through the story scorer plus answer ranking
/// through the answer scorer. Forward only.
pub fn joint_loss_forward(
    model: &QAModelParams,
    t: &TripletIds,
    attention_on: bool,
) -> Result<f64> {
    // hinge_group only mutates on with_grads; clone-free via unsafe is not
    // worth it, so split borrows through a shallow copy of the params.
    let mut story = model.story_scorer.clone();
    let mut answer = model.answer_scorer.clone();
    let s = hinge_group(
        &mut story,
        &t.question,
        &t.stories,
        model.story_margin,
        attention_on,
        false,
    )?;
    let a = hinge_group(
        &mut answer,
        &t.fused,
        &t.answers,
        model.answer_margin,
        attention_on,
        false,
    )?;
    Ok(s + a)
}

/// The joint loss with gradients accumulated into both scorers.
pub fn joint_loss_with_grads(
    model: &mut QAModelParams,
    t: &TripletIds,
    attention_on: bool,
) -> Result<f64> {
    let s = hinge_group(
        &mut model.story_scorer,
        &t.question,
        &t.stories,
        model.story_margin,
        attention_on,
        true,
    )?;
    let a = hinge_group(
        &mut model.answer_scorer,
        &t.fused,
        &t.answers,
        model.answer_margin,
        attention_on,
        true,
    )?;
    let loss = s + a;
    if !loss.is_finite() {
        return Err(Error::Divergence("joint loss is non-finite".into()));
    }
    Ok(loss)
}

// --- model checkpoint -------------------------------------------------------

const QA_CHECKPOINT_VERSION: u32 = 1;

/// Tagged-block container sharing the embedder checkpoint conventions:
/// magic, version, vocabulary, architecture sizes, margins, then one named
/// block per parameter group. Bit-exact round trip.
pub fn save_qa_checkpoint(model: &QAModelParams, path: &Path) -> Result<()> {
    use crate::ckpt::*;
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(MAGIC)?;
    write_u32(&mut w, QA_CHECKPOINT_VERSION)?;
    write_u32(&mut w, model.vocab.len() as u32)?;
    for t in model.vocab.tokens() {
        write_string(&mut w, t)?;
    }
    let dims = model.dims();
    write_u32(&mut w, dims.embed_dim as u32)?;
    write_u32(&mut w, dims.hidden as u32)?;
    write_u32(&mut w, dims.attn_dim as u32)?;
    write_f64(&mut w, model.story_margin)?;
    write_f64(&mut w, model.answer_margin)?;
    let groups = model.to_groups();
    write_u32(&mut w, groups.len() as u32)?;
    for g in &groups {
        write_block(&mut w, &g.name, &g.value)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_qa_checkpoint(path: &Path) -> Result<QAModelParams> {
    use crate::ckpt::*;
    let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
    expect_magic_and_version(&mut r, QA_CHECKPOINT_VERSION)?;
    let vocab_len = read_u32(&mut r)? as usize;
    let mut tokens = Vec::with_capacity(vocab_len);
    for _ in 0..vocab_len {
        tokens.push(read_string(&mut r)?);
    }
    let vocab = Vocab::from_tokens(tokens)?;
    let dims = ModelDims {
        embed_dim: read_u32(&mut r)? as usize,
        hidden: read_u32(&mut r)? as usize,
        attn_dim: read_u32(&mut r)? as usize,
    };
    let story_margin = read_f64(&mut r)?;
    let answer_margin = read_f64(&mut r)?;
    let n_blocks = read_u32(&mut r)? as usize;
    let mut groups = Vec::with_capacity(n_blocks);
    for _ in 0..n_blocks {
        groups.push(read_block(&mut r)?);
    }
    QAModelParams::from_groups(vocab, dims, (story_margin, answer_margin), &groups)
}
