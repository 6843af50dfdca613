// Scratch harness for hyperparameter calibration; prints learning curves.

use demn::corpus::{generate_corpus, split_dataset, CorpusConfig};
use demn::eval::{evaluate, EvalOptions};
use demn::qa::{
    build_memory, AblationMode, InferenceOptions, ModelDims, StoryVariant, TrainQaConfig,
};
use std::time::Instant;

fn model_ref(m: &demn::qa::QAModelParams) -> &demn::qa::QAModelParams { m }

fn gold_story_answer_accuracy(
    model: &demn::qa::QAModelParams,
    episodes: &[demn::corpus::Episode],
    mode: AblationMode,
    attention: bool,
) -> (f64, String) {
    use demn::memory::Story;
    use demn::qa::{fuse, select_answer, StoryView};
    use std::collections::BTreeMap;
    let mut hits = 0usize;
    let mut total = 0usize;
    let mut by_type: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for ep in episodes {
        for q in &ep.qa_items {
            let pair = &ep.pairs[q.relevant_pair_index];
            let story =
                Story::new(pair.description.clone(), pair.dialogue.clone(), 0).unwrap();
            let view = StoryView::compose(&story, mode);
            let fused = fuse(&q.question, view.as_ref());
            let answers: Vec<Vec<String>> = q.answers.to_vec();
            let sel = select_answer(
                &model.answer_scorer,
                &model.vocab,
                &fused,
                &answers,
                attention,
            )
            .unwrap();
            total += 1;
            let entry = by_type.entry(q.question[0].clone()).or_insert((0, 0));
            entry.1 += 1;
            if sel.index == q.correct_answer_index {
                hits += 1;
                entry.0 += 1;
            }
        }
    }
    let breakdown = by_type
        .iter()
        .map(|(k, (h, t))| format!("{k} {:.2}", *h as f64 / *t as f64))
        .collect::<Vec<_>>()
        .join(" ");
    (hits as f64 / total as f64, breakdown)
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let lr: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.05);
    let epochs: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(50);
    let seed: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(7);
    let hidden: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(32);
    let embed: usize = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(32);

    let t0 = Instant::now();
    let mut ccfg = CorpusConfig::default();
    if let Ok(kinds) = std::env::var("KINDS") {
        use demn::corpus::QuestionKind;
        ccfg.question_kinds = kinds
            .chars()
            .map(|c| match c {
                'w' => QuestionKind::Where,
                'a' => QuestionKind::What,
                _ => QuestionKind::Who,
            })
            .collect();
    }
    let eps = generate_corpus(7, 50, 8, 5, &ccfg).unwrap();
    let (train, val, test) = split_dataset(eps, (0.6, 0.2, 0.2)).unwrap();
    println!(
        "corpus: {} train / {} val / {} test episodes ({:.1}s)",
        train.len(),
        val.len(),
        test.len(),
        t0.elapsed().as_secs_f64()
    );

    let mode = AblationMode::QLVE;
    let infer = InferenceOptions {
        mode,
        attention: true,
        variant: StoryVariant::default(),
    };
    let mem_train = build_memory(&train, None, mode).unwrap();
    let mem_val = build_memory(&val, None, mode).unwrap();
    let mem_test = build_memory(&test, None, mode).unwrap();

    let mut cfg = TrainQaConfig {
        lr,
        epochs: 0,
        seed,
        mode,
        attention: true,
        variant: StoryVariant::default(),
        dims: ModelDims {
            embed_dim: embed,
            hidden,
            attn_dim: hidden,
        },
        story_margin: 1.0,
        answer_margin: 1.0,
    };

    // Train in chunks so we can print a curve while keeping determinism of a
    // single long run unnecessary here (calibration only).
    let mut total = 0usize;
    while total < epochs {
        let chunk = 5.min(epochs - total);
        cfg.epochs = total + chunk;
        let t = Instant::now();
        let (model, log) = demn::qa::train_qa(&train, None, &cfg).unwrap();
        total += chunk;
        let train_time = t.elapsed().as_secs_f64();
        let ev = |mem: &demn::memory::StoryMemory, eps: &[demn::corpus::Episode]| {
            evaluate(
                model_ref(&model),
                mem,
                eps,
                EvalOptions {
                    infer,
                    seed,
                    threads: 8,
                },
            )
            .unwrap()
            .0
        };
        let mtr = ev(&mem_train, &train);
        let mv = ev(&mem_val, &val);
        let mt = ev(&mem_test, &test);
        let (gold_train, tr_types) = gold_story_answer_accuracy(&model, &train, mode, true);
        let (gold_test, te_types) = gold_story_answer_accuracy(&model, &test, mode, true);
        println!(
            "epochs {:>3}  loss {:.4}  train acc {:.3} mrr {:.3}  val acc {:.3} mrr {:.3}  test acc {:.3} mrr {:.3}  gold-ans tr {:.3} [{}] te {:.3} [{}]  ({:.1}s)",
            total,
            log.epoch_mean_loss.last().unwrap(),
            mtr.accuracy,
            mtr.mrr.unwrap(),
            mv.accuracy,
            mv.mrr.unwrap(),
            mt.accuracy,
            mt.mrr.unwrap(),
            gold_train,
            tr_types,
            gold_test,
            te_types,
            train_time,
        );
    }
    println!("total {:.1}s", t0.elapsed().as_secs_f64());
}
