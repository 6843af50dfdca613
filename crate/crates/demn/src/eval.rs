//! Metrics and reports: QA accuracy, mean reciprocal rank of the story
//! selector, per-question prediction dumps, and ablation tables.

use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::Episode;
use crate::error::{Error, Result};
use crate::memory::StoryMemory;
use crate::qa::{answer_question, AblationMode, InferenceOptions, QAModelParams};

/// Aggregated evaluation result for one model and mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub accuracy: f64,
    /// Absent for modes without story selection.
    pub mrr: Option<f64>,
    pub n_questions: usize,
    pub mode: AblationMode,
    pub seed: u64,
}

/// Fraction of matching entries between two aligned index lists.
pub fn accuracy(predicted: &[usize], gold: &[usize]) -> Result<f64> {
    if predicted.is_empty() || predicted.len() != gold.len() {
        return Err(Error::Contract(format!(
            "accuracy: {} predictions vs {} gold labels",
            predicted.len(),
            gold.len()
        )));
    }
    let correct = predicted.iter().zip(gold).filter(|(p, g)| p == g).count();
    Ok(correct as f64 / predicted.len() as f64)
}

/// Mean of inverse ranks; ranks are 1-based.
pub fn mrr(story_ranks: &[usize]) -> Result<f64> {
    if story_ranks.is_empty() {
        return Err(Error::Contract("mrr: no ranks".into()));
    }
    if story_ranks.iter().any(|&r| r < 1) {
        return Err(Error::Contract("mrr: rank below 1".into()));
    }
    Ok(story_ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / story_ranks.len() as f64)
}

/// One dumped prediction line, enough to recompute every metric externally.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub episode_id: String,
    pub question_id: usize,
    pub mode: AblationMode,
    pub story_index: Option<usize>,
    pub answer_index: usize,
    pub gold_story: usize,
    pub gold_answer: usize,
    pub story_rank: Option<usize>,
}

impl PredictionRecord {
    pub fn to_csv_line(&self) -> String {
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_else(|| "-".into());
        format!(
            "{},{},{},{},{},{},{},{}",
            self.episode_id,
            self.question_id,
            self.mode,
            opt(self.story_index),
            self.answer_index,
            self.gold_story,
            self.gold_answer,
            opt(self.story_rank),
        )
    }

    pub fn parse_csv_line(line: &str, line_no: usize) -> Result<Self> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 8 fields, got {}", fields.len()),
            });
        }
        let parse_usize = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("bad integer `{s}`"),
            })
        };
        let parse_opt = |s: &str| -> Result<Option<usize>> {
            if s == "-" {
                Ok(None)
            } else {
                parse_usize(s).map(Some)
            }
        };
        Ok(PredictionRecord {
            episode_id: fields[0].to_string(),
            question_id: parse_usize(fields[1])?,
            mode: AblationMode::parse(fields[2])?,
            story_index: parse_opt(fields[3])?,
            answer_index: parse_usize(fields[4])?,
            gold_story: parse_usize(fields[5])?,
            gold_answer: parse_usize(fields[6])?,
            story_rank: parse_opt(fields[7])?,
        })
    }
}

const DUMP_HEADER: &str =
    "episode_id,question_id,mode,story_index,answer_index,gold_story,gold_answer,story_rank";

/// Writes a prediction dump. `meta` lines (config hashes) go first as
/// comments.
pub fn write_predictions(path: &Path, records: &[PredictionRecord], meta: &[String]) -> Result<()> {
    let mut out = String::new();
    for m in meta {
        writeln!(out, "# {m}").unwrap();
    }
    writeln!(out, "{DUMP_HEADER}").unwrap();
    for r in records {
        writeln!(out, "{}", r.to_csv_line()).unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredictionRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.is_empty() || line.starts_with('#') || line == DUMP_HEADER {
            continue;
        }
        out.push(PredictionRecord::parse_csv_line(line, line_no)?);
    }
    Ok(out)
}

/// Recomputes metrics from dumped records. This is the independent route used
/// to cross-check in-process aggregation; the two must agree exactly.
pub fn metrics_from_records(records: &[PredictionRecord], seed: u64) -> Result<Metrics> {
    if records.is_empty() {
        return Err(Error::Contract("no prediction records".into()));
    }
    let mode = records[0].mode;
    if records.iter().any(|r| r.mode != mode) {
        return Err(Error::Contract("mixed modes in one dump".into()));
    }
    let predicted: Vec<usize> = records.iter().map(|r| r.answer_index).collect();
    let gold: Vec<usize> = records.iter().map(|r| r.gold_answer).collect();
    let acc = accuracy(&predicted, &gold)?;
    let ranks: Vec<usize> = records.iter().filter_map(|r| r.story_rank).collect();
    let mrr_value = if ranks.is_empty() {
        None
    } else {
        Some(mrr(&ranks)?)
    };
    Ok(Metrics {
        accuracy: acc,
        mrr: mrr_value,
        n_questions: records.len(),
        mode,
        seed,
    })
}

/// Evaluation switches.
#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    pub infer: InferenceOptions,
    pub seed: u64,
    /// Upper bound on worker threads; the `DEMN_THREADS` environment variable
    /// caps it further. Results are identical at any thread count.
    pub threads: usize,
}

fn thread_budget(requested: usize, jobs: usize) -> usize {
    let hw = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    let env_cap = std::env::var("DEMN_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(usize::MAX);
    requested.max(1).min(hw).min(env_cap).min(jobs.max(1))
}

/// Runs the model over every question of every episode and aggregates
/// accuracy and (for story modes) MRR. Questions fan out across threads; the
/// per-question results are reassembled in question order before aggregation,
/// so the outcome does not depend on the thread count.
pub fn evaluate(
    model: &QAModelParams,
    mem: &StoryMemory,
    episodes: &[Episode],
    opts: EvalOptions,
) -> Result<(Metrics, Vec<PredictionRecord>)> {
    let jobs: Vec<(usize, usize)> = episodes
        .iter()
        .enumerate()
        .flat_map(|(e, ep)| (0..ep.qa_items.len()).map(move |q| (e, q)))
        .collect();
    if jobs.is_empty() {
        return Err(Error::Contract("no questions to evaluate".into()));
    }
    let n_threads = thread_budget(opts.threads, jobs.len());

    let mut results: Vec<Option<Result<PredictionRecord>>> = Vec::new();
    results.resize_with(jobs.len(), || None);
    let chunk = jobs.len().div_ceil(n_threads);
    std::thread::scope(|scope| {
        for (slot, job_chunk) in results.chunks_mut(chunk).zip(jobs.chunks(chunk)) {
            scope.spawn(move || {
                for (out, &(e, qi)) in slot.iter_mut().zip(job_chunk) {
                    let ep = &episodes[e];
                    let q = &ep.qa_items[qi];
                    let rec = answer_question(model, mem, &ep.id, q, opts.infer).map(|pred| {
                        PredictionRecord {
                            episode_id: ep.id.clone(),
                            question_id: qi,
                            mode: opts.infer.mode,
                            story_index: pred.story_index,
                            answer_index: pred.answer_index,
                            gold_story: q.relevant_pair_index,
                            gold_answer: q.correct_answer_index,
                            story_rank: pred.story_rank,
                        }
                    });
                    *out = Some(rec);
                }
            });
        }
    });

    let records: Vec<PredictionRecord> = results
        .into_iter()
        .map(|r| r.expect("every job filled"))
        .collect::<Result<_>>()?;
    let metrics = metrics_from_records(&records, opts.seed)?;
    Ok((metrics, records))
}

/// One row of an ablation report.
#[derive(Debug, Clone)]
pub struct AblationEntry {
    /// Model variant label, e.g. "attention" or "no attention".
    pub variant: String,
    pub metrics: Metrics,
}

fn fmt_cell(m: &Metrics) -> String {
    match m.mrr {
        Some(v) => format!("{:.1} ({:.2})", m.accuracy * 100.0, v),
        None => format!("{:.1}", m.accuracy * 100.0),
    }
}

/// Plain-text ablation table: one row per variant, one column per mode, in
/// fixed mode order. Accuracy in percent with one decimal, MRR in
/// parentheses where defined.
pub fn ablation_table(entries: &[AblationEntry], meta: &[String]) -> String {
    let variants: Vec<&str> = {
        let mut seen = Vec::new();
        for e in entries {
            if !seen.contains(&e.variant.as_str()) {
                seen.push(e.variant.as_str());
            }
        }
        seen
    };
    let mut out = String::new();
    for m in meta {
        writeln!(out, "# {m}").unwrap();
    }
    let width = 14usize;
    write!(out, "{:<16}", "variant").unwrap();
    for mode in AblationMode::ALL {
        write!(out, "{:>width$}", mode.to_string()).unwrap();
    }
    out.push('\n');
    for v in variants {
        write!(out, "{v:<16}").unwrap();
        for mode in AblationMode::ALL {
            let cell = entries
                .iter()
                .find(|e| e.variant == v && e.metrics.mode == mode)
                .map(|e| fmt_cell(&e.metrics))
                .unwrap_or_else(|| "-".into());
            write!(out, "{cell:>width$}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Machine-readable ablation records: one CSV line per (variant, mode).
pub fn ablation_records(entries: &[AblationEntry], meta: &[String]) -> String {
    let mut out = String::new();
    for m in meta {
        writeln!(out, "# {m}").unwrap();
    }
    writeln!(out, "variant,mode,accuracy,mrr,n_questions,seed").unwrap();
    for e in entries {
        writeln!(
            out,
            "{},{},{:.6},{},{},{}",
            e.variant,
            e.metrics.mode,
            e.metrics.accuracy,
            e.metrics
                .mrr
                .map(|v| format!("{v:.6}"))
                .unwrap_or_else(|| "-".into()),
            e.metrics.n_questions,
            e.metrics.seed,
        )
        .unwrap();
    }
    out
}
