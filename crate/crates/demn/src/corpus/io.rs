//! On-disk corpus format.
//!
//! Newline-delimited records, one per line, tab-separated fields. The first
//! line is a header carrying the format version and feature dimensions.
//! Record tags: `EP` opens an episode, `PAIR` appends a scene-dialogue pair,
//! `QA` appends a question. Feature vectors are comma-separated decimals with
//! 17 significant digits, which round-trips 64-bit reals exactly.

use std::fmt::Write as _;
use std::path::Path;

use super::{Episode, FeatureDims, FrameSpec, QAItem, ScenePair, ANSWER_CHOICES};
use crate::error::{Error, Result};

const FORMAT_TAG: &str = "DEMN-CORPUS";
const FORMAT_VERSION: &str = "v1";

/// Serializes an f64 with 17 significant digits (exact round trip).
pub(crate) fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn join_reals(v: &[f64]) -> String {
    let mut out = String::with_capacity(v.len() * 24);
    for (i, x) in v.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format_real(*x));
    }
    out
}

fn parse_reals(field: &str, line: usize) -> Result<Vec<f64>> {
    field
        .split(',')
        .map(|s| {
            s.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("bad real `{s}`"),
            })
        })
        .collect()
}

fn join_tokens(tokens: &[String]) -> String {
    tokens.join(" ")
}

fn parse_tokens(field: &str, line: usize) -> Result<Vec<String>> {
    if field.is_empty() {
        return Err(Error::Parse {
            line,
            message: "empty token list".into(),
        });
    }
    Ok(field.split(' ').map(|s| s.to_string()).collect())
}

fn join_spec(spec: &[FrameSpec]) -> String {
    spec.iter()
        .map(|f| format!("{}:{}:{}", f.character, f.action, f.location))
        .collect::<Vec<_>>()
        .join(";")
}

fn parse_spec(field: &str, line: usize) -> Result<Vec<FrameSpec>> {
    field
        .split(';')
        .map(|frame| {
            let parts: Vec<&str> = frame.split(':').collect();
            if parts.len() != 3 {
                return Err(Error::Parse {
                    line,
                    message: format!("bad frame spec `{frame}`"),
                });
            }
            let nums: Vec<u32> = parts
                .iter()
                .map(|p| {
                    p.parse::<u32>().map_err(|_| Error::Parse {
                        line,
                        message: format!("bad frame id `{p}`"),
                    })
                })
                .collect::<Result<_>>()?;
            Ok(FrameSpec {
                character: nums[0],
                action: nums[1],
                location: nums[2],
            })
        })
        .collect()
}

/// Writes a corpus to `path`. `meta` entries are appended to the header line
/// as `key=value` fields (the CLI records its config hash this way).
pub fn write_corpus(path: &Path, episodes: &[Episode], meta: &[(&str, String)]) -> Result<()> {
    let dims = super::feature_dims(episodes)?;
    let mut out = String::new();
    write!(
        out,
        "{FORMAT_TAG}\t{FORMAT_VERSION}\tscene_dim={}\tdialogue_dim={}\tdescription_dim={}",
        dims.scene, dims.dialogue, dims.description
    )
    .unwrap();
    for (k, v) in meta {
        write!(out, "\t{k}={v}").unwrap();
    }
    out.push('\n');

    for ep in episodes {
        ep.validate()?;
        writeln!(out, "EP\t{}", ep.id).unwrap();
        for (i, p) in ep.pairs.iter().enumerate() {
            writeln!(
                out,
                "PAIR\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                ep.id,
                i,
                join_spec(&p.scene_spec),
                join_tokens(&p.dialogue),
                join_tokens(&p.description),
                join_reals(&p.scene_feature),
                join_reals(&p.dialogue_feature),
                join_reals(&p.description_feature),
            )
            .unwrap();
        }
        for (i, qa) in ep.qa_items.iter().enumerate() {
            let answers = qa
                .answers
                .iter()
                .map(|a| join_tokens(a))
                .collect::<Vec<_>>()
                .join("|");
            writeln!(
                out,
                "QA\t{}\t{}\t{}\t{}\t{}\t{}",
                ep.id,
                i,
                join_tokens(&qa.question),
                answers,
                qa.correct_answer_index,
                qa.relevant_pair_index,
            )
            .unwrap();
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Loads a corpus written by [`write_corpus`]. Malformed input yields a parse
/// error carrying the offending line number.
pub fn load_corpus(path: &Path) -> Result<Vec<Episode>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();

    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header".into(),
    })?;
    let dims = parse_header(header)?;

    let mut episodes: Vec<Episode> = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1; // 1-based for messages
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        match fields[0] {
            "EP" => {
                if fields.len() != 2 {
                    return Err(Error::Parse {
                        line,
                        message: format!("EP record needs 2 fields, got {}", fields.len()),
                    });
                }
                if episodes.iter().any(|e| e.id == fields[1]) {
                    return Err(Error::Parse {
                        line,
                        message: format!("duplicate episode id `{}`", fields[1]),
                    });
                }
                episodes.push(Episode {
                    id: fields[1].to_string(),
                    pairs: Vec::new(),
                    qa_items: Vec::new(),
                });
            }
            "PAIR" => {
                if fields.len() != 9 {
                    return Err(Error::Parse {
                        line,
                        message: format!("PAIR record needs 9 fields, got {}", fields.len()),
                    });
                }
                let ep = current_episode(&mut episodes, fields[1], line)?;
                let index: usize = fields[2].parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad pair index `{}`", fields[2]),
                })?;
                if index != ep.pairs.len() {
                    return Err(Error::Parse {
                        line,
                        message: format!("pair index {index} out of order"),
                    });
                }
                let pair = ScenePair {
                    scene_spec: parse_spec(fields[3], line)?,
                    dialogue: parse_tokens(fields[4], line)?,
                    description: parse_tokens(fields[5], line)?,
                    scene_feature: parse_reals(fields[6], line)?,
                    dialogue_feature: parse_reals(fields[7], line)?,
                    description_feature: parse_reals(fields[8], line)?,
                };
                if pair.scene_feature.len() != dims.scene
                    || pair.dialogue_feature.len() != dims.dialogue
                    || pair.description_feature.len() != dims.description
                {
                    return Err(Error::Parse {
                        line,
                        message: "feature length disagrees with header dims".into(),
                    });
                }
                ep.pairs.push(pair);
            }
            "QA" => {
                if fields.len() != 7 {
                    return Err(Error::Parse {
                        line,
                        message: format!("QA record needs 7 fields, got {}", fields.len()),
                    });
                }
                let ep = current_episode(&mut episodes, fields[1], line)?;
                let index: usize = fields[2].parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad question index `{}`", fields[2]),
                })?;
                if index != ep.qa_items.len() {
                    return Err(Error::Parse {
                        line,
                        message: format!("question index {index} out of order"),
                    });
                }
                let answer_fields: Vec<&str> = fields[4].split('|').collect();
                if answer_fields.len() != ANSWER_CHOICES {
                    return Err(Error::Parse {
                        line,
                        message: format!(
                            "expected {ANSWER_CHOICES} answers, got {}",
                            answer_fields.len()
                        ),
                    });
                }
                let mut answers: [Vec<String>; ANSWER_CHOICES] = Default::default();
                for (slot, field) in answers.iter_mut().zip(&answer_fields) {
                    *slot = parse_tokens(field, line)?;
                }
                let correct_answer_index: usize = fields[5].parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad answer index `{}`", fields[5]),
                })?;
                let relevant_pair_index: usize = fields[6].parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("bad pair index `{}`", fields[6]),
                })?;
                ep.qa_items.push(QAItem {
                    question: parse_tokens(fields[3], line)?,
                    answers,
                    correct_answer_index,
                    relevant_pair_index,
                });
            }
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown record tag `{other}`"),
                });
            }
        }
    }
    for ep in &episodes {
        ep.validate().map_err(|e| Error::Parse {
            line: 0,
            message: e.to_string(),
        })?;
    }
    Ok(episodes)
}

fn parse_header(header: &str) -> Result<FeatureDims> {
    let fields: Vec<&str> = header.split('\t').collect();
    if fields.len() < 5 || fields[0] != FORMAT_TAG || fields[1] != FORMAT_VERSION {
        return Err(Error::Parse {
            line: 1,
            message: format!("bad header `{header}`"),
        });
    }
    let mut dims = [None; 3];
    for field in &fields[2..] {
        if let Some((k, v)) = field.split_once('=') {
            let slot = match k {
                "scene_dim" => 0,
                "dialogue_dim" => 1,
                "description_dim" => 2,
                _ => continue, // tolerate extra metadata such as config hashes
            };
            dims[slot] = Some(v.parse::<usize>().map_err(|_| Error::Parse {
                line: 1,
                message: format!("bad dimension `{v}`"),
            })?);
        }
    }
    match dims {
        [Some(scene), Some(dialogue), Some(description)] => Ok(FeatureDims {
            scene,
            dialogue,
            description,
        }),
        _ => Err(Error::Parse {
            line: 1,
            message: "header is missing feature dimensions".into(),
        }),
    }
}

fn current_episode<'a>(
    episodes: &'a mut [Episode],
    id: &str,
    line: usize,
) -> Result<&'a mut Episode> {
    let ep = episodes.last_mut().ok_or(Error::Parse {
        line,
        message: "record before any EP line".into(),
    })?;
    if ep.id != id {
        return Err(Error::Parse {
            line,
            message: format!("record for `{id}` inside episode `{}`", ep.id),
        });
    }
    Ok(ep)
}

#[cfg(test)]
mod tests {
    use super::super::{generate_corpus, CorpusConfig};
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let eps = generate_corpus(7, 4, 5, 3, &CorpusConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.tsv");
        write_corpus(&path, &eps, &[]).unwrap();
        let loaded = load_corpus(&path).unwrap();
        assert_eq!(eps, loaded);

        // write -> load -> write is byte identical
        let path2 = dir.path().join("corpus2.tsv");
        write_corpus(&path2, &loaded, &[]).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }

    #[test]
    fn truncated_file_is_a_parse_error() {
        let eps = generate_corpus(7, 2, 3, 2, &CorpusConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.tsv");
        write_corpus(&path, &eps, &[]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        // cut a PAIR line in half
        let mut broken: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
        let victim = broken.iter().position(|l| l.starts_with("PAIR")).unwrap();
        broken[victim] = broken[victim][..broken[victim].len() / 2].to_string();
        let bad = dir.path().join("broken.tsv");
        std::fs::write(&bad, broken.join("\n")).unwrap();
        match load_corpus(&bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, victim + 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn header_metadata_is_tolerated() {
        let eps = generate_corpus(7, 2, 3, 1, &CorpusConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.tsv");
        write_corpus(&path, &eps, &[("config", "deadbeef".to_string())]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.lines().next().unwrap().contains("config=deadbeef"));
        assert_eq!(load_corpus(&path).unwrap(), eps);
    }

    #[test]
    fn paper_scale_pair_count_loads() {
        // 16,066 scene-dialogue pairs (small feature dims keep this quick).
        let cfg = CorpusConfig {
            scene_dim: 8,
            dialogue_dim: 12,
            description_dim: 12,
            ..CorpusConfig::default()
        };
        let mut eps = generate_corpus(7, 2009, 8, 1, &cfg).unwrap();
        let spare_qa = eps[0].qa_items[0].clone();
        let last = eps.last_mut().unwrap();
        last.pairs.truncate(2); // 2008 * 8 + 2 = 16,066
        last.qa_items.retain(|q| q.relevant_pair_index < 2);
        if last.qa_items.is_empty() {
            last.qa_items.push(spare_qa);
            last.qa_items[0].relevant_pair_index = 0;
        }
        let total: usize = eps.iter().map(|e| e.pairs.len()).sum();
        assert_eq!(total, 16_066);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("big.tsv");
        write_corpus(&path, &eps, &[]).unwrap();
        let loaded = load_corpus(&path).unwrap();
        assert_eq!(loaded.iter().map(|e| e.pairs.len()).sum::<usize>(), 16_066);
    }
}
