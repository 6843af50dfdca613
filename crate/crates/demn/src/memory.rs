//! Long-term story memory: a per-episode ordered table of reconstructed
//! stories, readable by the QA modules and persistable to disk.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// One reconstructed story: a description concatenated with a dialogue, plus
/// the index of the scene-dialogue pair it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Story {
    pub description: Vec<String>,
    pub dialogue: Vec<String>,
    pub source_pair_index: usize,
}

impl Story {
    pub fn new(description: Vec<String>, dialogue: Vec<String>, source_pair_index: usize) -> Result<Self> {
        if description.is_empty() || dialogue.is_empty() {
            return Err(Error::Contract(
                "story needs nonempty description and dialogue".into(),
            ));
        }
        Ok(Story {
            description,
            dialogue,
            source_pair_index,
        })
    }

    /// Concatenated story text: description then dialogue.
    pub fn tokens(&self) -> Vec<String> {
        self.description
            .iter()
            .chain(self.dialogue.iter())
            .cloned()
            .collect()
    }
}

/// The memory table. Stories append at the tail of their episode's list, so
/// story order always mirrors pair order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StoryMemory {
    entries: BTreeMap<String, Vec<Story>>,
}

impl StoryMemory {
    pub fn new() -> Self {
        StoryMemory::default()
    }

    pub fn write_story(&mut self, episode_id: &str, story: Story) {
        self.entries.entry(episode_id.to_string()).or_default().push(story);
    }

    /// Ordered stories for an episode. Reading never mutates.
    pub fn read_stories(&self, episode_id: &str) -> Result<&[Story]> {
        self.entries
            .get(episode_id)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::MissingEpisode(episode_id.to_string()))
    }

    pub fn episode_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn episode_count(&self) -> usize {
        self.entries.len()
    }

    pub fn story_count(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

const FORMAT_TAG: &str = "DEMN-MEMORY";
const FORMAT_VERSION: &str = "v1";

/// Writes the memory in the corpus line-record format with `STORY` records.
pub fn persist_memory(mem: &StoryMemory, path: &Path) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "{FORMAT_TAG}\t{FORMAT_VERSION}").unwrap();
    for (ep, stories) in &mem.entries {
        for (i, s) in stories.iter().enumerate() {
            writeln!(
                out,
                "STORY\t{ep}\t{i}\t{}\t{}\t{}",
                s.source_pair_index,
                s.description.join(" "),
                s.dialogue.join(" "),
            )
            .unwrap();
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn load_memory(path: &Path) -> Result<StoryMemory> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header".into(),
    })?;
    if header != format!("{FORMAT_TAG}\t{FORMAT_VERSION}") {
        return Err(Error::Parse {
            line: 1,
            message: format!("bad header `{header}`"),
        });
    }
    let mut mem = StoryMemory::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 6 || fields[0] != "STORY" {
            return Err(Error::Parse {
                line,
                message: format!("bad STORY record with {} fields", fields.len()),
            });
        }
        let index: usize = fields[2].parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad story index `{}`", fields[2]),
        })?;
        let existing = mem.entries.get(fields[1]).map(Vec::len).unwrap_or(0);
        if index != existing {
            return Err(Error::Parse {
                line,
                message: format!("story index {index} out of order"),
            });
        }
        let source_pair_index: usize = fields[3].parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad pair index `{}`", fields[3]),
        })?;
        let description: Vec<String> = fields[4].split(' ').map(|s| s.to_string()).collect();
        let dialogue: Vec<String> = fields[5].split(' ').map(|s| s.to_string()).collect();
        if fields[4].is_empty() || fields[5].is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty story field".into(),
            });
        }
        mem.write_story(
            fields[1],
            Story {
                description,
                dialogue,
                source_pair_index,
            },
        );
    }
    Ok(mem)
}
