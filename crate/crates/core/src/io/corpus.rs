//! Training corpus text format.
//!
//! Melodies are blank-line separated blocks. A block holds an optional
//! `label: 1 0 0 0` line, then either one bare line of tokens (one voice) or
//! a `V1:` line followed by a `V2:` line. Lines starting with `#` are
//! ignored. Unlabelled melodies get the one-hot label of their position in
//! the file.

use std::path::Path;

use crate::error::{Error, Result};
use crate::gamut::Pitch;
use crate::seqnet::{melody_codes, TrainingExample};

use super::score::parse_voice;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusMode {
    OneVoice,
    TwoVoice,
}

impl CorpusMode {
    pub fn voices(self) -> usize {
        match self {
            CorpusMode::OneVoice => 1,
            CorpusMode::TwoVoice => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusMelody {
    pub label: Vec<f64>,
    pub voices: Vec<Vec<Pitch>>,
    /// First line of the block in the source text.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub mode: CorpusMode,
    pub melodies: Vec<CorpusMelody>,
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.melodies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.melodies.is_empty()
    }

    pub fn training_examples(&self) -> Vec<TrainingExample> {
        self.melodies
            .iter()
            .map(|m| TrainingExample {
                plan: m.label.clone(),
                voices: m.voices.clone(),
            })
            .collect()
    }
}

type FinishedBlock = (CorpusMode, Option<Vec<f64>>, Vec<Vec<Pitch>>);

#[derive(Default)]
struct Block {
    start: usize,
    label: Option<Vec<f64>>,
    bare: Option<Vec<Pitch>>,
    v1: Option<Vec<Pitch>>,
    v2: Option<Vec<Pitch>>,
}

impl Block {
    fn is_empty(&self) -> bool {
        self.label.is_none() && self.bare.is_none() && self.v1.is_none() && self.v2.is_none()
    }

    fn finish(self) -> Result<FinishedBlock> {
        let line = self.start;
        match (self.bare, self.v1, self.v2) {
            (Some(v), None, None) => Ok((CorpusMode::OneVoice, self.label, vec![v])),
            (None, Some(v1), Some(v2)) => {
                if v1.len() != v2.len() {
                    return Err(Error::Input(format!(
                        "melody at line {line}: V1 has {} notes, V2 has {}",
                        v1.len(),
                        v2.len()
                    )));
                }
                Ok((CorpusMode::TwoVoice, self.label, vec![v1, v2]))
            }
            (None, None, None) => Err(Error::parse(line, "label without a melody")),
            (None, Some(_), None) => Err(Error::parse(line, "V1 without V2")),
            (None, None, Some(_)) => Err(Error::parse(line, "V2 without V1")),
            _ => Err(Error::parse(line, "block mixes a bare melody with V1/V2 lines")),
        }
    }
}

pub fn parse_corpus(text: &str, plan_size: usize) -> Result<Corpus> {
    let mut blocks = Vec::new();
    let mut block = Block::default();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            if !block.is_empty() {
                blocks.push(std::mem::take(&mut block));
            }
            continue;
        }
        if block.is_empty() {
            block.start = line_no;
        }
        let set = |slot: &mut Option<Vec<Pitch>>, what: &str, rest: &str| -> Result<()> {
            if slot.is_some() {
                return Err(Error::parse(line_no, format!("second {what} line in one melody")));
            }
            let voice = parse_voice(rest, line_no)?;
            if voice.is_empty() {
                return Err(Error::parse(line_no, "melody line has no notes"));
            }
            *slot = Some(voice);
            Ok(())
        };
        if let Some(rest) = line.strip_prefix("label:") {
            if block.label.is_some() || block.bare.is_some() || block.v1.is_some() {
                return Err(Error::parse(line_no, "label must open its melody block"));
            }
            let label = rest
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::parse(line_no, format!("bad label value `{t}`")))
                })
                .collect::<Result<Vec<_>>>()?;
            if label.len() != plan_size {
                return Err(Error::parse(
                    line_no,
                    format!("label has {} values, plan size is {plan_size}", label.len()),
                ));
            }
            block.label = Some(label);
        } else if let Some(rest) = line.strip_prefix("V1:") {
            set(&mut block.v1, "V1", rest)?;
        } else if let Some(rest) = line.strip_prefix("V2:") {
            if block.v1.is_none() {
                return Err(Error::parse(line_no, "V2 before V1"));
            }
            set(&mut block.v2, "V2", rest)?;
        } else {
            set(&mut block.bare, "melody", line)?;
        }
    }
    if !block.is_empty() {
        blocks.push(block);
    }
    if blocks.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let count = blocks.len();
    let mut mode = None;
    let mut melodies = Vec::with_capacity(count);
    for (idx, block) in blocks.into_iter().enumerate() {
        let line = block.start;
        let (m, label, voices) = block.finish()?;
        if *mode.get_or_insert(m) != m {
            return Err(Error::parse(line, "corpus mixes one-voice and two-voice melodies"));
        }
        let label = match label {
            Some(l) => l,
            None => {
                if count > plan_size {
                    return Err(Error::Input(format!(
                        "{count} melodies cannot share {plan_size} one-hot labels; add `label:` lines"
                    )));
                }
                let mut l = vec![0.0; plan_size];
                l[idx] = 1.0;
                l
            }
        };
        melody_codes(&voices).map_err(|e| Error::parse(line, e.to_string()))?;
        melodies.push(CorpusMelody { label, voices, line });
    }
    for (i, a) in melodies.iter().enumerate() {
        if let Some(b) = melodies[..i].iter().find(|b| b.label == a.label) {
            return Err(Error::parse(
                a.line,
                format!("label {:?} already used by the melody at line {}", a.label, b.line),
            ));
        }
    }
    Ok(Corpus {
        mode: mode.expect("at least one block"),
        melodies,
    })
}

pub fn load_corpus(path: &Path, plan_size: usize) -> Result<Corpus> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text, plan_size)
}
