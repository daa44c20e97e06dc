use std::fmt;

use crate::error::{Error, Result};
use crate::gamut::{NotePair, Pitch};

/// Two equal-length voices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Duet {
    pub title: Option<String>,
    pub voice1: Vec<Pitch>,
    pub voice2: Vec<Pitch>,
}

impl Duet {
    pub fn new(voice1: Vec<Pitch>, voice2: Vec<Pitch>) -> Result<Self> {
        if voice1.len() != voice2.len() {
            return Err(Error::Input(format!(
                "voices differ in length ({} vs {})",
                voice1.len(),
                voice2.len()
            )));
        }
        Ok(Duet {
            title: None,
            voice1,
            voice2,
        })
    }

    pub fn from_pairs(pairs: &[NotePair]) -> Self {
        Duet {
            title: None,
            voice1: pairs.iter().map(|p| p.voice1).collect(),
            voice2: pairs.iter().map(|p| p.voice2).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.voice1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voice1.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = NotePair> + '_ {
        self.voice1.iter().zip(&self.voice2).map(|(a, b)| NotePair::new(*a, *b))
    }
}

impl fmt::Display for Duet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_text(self))
    }
}

pub fn render_voice(voice: &[Pitch]) -> String {
    voice.iter().map(|p| p.name()).collect::<Vec<_>>().join(" ")
}

/// `V1: ...` and `V2: ...` lines, lowercase tokens.
pub fn render_text(duet: &Duet) -> String {
    format!(
        "V1: {}\nV2: {}\n",
        render_voice(&duet.voice1),
        render_voice(&duet.voice2)
    )
}

pub fn parse_voice(tokens: &str, line: usize) -> Result<Vec<Pitch>> {
    tokens
        .split_whitespace()
        .map(|t| Pitch::from_name(t).map_err(|e| Error::parse(line, e.to_string())))
        .collect()
}

/// Reads the `V1:` / `V2:` text produced by [`render_text`]. Blank lines and
/// `#` comments are skipped.
pub fn parse_duet(text: &str) -> Result<Duet> {
    let mut voices: [Option<Vec<Pitch>>; 2] = [None, None];
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (slot, rest) = if let Some(rest) = line.strip_prefix("V1:") {
            (0, rest)
        } else if let Some(rest) = line.strip_prefix("V2:") {
            (1, rest)
        } else {
            return Err(Error::parse(line_no, format!("expected `V1:` or `V2:`, got `{line}`")));
        };
        if voices[slot].is_some() {
            return Err(Error::parse(line_no, format!("duplicate V{} line", slot + 1)));
        }
        voices[slot] = Some(parse_voice(rest, line_no)?);
    }
    match voices {
        [Some(v1), Some(v2)] => Duet::new(v1, v2),
        _ => Err(Error::Input("duet needs both a V1 and a V2 line".into())),
    }
}
