//! Corpus files, score text, MIDI output.

mod corpus;
mod midi;
mod score;

pub use corpus::{load_corpus, parse_corpus, Corpus, CorpusMelody, CorpusMode};
pub use midi::{midi_bytes, write_midi, DEFAULT_TEMPO_BPM, TICKS_PER_QUARTER, WHOLE_NOTE_TICKS};
pub use score::{parse_duet, parse_voice, render_text, render_voice, Duet};

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Writes through a temporary file in the target directory, then renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
