//! The thirteen-note Dorian gamut (D4 up to B5) and interval arithmetic.
//!
//! Pitches are diatonic degrees addressed by their position in the gamut.
//! Intervals are counted in diatonic steps; semitones only matter to tell a
//! perfect fifth from the tritone.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

pub const GAMUT_SIZE: usize = 13;

const NAMES: [&str; GAMUT_SIZE] = [
    "re", "mi", "fa", "sol", "la", "si", "do8", "re8", "mi8", "fa8", "sol8", "la8", "si8",
];

const SEMITONES: [u8; GAMUT_SIZE] = [0, 2, 3, 5, 7, 9, 10, 12, 14, 15, 17, 19, 21];

/// A degree of the gamut, `re` (index 0) through `si8` (index 12).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pitch(u8);

impl Pitch {
    pub const RE: Pitch = Pitch(0);
    pub const MI: Pitch = Pitch(1);
    pub const FA: Pitch = Pitch(2);
    pub const SOL: Pitch = Pitch(3);
    pub const LA: Pitch = Pitch(4);
    pub const SI: Pitch = Pitch(5);
    pub const DO8: Pitch = Pitch(6);
    pub const RE8: Pitch = Pitch(7);
    pub const MI8: Pitch = Pitch(8);
    pub const FA8: Pitch = Pitch(9);
    pub const SOL8: Pitch = Pitch(10);
    pub const LA8: Pitch = Pitch(11);
    pub const SI8: Pitch = Pitch(12);

    pub fn from_index(index: usize) -> Option<Pitch> {
        (index < GAMUT_SIZE).then_some(Pitch(index as u8))
    }

    /// Parses a solfège token such as `re`, `sol8` (case-insensitive).
    pub fn from_name(name: &str) -> Result<Pitch, Error> {
        let lower = name.trim().to_ascii_lowercase();
        NAMES
            .iter()
            .position(|n| *n == lower)
            .map(|i| Pitch(i as u8))
            .ok_or_else(|| Error::UnknownPitch(name.to_string()))
    }

    /// All gamut pitches in ascending order.
    pub fn all() -> impl DoubleEndedIterator<Item = Pitch> + ExactSizeIterator + Clone {
        (0..GAMUT_SIZE as u8).map(Pitch)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn name(self) -> &'static str {
        NAMES[self.index()]
    }

    /// Semitones above the low `re`.
    pub fn semitone(self) -> u8 {
        SEMITONES[self.index()]
    }

    /// Degree within the mode, 0 = re .. 6 = do.
    pub fn degree(self) -> usize {
        self.index() % 7
    }

    pub fn is_finalis(self) -> bool {
        self.degree() == 0
    }

    /// MIDI key number with low `re` on D4.
    pub fn midi_key(self) -> u8 {
        62 + self.semitone()
    }
}

impl fmt::Display for Pitch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pitch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Pitch::from_name(s)
    }
}

/// The two simultaneous tones chosen at one time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NotePair {
    pub voice1: Pitch,
    pub voice2: Pitch,
}

impl NotePair {
    pub const fn new(voice1: Pitch, voice2: Pitch) -> Self {
        NotePair { voice1, voice2 }
    }

    pub fn steps(self) -> usize {
        interval_steps(self.voice1, self.voice2)
    }

    /// Voice 2 minus voice 1, in steps. Negative when the voices cross.
    pub fn signed_steps(self) -> i32 {
        self.voice2.index() as i32 - self.voice1.index() as i32
    }

    pub fn quality(self) -> IntervalQuality {
        interval_quality(self.voice1, self.voice2)
    }

    /// Every pair in canonical order: voice 1 ascending, then voice 2 ascending.
    pub fn all() -> impl Iterator<Item = NotePair> + Clone {
        Pitch::all().flat_map(|a| Pitch::all().map(move |b| NotePair::new(a, b)))
    }
}

impl fmt::Display for NotePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.voice1, self.voice2)
    }
}

/// Parses `re8:re8`.
impl FromStr for NotePair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::Input(format!("expected <voice1>:<voice2>, got `{s}`")))?;
        Ok(NotePair::new(a.parse()?, b.parse()?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntervalQuality {
    Dissonant,
    ImperfectConsonant,
    PerfectConsonant,
}

impl IntervalQuality {
    pub fn is_perfect(self) -> bool {
        self == IntervalQuality::PerfectConsonant
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Motion {
    Contrary,
    Similar,
    Oblique,
}

pub fn interval_steps(a: Pitch, b: Pitch) -> usize {
    a.index().abs_diff(b.index())
}

/// Interval class (steps mod 7): 0 unison/octave, 2 third, 4 fifth, ...
pub fn interval_class(a: Pitch, b: Pitch) -> usize {
    interval_steps(a, b) % 7
}

pub fn interval_quality(a: Pitch, b: Pitch) -> IntervalQuality {
    match interval_class(a, b) {
        0 => IntervalQuality::PerfectConsonant,
        2 | 5 => IntervalQuality::ImperfectConsonant,
        4 if a.semitone().abs_diff(b.semitone()) % 12 == 7 => IntervalQuality::PerfectConsonant,
        _ => IntervalQuality::Dissonant,
    }
}

pub fn motion(prev: NotePair, cur: NotePair) -> Motion {
    let d1 = cur.voice1.index() as i32 - prev.voice1.index() as i32;
    let d2 = cur.voice2.index() as i32 - prev.voice2.index() as i32;
    if d1 * d2 > 0 {
        Motion::Similar
    } else if (d1 == 0) != (d2 == 0) {
        Motion::Oblique
    } else {
        Motion::Contrary
    }
}
