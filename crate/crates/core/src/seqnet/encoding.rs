//! The 19-unit note code and its projection onto the 13-pitch gamut.
//!
//! Layout: units 0..8 pitch on an eight-degree wheel (re mi fa sol la si do
//! re'), units 8..17 step distance 0..8 from the previous note, unit 17
//! ascending, unit 18 descending.

use crate::error::{Error, Result};
use crate::gamut::{Pitch, GAMUT_SIZE};
use crate::negotiation::ActivationVector;

pub const CODE_SIZE: usize = 19;
pub const PITCH_UNITS: usize = 8;
pub const INTERVAL_UNITS: usize = 9;
pub const MAX_ENCODED_STEP: usize = INTERVAL_UNITS - 1;

const INTERVAL_BASE: usize = PITCH_UNITS;
const ASCEND: usize = PITCH_UNITS + INTERVAL_UNITS;
const DESCEND: usize = ASCEND + 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoteCode19(pub [f64; CODE_SIZE]);

impl NoteCode19 {
    pub fn units(&self) -> &[f64; CODE_SIZE] {
        &self.0
    }

    pub fn pitch_unit(&self) -> Option<usize> {
        self.0[..PITCH_UNITS].iter().position(|u| *u == 1.0)
    }

    pub fn interval_unit(&self) -> Option<usize> {
        self.0[INTERVAL_BASE..ASCEND].iter().position(|u| *u == 1.0)
    }

    pub fn ascending(&self) -> bool {
        self.0[ASCEND] == 1.0
    }

    pub fn descending(&self) -> bool {
        self.0[DESCEND] == 1.0
    }
}

/// The pitch-wheel unit a gamut pitch lights: its degree, except that the
/// upper `re` has its own unit 7.
pub fn pitch_unit(p: Pitch) -> usize {
    if p == Pitch::RE8 {
        PITCH_UNITS - 1
    } else {
        p.degree()
    }
}

pub fn encode_note(cur: Pitch, prev: Option<Pitch>) -> Result<NoteCode19> {
    let mut units = [0.0; CODE_SIZE];
    units[pitch_unit(cur)] = 1.0;
    if let Some(prev) = prev {
        let steps = cur.index().abs_diff(prev.index());
        if steps > MAX_ENCODED_STEP {
            return Err(Error::EncodingRange { steps });
        }
        units[INTERVAL_BASE + steps] = 1.0;
        if cur > prev {
            units[ASCEND] = 1.0;
        } else if cur < prev {
            units[DESCEND] = 1.0;
        }
    }
    Ok(NoteCode19(units))
}

/// Like [`encode_note`], but a move wider than the interval units leaves them
/// all off instead of failing. Used for feedback of agreed notes.
pub fn encode_feedback(cur: Pitch, prev: Option<Pitch>) -> NoteCode19 {
    match encode_note(cur, prev) {
        Ok(code) => code,
        Err(_) => {
            let mut units = encode_note(cur, None).expect("no interval to encode").0;
            let prev = prev.expect("only moves can be out of range");
            units[if cur > prev { ASCEND } else { DESCEND }] = 1.0;
            NoteCode19(units)
        }
    }
}

/// Combines pitch, interval and movement activations multiplicatively into
/// one value per gamut pitch, then scales so the largest value is 1.
pub fn map_to_gamut(out: &[f64], prev: Option<Pitch>) -> Result<ActivationVector> {
    if out.len() != CODE_SIZE {
        return Err(Error::Contract(format!(
            "expected {CODE_SIZE} output units, got {}",
            out.len()
        )));
    }
    let unit = |i: usize| out[i].max(0.0);
    let mut acts = [0.0; GAMUT_SIZE];
    for p in Pitch::all() {
        let pitch_act = unit(pitch_unit(p));
        acts[p.index()] = match prev {
            None => pitch_act,
            Some(prev) => {
                let steps = p.index().abs_diff(prev.index());
                if steps > MAX_ENCODED_STEP {
                    0.0
                } else {
                    let movement = match p.cmp(&prev) {
                        std::cmp::Ordering::Greater => unit(ASCEND),
                        std::cmp::Ordering::Less => unit(DESCEND),
                        std::cmp::Ordering::Equal => 1.0 - unit(ASCEND).max(unit(DESCEND)).min(1.0),
                    };
                    pitch_act * unit(INTERVAL_BASE + steps) * movement
                }
            }
        };
    }
    let max = acts.iter().cloned().fold(0.0, f64::max);
    if max > 0.0 {
        for a in &mut acts {
            *a /= max;
        }
    }
    ActivationVector::new(acts)
}

/// The most activated pitch reachable from `prev` by an encodable step.
/// Ties go to the lower pitch.
pub fn decode(acts: &ActivationVector, prev: Option<Pitch>) -> Pitch {
    let reachable = |p: &Pitch| prev.is_none_or(|q| p.index().abs_diff(q.index()) <= MAX_ENCODED_STEP);
    let mut best: Option<Pitch> = None;
    for p in Pitch::all().filter(reachable) {
        if best.is_none_or(|b| acts.get(p) > acts.get(b)) {
            best = Some(p);
        }
    }
    best.expect("at least the previous pitch is reachable")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(code: &NoteCode19) -> String {
        let s: String = code.0.iter().map(|u| if *u == 1.0 { '1' } else { '0' }).collect();
        format!("{}|{}|{}", &s[..8], &s[8..17], &s[17..])
    }

    #[test]
    fn first_re_is_unit_zero() {
        let code = encode_note(Pitch::RE, None).unwrap();
        assert_eq!(bits(&code), "10000000|000000000|00");
    }

    #[test]
    fn step_up_and_down() {
        let code = encode_note(Pitch::MI, Some(Pitch::RE)).unwrap();
        assert_eq!(code.pitch_unit(), Some(1));
        assert_eq!(code.interval_unit(), Some(1));
        assert!(code.ascending() && !code.descending());

        let code = encode_note(Pitch::DO8, Some(Pitch::RE8)).unwrap();
        assert_eq!(code.pitch_unit(), Some(6));
        assert_eq!(code.interval_unit(), Some(1));
        assert!(code.descending() && !code.ascending());
    }

    #[test]
    fn wheel_units() {
        let units: Vec<usize> = Pitch::all().map(pitch_unit).collect();
        assert_eq!(units, vec![0, 1, 2, 3, 4, 5, 6, 7, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn large_leaps_are_unencodable() {
        assert!(matches!(
            encode_note(Pitch::SI8, Some(Pitch::MI)),
            Err(Error::EncodingRange { steps: 11 })
        ));
        assert!(encode_note(Pitch::LA8, Some(Pitch::SOL)).is_ok());
    }

    #[test]
    fn feedback_saturates_wide_moves() {
        let code = encode_feedback(Pitch::SI8, Some(Pitch::MI));
        assert_eq!(code.pitch_unit(), Some(5));
        assert_eq!(code.interval_unit(), None);
        assert!(code.ascending());
        assert_eq!(
            encode_feedback(Pitch::MI, Some(Pitch::RE)),
            encode_note(Pitch::MI, Some(Pitch::RE)).unwrap()
        );
    }

    #[test]
    fn ascending_step_from_sol_selects_la() {
        let mut out = [0.0; CODE_SIZE];
        out[..PITCH_UNITS].fill(1.0);
        out[INTERVAL_BASE + 1] = 1.0;
        out[ASCEND] = 1.0;
        let acts = map_to_gamut(&out, Some(Pitch::SOL)).unwrap();
        assert_eq!(decode(&acts, Some(Pitch::SOL)), Pitch::LA);
        assert_eq!(acts.get(Pitch::LA), 1.0);
        assert_eq!(acts.get(Pitch::FA), 0.0);
    }

    #[test]
    fn first_note_uses_pitch_units_only() {
        let mut out = [0.0; CODE_SIZE];
        out[0] = 1.0;
        let acts = map_to_gamut(&out, None).unwrap();
        assert!([Pitch::RE, Pitch::RE8].contains(&acts.argmax()));
    }

    #[test]
    fn zero_output_maps_to_zero() {
        let acts = map_to_gamut(&[0.0; CODE_SIZE], Some(Pitch::LA)).unwrap();
        assert_eq!(acts, ActivationVector::zeros());
        let acts = map_to_gamut(&[0.0; CODE_SIZE], None).unwrap();
        assert_eq!(acts, ActivationVector::zeros());
    }

    #[test]
    fn wrong_length_is_rejected() {
        assert!(map_to_gamut(&[0.5; 13], None).is_err());
    }

    #[test]
    fn decode_stays_within_reach() {
        // All-zero activations from si8: re..sol are out of reach.
        let d = decode(&ActivationVector::zeros(), Some(Pitch::SI8));
        assert_eq!(d, Pitch::LA);
    }
}
