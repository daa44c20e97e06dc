//! First-species legality rules for two voices.
//!
//! Rules 1 to 10 follow the classical numbered list. Rule 11 is the
//! finalis constraint (both final tones on `re`), which can be switched off.

use std::fmt;

use crate::error::{Error, Result};
use crate::gamut::{motion, Motion, NotePair, Pitch};

pub const FINALIS_RULE: u8 = 11;

/// Longest allowed run of one imperfect interval family.
const MAX_IMPERFECT_RUN: usize = 4;
/// Perfect consonances allowed strictly inside the duet.
const MAX_INTERIOR_PERFECT: usize = 2;
const MAX_SPAN_STEPS: usize = 9;
const MAX_PARALLEL_SKIP: usize = 3;

/// Set of violated rule ids, stored as a bit mask (bit `r` for rule `r`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct RuleSet(u16);

impl RuleSet {
    pub fn insert(&mut self, rule: u8) {
        debug_assert!((1..=FINALIS_RULE).contains(&rule));
        self.0 |= 1 << rule;
    }

    pub fn contains(self, rule: u8) -> bool {
        self.0 & (1 << rule) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = u8> {
        (1..=FINALIS_RULE).filter(move |r| self.contains(*r))
    }

    pub fn bits(self) -> u16 {
        self.0
    }

    pub fn from_rules(rules: &[u8]) -> Self {
        let mut set = RuleSet::default();
        for r in rules {
            set.insert(*r);
        }
        set
    }
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.iter().map(|r| r.to_string()).collect();
        f.write_str(&ids.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleVerdict {
    pub violations: RuleSet,
}

impl RuleVerdict {
    pub fn is_legal(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for RuleVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_legal() {
            f.write_str("legal")
        } else {
            write!(f, "rules {}", self.violations)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImperfectFamily {
    /// Thirds and tenths.
    Thirds,
    Sixths,
}

impl ImperfectFamily {
    pub fn of(pair: NotePair) -> Option<Self> {
        match pair.steps() {
            2 | 9 => Some(ImperfectFamily::Thirds),
            5 | 12 => Some(ImperfectFamily::Sixths),
            _ => None,
        }
    }
}

/// The duet composed so far, with the running counters rules 7 and 10 need.
#[derive(Debug, Clone, PartialEq)]
pub struct DuetState {
    history: Vec<NotePair>,
    length: usize,
    finalis: bool,
    imperfect_run: Option<(ImperfectFamily, usize)>,
    interior_perfect_count: usize,
}

impl DuetState {
    pub fn new(length: usize, finalis: bool) -> Self {
        DuetState {
            history: Vec::with_capacity(length),
            length,
            finalis,
            imperfect_run: None,
            interior_perfect_count: 0,
        }
    }

    /// Builds a state from a history, recounting the rule 7 and 10 tallies by a
    /// direct scan rather than incrementally.
    pub fn from_history(history: Vec<NotePair>, length: usize, finalis: bool) -> Result<Self> {
        if history.len() > length {
            return Err(Error::Contract(format!(
                "history of {} pairs exceeds length {length}",
                history.len()
            )));
        }
        let interior_perfect_count = history
            .iter()
            .enumerate()
            .filter(|(i, pair)| *i > 0 && *i + 1 < length && pair.quality().is_perfect())
            .count();
        let imperfect_run = history.last().and_then(|last| {
            let family = ImperfectFamily::of(*last)?;
            let run = history
                .iter()
                .rev()
                .take_while(|p| ImperfectFamily::of(**p) == Some(family))
                .count();
            Some((family, run))
        });
        Ok(DuetState {
            history,
            length,
            finalis,
            imperfect_run,
            interior_perfect_count,
        })
    }

    pub fn history(&self) -> &[NotePair] {
        &self.history
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn finalis(&self) -> bool {
        self.finalis
    }

    /// Index of the next pair to place.
    pub fn position(&self) -> usize {
        self.history.len()
    }

    pub fn is_complete(&self) -> bool {
        self.history.len() == self.length
    }

    pub fn last(&self) -> Option<NotePair> {
        self.history.last().copied()
    }

    pub fn imperfect_run(&self) -> Option<(ImperfectFamily, usize)> {
        self.imperfect_run
    }

    pub fn interior_perfect_count(&self) -> usize {
        self.interior_perfect_count
    }

    fn is_interior(&self, t: usize) -> bool {
        t > 0 && t + 1 < self.length
    }

    /// Appends a pair without checking it.
    pub fn push(&mut self, pair: NotePair) -> Result<()> {
        let t = self.position();
        if t >= self.length {
            return Err(Error::Contract(format!("duet of length {} is full", self.length)));
        }
        if self.is_interior(t) && pair.quality().is_perfect() {
            self.interior_perfect_count += 1;
        }
        self.imperfect_run = match (ImperfectFamily::of(pair), self.imperfect_run) {
            (Some(f), Some((g, n))) if f == g => Some((f, n + 1)),
            (Some(f), _) => Some((f, 1)),
            (None, _) => None,
        };
        self.history.push(pair);
        Ok(())
    }

    /// Evaluates every rule for `pair` placed at the next position.
    pub fn check_pair(&self, pair: NotePair) -> Result<RuleVerdict> {
        let t = self.position();
        if t >= self.length {
            return Err(Error::Contract(format!(
                "position {t} is outside a duet of length {}",
                self.length
            )));
        }
        let mut v = RuleSet::default();
        let quality = pair.quality();
        let steps = pair.steps();
        let boundary = t == 0 || t + 1 == self.length;

        if quality == crate::gamut::IntervalQuality::Dissonant {
            v.insert(1);
        }
        if boundary && !quality.is_perfect() {
            v.insert(2);
        }
        if steps == 0 && !boundary {
            v.insert(3);
        }
        if let Some(prev) = self.last() {
            let mv = motion(prev, pair);
            if quality.is_perfect() && mv == Motion::Similar {
                v.insert(4);
            }
            if quality.is_perfect() && matches!(steps, 4 | 7 | 11) && prev.steps().abs_diff(steps) != 2 {
                v.insert(5);
            }
            let d1 = pair.voice1.index() as i32 - prev.voice1.index() as i32;
            let d2 = pair.voice2.index() as i32 - prev.voice2.index() as i32;
            let skip = |d: i32| d.unsigned_abs() as usize >= 2;
            if mv == Motion::Similar
                && skip(d1)
                && skip(d2)
                && (d1.unsigned_abs() as usize > MAX_PARALLEL_SKIP || d2.unsigned_abs() as usize > MAX_PARALLEL_SKIP)
            {
                v.insert(8);
            }
            if d1 == 0 || d2 == 0 {
                v.insert(9);
            }
        }
        if steps > MAX_SPAN_STEPS {
            v.insert(6);
        }
        if let (Some(family), Some((run_family, run))) = (ImperfectFamily::of(pair), self.imperfect_run) {
            if family == run_family && run >= MAX_IMPERFECT_RUN {
                v.insert(7);
            }
        }
        if self.is_interior(t) && quality.is_perfect() && self.interior_perfect_count >= MAX_INTERIOR_PERFECT {
            v.insert(10);
        }
        if self.finalis && t + 1 == self.length && !(pair.voice1.is_finalis() && pair.voice2.is_finalis()) {
            v.insert(FINALIS_RULE);
        }
        Ok(RuleVerdict { violations: v })
    }

    /// All pairs that would be legal next, in canonical order.
    pub fn legal_pairs(&self) -> Result<Vec<NotePair>> {
        let mut legal = Vec::new();
        for pair in NotePair::all() {
            if self.check_pair(pair)?.is_legal() {
                legal.push(pair);
            }
        }
        Ok(legal)
    }
}

/// One line of a validation report.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionReport {
    pub position: usize,
    pub pair: NotePair,
    pub verdict: RuleVerdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DuetReport {
    pub positions: Vec<PositionReport>,
}

impl DuetReport {
    pub fn is_legal(&self) -> bool {
        self.positions.iter().all(|p| p.verdict.is_legal())
    }

    pub fn violations(&self) -> impl Iterator<Item = &PositionReport> {
        self.positions.iter().filter(|p| !p.verdict.is_legal())
    }
}

impl fmt::Display for DuetReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.positions {
            writeln!(f, "pos={} pair={} verdict={}", p.position, p.pair, p.verdict)?;
        }
        Ok(())
    }
}

/// Replays a duet pair by pair, checking each against the prefix before it.
pub fn validate_duet(voice1: &[Pitch], voice2: &[Pitch], finalis: bool) -> Result<DuetReport> {
    if voice1.len() != voice2.len() {
        return Err(Error::Input(format!(
            "voices differ in length ({} vs {})",
            voice1.len(),
            voice2.len()
        )));
    }
    if voice1.len() < 2 {
        return Err(Error::Input("a duet needs at least two pairs".into()));
    }
    let mut state = DuetState::new(voice1.len(), finalis);
    let mut positions = Vec::with_capacity(voice1.len());
    for (t, (a, b)) in voice1.iter().zip(voice2).enumerate() {
        let pair = NotePair::new(*a, *b);
        let verdict = state.check_pair(pair)?;
        positions.push(PositionReport {
            position: t,
            pair,
            verdict,
        });
        state.push(pair)?;
    }
    Ok(DuetReport { positions })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn voice(s: &str) -> Vec<Pitch> {
        s.split_whitespace().map(|t| t.parse().unwrap()).collect()
    }

    fn pair(a: &str, b: &str) -> NotePair {
        NotePair::new(a.parse().unwrap(), b.parse().unwrap())
    }

    fn state_with(history: &[(&str, &str)], length: usize) -> DuetState {
        let mut s = DuetState::new(length, true);
        for (a, b) in history {
            s.push(pair(a, b)).unwrap();
        }
        s
    }

    fn violations(state: &DuetState, p: NotePair) -> Vec<u8> {
        state.check_pair(p).unwrap().violations.iter().collect()
    }

    #[test]
    fn opening_unison_is_legal() {
        let s = DuetState::new(8, true);
        assert!(s.check_pair(pair("re8", "re8")).unwrap().is_legal());
    }

    #[test]
    fn opening_third_breaks_rule_2() {
        let s = DuetState::new(8, true);
        assert_eq!(violations(&s, pair("re8", "fa8")), vec![2]);
    }

    #[test]
    fn parallel_octaves_break_rule_4() {
        let s = state_with(&[("sol", "sol8"), ("re", "re8")], 8);
        // Octave to octave also leaves the interval unchanged, which rule 5 rejects.
        assert_eq!(violations(&s, pair("mi", "mi8")), vec![4, 5]);
    }

    #[test]
    fn parallel_skips_break_rule_8() {
        let s = state_with(
            &[
                ("re8", "re8"),
                ("do8", "mi8"),
                ("la", "fa8"),
                ("sol", "sol8"),
                ("mi", "sol8"),
                ("la", "fa8"),
            ],
            8,
        );
        assert_eq!(s.position(), 6);
        // la->re is 4 steps down, fa8->fa is 7 steps down; the third itself is fine.
        assert_eq!(violations(&s, pair("re", "fa")), vec![8]);
        // The unison (re, re) additionally lands on an interior unison by similar motion.
        assert_eq!(violations(&s, pair("re", "re")), vec![3, 4, 8]);
    }

    #[test]
    fn repeated_tone_breaks_rule_9() {
        let report = validate_duet(&voice("re8 re8"), &voice("re8 re8"), true).unwrap();
        assert!(report.positions[0].verdict.is_legal());
        let v: Vec<u8> = report.positions[1].verdict.violations.iter().collect();
        assert!(v.contains(&9));
        assert_eq!(report.violations().count(), 1);
    }

    #[test]
    fn span_beyond_tenth_breaks_rule_6() {
        let s = state_with(&[("re8", "re8")], 8);
        // re to si8 is 12 steps (a thirteenth), imperfect sixth family.
        let v = violations(&s, pair("re", "si8"));
        assert!(v.contains(&6), "{v:?}");
    }

    #[test]
    fn fifth_needs_interval_change_of_two() {
        // prev interval 2 (third) -> fifth (4): |2-4| = 2 allowed.
        let s = state_with(&[("re8", "re8"), ("do8", "mi8")], 8);
        assert!(!violations(&s, pair("re8", "sol")).contains(&5));
        // prev interval 5 (sixth) -> crossing fifth si/mi: |5-4| = 1.
        let s = state_with(&[("re8", "re8"), ("do8", "mi8"), ("la", "fa8")], 8);
        assert_eq!(violations(&s, pair("si", "mi")), vec![5]);
    }

    #[test]
    fn rule_5_exempts_unison() {
        // Final unison reached from a sixth: |5 - 0| = 5 would fail otherwise.
        let s = state_with(
            &[
                ("re8", "re8"),
                ("do8", "mi8"),
                ("la", "fa8"),
                ("sol", "sol8"),
                ("la", "fa8"),
                ("mi", "sol8"),
                ("la", "fa8"),
            ],
            8,
        );
        assert!(s.check_pair(pair("re8", "re8")).unwrap().is_legal());
    }

    #[test]
    fn fifth_consecutive_third_breaks_rule_7() {
        // Parallel thirds are fine under rule 4, which only covers perfects.
        let s = state_with(
            &[
                ("re8", "re8"),
                ("mi", "sol"),
                ("fa", "la"),
                ("sol", "si"),
                ("la", "do8"),
            ],
            10,
        );
        assert_eq!(s.imperfect_run(), Some((ImperfectFamily::Thirds, 4)));
        assert_eq!(violations(&s, pair("si", "re8")), vec![7]);
        // A sixth breaks the run instead.
        assert!(!violations(&s, pair("sol", "mi8")).contains(&7));
    }

    #[test]
    fn third_interior_perfect_breaks_rule_10() {
        let s = state_with(
            &[
                ("re8", "re8"),
                ("do8", "mi8"),
                ("la", "fa8"),
                ("sol", "sol8"),
                ("fa", "la8"),
                ("sol", "sol8"),
                ("fa", "la8"),
            ],
            10,
        );
        assert_eq!(s.interior_perfect_count(), 2);
        assert_eq!(violations(&s, pair("sol", "sol8")), vec![10]);
    }

    #[test]
    fn finalis_rule_is_configurable() {
        let history = [("re8", "re8"), ("do8", "mi8"), ("la", "fa8")];
        let on = state_with(&history, 4);
        let off = DuetState::from_history(on.history().to_vec(), 4, false).unwrap();
        let p = pair("sol", "sol8");
        assert_eq!(violations(&on, p), vec![FINALIS_RULE]);
        assert!(off.check_pair(p).unwrap().is_legal());
    }

    #[test]
    fn position_past_length_is_a_contract_error() {
        let s = state_with(&[("re8", "re8"), ("do8", "mi8")], 2);
        assert!(matches!(s.check_pair(pair("re8", "re8")), Err(Error::Contract(_))));
        let mut s = s;
        assert!(s.push(pair("re8", "re8")).is_err());
    }

    #[test]
    fn legal_pairs_at_start() {
        let s = DuetState::new(8, false);
        let legal = s.legal_pairs().unwrap();
        for p in [
            pair("re", "re"),
            pair("re", "la"),
            pair("re", "re8"),
            pair("re8", "re8"),
        ] {
            assert!(legal.contains(&p), "{p}");
        }
        assert!(legal.iter().all(|p| p.steps() % 7 != 2));
        let brute: Vec<NotePair> = NotePair::all()
            .filter(|p| s.check_pair(*p).unwrap().is_legal())
            .collect();
        assert_eq!(legal, brute);
    }

    #[test]
    fn published_duets_are_legal() {
        let duets = [
            ("re8 do8 la sol la mi la re8", "re8 mi8 fa8 sol8 fa8 sol8 fa8 re8"),
            ("re8 mi8 sol8 la8 sol8 mi8 fa8 re8", "re8 do8 si la si do8 la re8"),
            ("re8 do8 la sol la do8 si re8", "re8 mi8 fa8 sol8 fa8 mi8 sol8 re8"),
            ("re8 mi8 sol8 la8 sol8 fa8 sol8 re8", "re8 do8 si la si re8 si re8"),
        ];
        for (v1, v2) in duets {
            let report = validate_duet(&voice(v1), &voice(v2), true).unwrap();
            assert!(report.is_legal(), "{report}");
        }
    }

    #[test]
    fn unequal_voices_rejected() {
        assert!(matches!(
            validate_duet(&voice("re8 do8"), &voice("re8"), true),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn report_format() {
        let report = validate_duet(&voice("re8 re8"), &voice("re8 re8"), true).unwrap();
        let text = report.to_string();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "pos=0 pair=re8:re8 verdict=legal");
        assert!(lines[1].starts_with("pos=1 pair=re8:re8 verdict=rules "));
        assert!(lines[1].contains('9'));
    }
}
