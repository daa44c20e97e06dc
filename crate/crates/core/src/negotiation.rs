//! Pair utility and the bilateral exchange that picks each time step's pair.
//!
//! Utility of a candidate pair `(t1, t2)`:
//!
//! ```text
//! [act1(t1) * act2(t2) + w * cm(prev, pair)] * match(pair)
//! ```
//!
//! `match` is 1 when the rulebook accepts the pair and 0 otherwise; `cm`
//! rewards contrary (or oblique) motion, more so when the interval changes
//! by little.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::gamut::{motion, Motion, NotePair, Pitch, GAMUT_SIZE};
use crate::rules::DuetState;

pub const COIN_WEIGHTS: [f64; 2] = [0.5, 1.49];

/// Per-pitch expectations handed to one agent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivationVector([f64; GAMUT_SIZE]);

impl ActivationVector {
    pub fn new(values: [f64; GAMUT_SIZE]) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Input(format!(
                "activation {bad} is not a finite non-negative value"
            )));
        }
        Ok(ActivationVector(values))
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        let arr: [f64; GAMUT_SIZE] = values.try_into().map_err(|_| {
            Error::Input(format!(
                "activation vector needs {GAMUT_SIZE} entries, got {}",
                values.len()
            ))
        })?;
        Self::new(arr)
    }

    pub fn zeros() -> Self {
        ActivationVector([0.0; GAMUT_SIZE])
    }

    pub fn get(&self, pitch: Pitch) -> f64 {
        self.0[pitch.index()]
    }

    pub fn as_array(&self) -> &[f64; GAMUT_SIZE] {
        &self.0
    }

    /// Index of the largest entry; ties go to the lowest pitch.
    pub fn argmax(&self) -> Pitch {
        let mut best = 0;
        for (i, v) in self.0.iter().enumerate() {
            if *v > self.0[best] {
                best = i;
            }
        }
        Pitch::from_index(best).expect("gamut index")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    Deterministic,
    /// Redraw the cm weight each step from [`COIN_WEIGHTS`].
    CoinToss,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityWeights {
    pub cm_weight: f64,
    pub mode: WeightMode,
}

impl Default for UtilityWeights {
    fn default() -> Self {
        UtilityWeights {
            cm_weight: 1.0,
            mode: WeightMode::Deterministic,
        }
    }
}

impl UtilityWeights {
    pub fn coin_toss() -> Self {
        UtilityWeights {
            cm_weight: 1.0,
            mode: WeightMode::CoinToss,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Agreement {
    Pair {
        pair: NotePair,
        utility: f64,
    },
    /// No legal pair exists at `step`.
    DeadEnd {
        step: usize,
    },
}

impl Agreement {
    pub fn pair(&self) -> Option<NotePair> {
        match self {
            Agreement::Pair { pair, .. } => Some(*pair),
            Agreement::DeadEnd { .. } => None,
        }
    }

    pub fn utility(&self) -> Option<f64> {
        match self {
            Agreement::Pair { utility, .. } => Some(*utility),
            Agreement::DeadEnd { .. } => None,
        }
    }
}

/// Result of one negotiation round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Negotiation {
    pub agreement: Agreement,
    pub legal_count: usize,
}

/// The cm term. Zero for similar motion and for an unchanged interval.
///
/// Intervals are signed (voice 2 minus voice 1), so crossing the voices
/// counts as a large change of interval.
pub fn contrary_motion_bonus(prev: NotePair, cur: NotePair) -> f64 {
    if motion(prev, cur) == Motion::Similar {
        return 0.0;
    }
    let delta = prev.signed_steps().abs_diff(cur.signed_steps());
    if delta == 0 {
        0.0
    } else {
        1.0 / delta as f64
    }
}

fn utility_given_legality(
    state: &DuetState,
    pair: NotePair,
    act1: &ActivationVector,
    act2: &ActivationVector,
    weight: f64,
    legal: bool,
) -> f64 {
    if !legal {
        return 0.0;
    }
    let cm = state.last().map_or(0.0, |prev| contrary_motion_bonus(prev, pair));
    act1.get(pair.voice1) * act2.get(pair.voice2) + weight * cm
}

pub fn system_utility(
    state: &DuetState,
    pair: NotePair,
    act1: &ActivationVector,
    act2: &ActivationVector,
    weight: f64,
) -> Result<f64> {
    let legal = state.check_pair(pair)?.is_legal();
    Ok(utility_given_legality(state, pair, act1, act2, weight, legal))
}

/// Orders offers: higher utility wins, then lower voice-1 index, then lower
/// voice-2 index. This is the order a canonical ascending scan with strict
/// improvement produces.
fn better(a: (NotePair, f64), b: (NotePair, f64)) -> bool {
    match a.1.partial_cmp(&b.1) {
        Some(Ordering::Greater) => true,
        Some(Ordering::Less) => false,
        _ => (a.0.voice1.index(), a.0.voice2.index()) < (b.0.voice1.index(), b.0.voice2.index()),
    }
}

/// One agent's bookkeeping during the exchange.
struct Agent {
    best: Option<(NotePair, f64)>,
}

impl Agent {
    fn consider(&mut self, offer: (NotePair, f64)) {
        if self.best.is_none_or(|b| better(offer, b)) {
            self.best = Some(offer);
        }
    }
}

/// Runs the exchange: each agent in turn sends all of its notes, one at a
/// time; the receiver pairs the note with each of its own, and both sides
/// keep the best legal pair seen. The better of the two saved pairs wins.
pub fn negotiate(
    state: &DuetState,
    act1: &ActivationVector,
    act2: &ActivationVector,
    weight: f64,
) -> Result<Negotiation> {
    let step = state.position();
    if step >= state.length() {
        return Err(Error::Contract(format!(
            "cannot negotiate position {step} of a duet of length {}",
            state.length()
        )));
    }
    let mut legal = [[false; GAMUT_SIZE]; GAMUT_SIZE];
    let mut legal_count = 0;
    for pair in NotePair::all() {
        if state.check_pair(pair)?.is_legal() {
            legal[pair.voice1.index()][pair.voice2.index()] = true;
            legal_count += 1;
        }
    }
    let offer = |pair: NotePair| {
        let ok = legal[pair.voice1.index()][pair.voice2.index()];
        ok.then(|| (pair, utility_given_legality(state, pair, act1, act2, weight, true)))
    };

    let mut agents = [Agent { best: None }, Agent { best: None }];
    // Agent 1 sends; agent 2 answers with each of its notes.
    for sent in Pitch::all() {
        for own in Pitch::all() {
            if let Some(o) = offer(NotePair::new(sent, own)) {
                agents[1].consider(o);
            }
        }
    }
    // Agent 2 sends, from its top note down; agent 1 answers.
    for sent in Pitch::all().rev() {
        for own in Pitch::all().rev() {
            if let Some(o) = offer(NotePair::new(own, sent)) {
                agents[0].consider(o);
            }
        }
    }

    let agreement = match (agents[0].best, agents[1].best) {
        (Some(a), Some(b)) => {
            let (pair, utility) = if better(b, a) { b } else { a };
            Agreement::Pair { pair, utility }
        }
        (Some((pair, utility)), None) | (None, Some((pair, utility))) => Agreement::Pair { pair, utility },
        (None, None) => Agreement::DeadEnd { step },
    };
    Ok(Negotiation { agreement, legal_count })
}
