//! Jordan-style sequential network: plan units plus decaying state units in,
//! note expectations out.

mod checkpoint;
mod encoding;
mod net;

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};
pub use encoding::{
    decode, encode_feedback, encode_note, map_to_gamut, pitch_unit, NoteCode19, CODE_SIZE, INTERVAL_UNITS,
    MAX_ENCODED_STEP, PITCH_UNITS,
};
pub use net::{
    melody_codes, step_state, NetShape, NetState, Pattern, SequentialNet, TrainConfig, TrainReport, TrainingExample,
    DEFAULT_DECAY, DEFAULT_LEARNING_RATE, DEFAULT_PLAN_SIZE,
};

use crate::error::{Error, Result};
use crate::gamut::Pitch;

/// Everything a generation run produced, step by step.
#[derive(Debug, Clone, PartialEq)]
pub struct Generation {
    pub voices: Vec<Vec<Pitch>>,
    /// State units seen by the net at each step; `states[0]` is all zero.
    pub states: Vec<Vec<f64>>,
    /// Code added into the state after each step.
    pub feedback: Vec<Vec<f64>>,
}

/// Runs the net free for `length` steps: forward, project each voice onto
/// the gamut, pick the most expected note, feed its code back.
///
/// `start` optionally fixes the first note of each voice.
pub fn generate(net: &SequentialNet, plan: &[f64], length: usize, start: &[Option<Pitch>]) -> Result<Generation> {
    let voices = net
        .voices()
        .ok_or_else(|| Error::Contract("net output is not a whole number of note codes".into()))?;
    if !start.is_empty() && start.len() != voices {
        return Err(Error::Contract(format!(
            "{} start notes for a {voices}-voice net",
            start.len()
        )));
    }
    let mut state = net.initial_state();
    let mut gen = Generation {
        voices: vec![Vec::with_capacity(length); voices],
        states: Vec::with_capacity(length),
        feedback: Vec::with_capacity(length),
    };
    for t in 0..length {
        let out = net.forward(plan, &state)?;
        let mut feedback = Vec::with_capacity(out.len());
        for (v, chunk) in out.chunks(CODE_SIZE).enumerate() {
            let prev = gen.voices[v].last().copied();
            let note = match start.get(v).copied().flatten() {
                Some(p) if t == 0 => p,
                _ => decode(&map_to_gamut(chunk, prev)?, prev),
            };
            feedback.extend_from_slice(encode_note(note, prev)?.units());
            gen.voices[v].push(note);
        }
        let next = state.step(&feedback)?;
        gen.states.push(std::mem::replace(&mut state, next).units);
        gen.feedback.push(feedback);
    }
    Ok(gen)
}
