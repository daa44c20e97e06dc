//! Two-part first-species counterpoint by a hybrid of sequential neural
//! nets and negotiating agents.
//!
//! Each voice has an agent. At every time step each agent's net predicts a
//! vector of expectations over the 13-note gamut, the agents exchange all
//! candidate pairs and agree on the legal pair of highest utility, and the
//! agreed notes are fed back into the nets as context. There is no
//! backtracking: a step with no legal pair ends the composition.
//!
//! Module map:
//! - [`gamut`]: pitches, intervals, motion.
//! - [`rules`]: the legality rulebook and duet validator.
//! - [`negotiation`]: utility and the pair exchange.
//! - [`seqnet`]: the sequential net, its training and note coding.
//! - [`composer`]: the composition loop.
//! - [`io`] and [`cli`]: files, MIDI, the command line.

pub mod cli;
pub mod composer;
pub mod error;
pub mod gamut;
pub mod io;
pub mod negotiation;
pub mod rules;
pub mod seqnet;

pub use composer::{compose, draw_step_weight, CompositionConfig, CompositionResult, StepRecord, WeightStream};
pub use error::{Error, Result};
pub use gamut::{interval_quality, interval_steps, motion, IntervalQuality, Motion, NotePair, Pitch, GAMUT_SIZE};
pub use negotiation::{
    contrary_motion_bonus, negotiate, system_utility, ActivationVector, Agreement, Negotiation, UtilityWeights,
    WeightMode, COIN_WEIGHTS,
};
pub use rules::{validate_duet, DuetReport, DuetState, RuleSet, RuleVerdict};
pub use seqnet::{NetShape, NetState, SequentialNet, TrainConfig, TrainReport, TrainingExample};
