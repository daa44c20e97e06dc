//! The composition loop: nets advise, agents negotiate, agreements feed back.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gamut::{NotePair, Pitch};
use crate::negotiation::{
    negotiate, system_utility, ActivationVector, Agreement, UtilityWeights, WeightMode, COIN_WEIGHTS,
};
use crate::rules::DuetState;
use crate::seqnet::{encode_feedback, map_to_gamut, NetState, SequentialNet, CODE_SIZE, DEFAULT_PLAN_SIZE};

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionConfig {
    pub length: usize,
    pub plan1: Vec<f64>,
    pub plan2: Vec<f64>,
    pub weights: UtilityWeights,
    pub seed: u64,
    /// Pair placed at step 0 instead of negotiating it.
    pub start_pair: Option<NotePair>,
    pub finalis: bool,
    /// Give both agents zero activations; nets are not consulted.
    pub agent_only: bool,
}

impl Default for CompositionConfig {
    fn default() -> Self {
        CompositionConfig {
            length: 8,
            plan1: vec![0.8, 0.0, 0.8, 0.0],
            plan2: vec![0.0, 1.0, 0.0, 1.0],
            weights: UtilityWeights::default(),
            seed: 0,
            start_pair: Some(NotePair::new(Pitch::RE8, Pitch::RE8)),
            finalis: true,
            agent_only: false,
        }
    }
}

impl CompositionConfig {
    pub fn agent_only(length: usize) -> Self {
        CompositionConfig {
            length,
            agent_only: true,
            plan1: vec![0.0; DEFAULT_PLAN_SIZE],
            plan2: vec![0.0; DEFAULT_PLAN_SIZE],
            ..CompositionConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub weight: f64,
    /// `None` on a dead end.
    pub pair: Option<NotePair>,
    pub utility: f64,
    pub legal_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionResult {
    pub voice1: Vec<Pitch>,
    pub voice2: Vec<Pitch>,
    /// Step at which no legal pair existed.
    pub dead_end: Option<usize>,
    pub trace: Vec<StepRecord>,
    /// State units of both nets at the start of each step (empty when
    /// agent-only).
    pub net_states: Vec<[Vec<f64>; 2]>,
    /// Codes fed back into each net after each committed step.
    pub feedback: Vec<[Vec<f64>; 2]>,
}

impl CompositionResult {
    pub fn is_complete(&self) -> bool {
        self.dead_end.is_none()
    }

    pub fn pairs(&self) -> impl Iterator<Item = NotePair> + '_ {
        self.voice1.iter().zip(&self.voice2).map(|(a, b)| NotePair::new(*a, *b))
    }

    /// `step,weight,voice1,voice2,utility,legal_count`
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("step,weight,voice1,voice2,utility,legal_count\n");
        for r in &self.trace {
            let (a, b) = r.pair.map_or(("-".to_string(), "-".to_string()), |p| {
                (p.voice1.to_string(), p.voice2.to_string())
            });
            s.push_str(&format!(
                "{},{:?},{},{},{:?},{}\n",
                r.step, r.weight, a, b, r.utility, r.legal_count
            ));
        }
        s
    }
}

/// Coin toss between the two fixed cm weights.
pub fn draw_step_weight<R: Rng>(rng: &mut R, weights: &UtilityWeights) -> Result<f64> {
    match weights.mode {
        WeightMode::CoinToss => Ok(if rng.gen_bool(0.5) {
            COIN_WEIGHTS[1]
        } else {
            COIN_WEIGHTS[0]
        }),
        WeightMode::Deterministic => Err(Error::Contract("weights are not in coin-toss mode".into())),
    }
}

/// Seeded stream of per-step cm weights.
#[derive(Debug, Clone)]
pub struct WeightStream {
    weights: UtilityWeights,
    rng: ChaCha8Rng,
}

impl WeightStream {
    pub fn new(weights: UtilityWeights, seed: u64) -> Self {
        WeightStream {
            weights,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_weight(&mut self) -> f64 {
        match self.weights.mode {
            WeightMode::Deterministic => self.weights.cm_weight,
            WeightMode::CoinToss => draw_step_weight(&mut self.rng, &self.weights).expect("coin-toss mode"),
        }
    }
}

struct Advisor<'a> {
    net: &'a SequentialNet,
    plan: &'a [f64],
    state: NetState,
}

impl Advisor<'_> {
    fn activations(&self, prev: Option<Pitch>) -> Result<ActivationVector> {
        let out = self.net.forward(self.plan, &self.state)?;
        map_to_gamut(&out, prev)
    }
}

fn advisor<'a>(net: Option<&'a SequentialNet>, plan: &'a [f64], which: &str) -> Result<Advisor<'a>> {
    let net = net.ok_or_else(|| Error::Input(format!("{which} needs a net unless agent-only")))?;
    if net.shape().output_size != CODE_SIZE {
        return Err(Error::Input(format!("{which} must be a one-voice net")));
    }
    if plan.len() != net.shape().plan_size {
        return Err(Error::Input(format!(
            "{which} plan has {} units, net expects {}",
            plan.len(),
            net.shape().plan_size
        )));
    }
    Ok(Advisor {
        net,
        plan,
        state: net.initial_state(),
    })
}

/// Composes a duet one pair at a time, without backtracking.
pub fn compose(
    net_a: Option<&SequentialNet>,
    net_b: Option<&SequentialNet>,
    cfg: &CompositionConfig,
) -> Result<CompositionResult> {
    if cfg.length < 2 {
        return Err(Error::Input(format!("melody length {} is below 2", cfg.length)));
    }
    if !(cfg.weights.cm_weight > 0.0 && cfg.weights.cm_weight.is_finite()) {
        return Err(Error::Input(format!(
            "cm weight {} must be positive",
            cfg.weights.cm_weight
        )));
    }
    let mut advisors = if cfg.agent_only {
        None
    } else {
        Some([
            advisor(net_a, &cfg.plan1, "agent 1")?,
            advisor(net_b, &cfg.plan2, "agent 2")?,
        ])
    };

    let mut duet = DuetState::new(cfg.length, cfg.finalis);
    let mut weights = WeightStream::new(cfg.weights, cfg.seed);
    let mut result = CompositionResult {
        voice1: Vec::with_capacity(cfg.length),
        voice2: Vec::with_capacity(cfg.length),
        dead_end: None,
        trace: Vec::with_capacity(cfg.length),
        net_states: Vec::new(),
        feedback: Vec::new(),
    };

    for step in 0..cfg.length {
        let weight = weights.next_weight();
        let prev = duet.last();
        let (act1, act2) = match &advisors {
            None => (ActivationVector::zeros(), ActivationVector::zeros()),
            Some([a, b]) => {
                result.net_states.push([a.state.units.clone(), b.state.units.clone()]);
                (
                    a.activations(prev.map(|p| p.voice1))?,
                    b.activations(prev.map(|p| p.voice2))?,
                )
            }
        };

        let (pair, utility, legal_count) = match (step, cfg.start_pair) {
            (0, Some(start)) => {
                let legal_count = duet.legal_pairs()?.len();
                if !duet.check_pair(start)?.is_legal() {
                    return Err(Error::Input(format!("start pair {start} is not a legal opening")));
                }
                (start, system_utility(&duet, start, &act1, &act2, weight)?, legal_count)
            }
            _ => {
                let n = negotiate(&duet, &act1, &act2, weight)?;
                match n.agreement {
                    Agreement::Pair { pair, utility } => (pair, utility, n.legal_count),
                    Agreement::DeadEnd { step } => {
                        result.trace.push(StepRecord {
                            step,
                            weight,
                            pair: None,
                            utility: 0.0,
                            legal_count: 0,
                        });
                        result.dead_end = Some(step);
                        return Ok(result);
                    }
                }
            }
        };

        result.trace.push(StepRecord {
            step,
            weight,
            pair: Some(pair),
            utility,
            legal_count,
        });
        if let Some(advisors) = advisors.as_mut() {
            let codes = [
                encode_feedback(pair.voice1, prev.map(|p| p.voice1)),
                encode_feedback(pair.voice2, prev.map(|p| p.voice2)),
            ];
            for (adv, code) in advisors.iter_mut().zip(&codes) {
                adv.state = adv.state.step(code.units())?;
            }
            result
                .feedback
                .push([codes[0].units().to_vec(), codes[1].units().to_vec()]);
        }
        duet.push(pair)?;
        result.voice1.push(pair.voice1);
        result.voice2.push(pair.voice2);
    }
    Ok(result)
}
