use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gamut::Pitch;

use super::encoding::{encode_note, CODE_SIZE};

pub const DEFAULT_DECAY: f64 = 0.7;
pub const DEFAULT_LEARNING_RATE: f64 = 0.2;
pub const DEFAULT_PLAN_SIZE: usize = 4;
const INIT_RANGE: f64 = 0.5;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetShape {
    pub plan_size: usize,
    pub hidden_size: usize,
    /// Output units; the state layer has the same size.
    pub output_size: usize,
}

impl NetShape {
    /// `voices` note codes side by side at the output.
    pub fn for_voices(voices: usize, plan_size: usize, hidden_size: usize) -> Self {
        NetShape {
            plan_size,
            hidden_size,
            output_size: voices * CODE_SIZE,
        }
    }

    pub fn input_size(&self) -> usize {
        self.plan_size + self.output_size
    }

    pub fn param_count(&self) -> usize {
        self.hidden_size * (self.input_size() + 1) + self.output_size * (self.hidden_size + 1)
    }
}

/// Decaying context fed back into the input layer.
#[derive(Debug, Clone, PartialEq)]
pub struct NetState {
    pub units: Vec<f64>,
    pub decay: f64,
}

impl NetState {
    pub fn zeros(size: usize, decay: f64) -> Self {
        NetState {
            units: vec![0.0; size],
            decay,
        }
    }

    /// `s' = decay * s + feedback`, elementwise.
    pub fn step(&self, feedback: &[f64]) -> Result<NetState> {
        if feedback.len() != self.units.len() {
            return Err(Error::Contract(format!(
                "feedback has {} units, state has {}",
                feedback.len(),
                self.units.len()
            )));
        }
        let units = self
            .units
            .iter()
            .zip(feedback)
            .map(|(s, o)| self.decay * s + o)
            .collect();
        Ok(NetState {
            units,
            decay: self.decay,
        })
    }
}

pub fn step_state(state: &NetState, out: &[f64]) -> Result<NetState> {
    state.step(out)
}

/// Three-layer sequential network: `[plan | state] -> hidden -> output`,
/// logistic units throughout.
///
/// Parameters live in one flat vector: input-to-hidden weights (row-major,
/// one row per hidden unit), hidden biases, hidden-to-output weights, output
/// biases.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialNet {
    shape: NetShape,
    decay: f64,
    params: Vec<f64>,
}

/// One training pattern: the full input vector and the wanted output.
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pub input: Vec<f64>,
    pub target: Vec<f64>,
}

/// A labelled melody: plan vector plus one pitch sequence per voice.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingExample {
    pub plan: Vec<f64>,
    pub voices: Vec<Vec<Pitch>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// Feed target codes (rather than predictions) back into the state units.
    pub teacher_forcing: bool,
    /// Stop early once the epoch MSE falls to this value.
    pub target_mse: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 500,
            learning_rate: DEFAULT_LEARNING_RATE,
            teacher_forcing: true,
            target_mse: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainReport {
    /// Mean squared error after each epoch.
    pub mse: Vec<f64>,
}

impl TrainReport {
    pub fn final_mse(&self) -> Option<f64> {
        self.mse.last().copied()
    }

    /// `epoch,mse` lines, epochs counted from 1.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("epoch,mse\n");
        for (i, e) in self.mse.iter().enumerate() {
            s.push_str(&format!("{},{:?}\n", i + 1, e));
        }
        s
    }
}

pub(crate) struct Activations {
    pub hidden: Vec<f64>,
    pub output: Vec<f64>,
}

/// The per-step code targets for one melody, voices concatenated.
pub fn melody_codes(voices: &[Vec<Pitch>]) -> Result<Vec<Vec<f64>>> {
    let len = voices.first().map_or(0, Vec::len);
    if voices.iter().any(|v| v.len() != len) {
        return Err(Error::Input("voices of a melody differ in length".into()));
    }
    (0..len)
        .map(|t| {
            let mut code = Vec::with_capacity(voices.len() * CODE_SIZE);
            for v in voices {
                let prev = t.checked_sub(1).map(|p| v[p]);
                code.extend_from_slice(encode_note(v[t], prev)?.units());
            }
            Ok(code)
        })
        .collect()
}

impl SequentialNet {
    /// Uniform random weights in [-0.5, 0.5].
    pub fn new(shape: NetShape, decay: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = (0..shape.param_count())
            .map(|_| rng.gen_range(-INIT_RANGE..=INIT_RANGE))
            .collect();
        Self::from_params(shape, decay, params)
    }

    pub fn zeroed(shape: NetShape, decay: f64) -> Result<Self> {
        Self::from_params(shape, decay, vec![0.0; shape.param_count()])
    }

    pub fn from_params(shape: NetShape, decay: f64, params: Vec<f64>) -> Result<Self> {
        if shape.plan_size == 0 || shape.hidden_size == 0 || shape.output_size == 0 {
            return Err(Error::Input(format!("degenerate net shape {shape:?}")));
        }
        if !(0.0..1.0).contains(&decay) {
            return Err(Error::Input(format!("decay {decay} outside [0, 1)")));
        }
        if params.len() != shape.param_count() {
            return Err(Error::Input(format!(
                "{} parameters for a shape needing {}",
                params.len(),
                shape.param_count()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Input("non-finite weight".into()));
        }
        Ok(SequentialNet { shape, decay, params })
    }

    pub fn shape(&self) -> NetShape {
        self.shape
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn voices(&self) -> Option<usize> {
        self.shape
            .output_size
            .is_multiple_of(CODE_SIZE)
            .then_some(self.shape.output_size / CODE_SIZE)
    }

    pub fn initial_state(&self) -> NetState {
        NetState::zeros(self.shape.output_size, self.decay)
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let NetShape {
            hidden_size: h,
            output_size: o,
            ..
        } = self.shape;
        let b1 = h * self.shape.input_size();
        let w2 = b1 + h;
        let b2 = w2 + o * h;
        (b1, w2, b2)
    }

    fn check_input(&self, plan: &[f64], state: &[f64]) -> Result<()> {
        if plan.len() != self.shape.plan_size || state.len() != self.shape.output_size {
            return Err(Error::Contract(format!(
                "net expects plan {} and state {}, got {} and {}",
                self.shape.plan_size,
                self.shape.output_size,
                plan.len(),
                state.len()
            )));
        }
        Ok(())
    }

    pub(crate) fn activate(&self, input: &[f64]) -> Activations {
        let n_in = self.shape.input_size();
        let (b1, w2, b2) = self.offsets();
        let p = &self.params;
        let hidden: Vec<f64> = (0..self.shape.hidden_size)
            .map(|j| {
                let row = &p[j * n_in..(j + 1) * n_in];
                let z: f64 = row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + p[b1 + j];
                sigmoid(z)
            })
            .collect();
        let n_h = self.shape.hidden_size;
        let output = (0..self.shape.output_size)
            .map(|k| {
                let row = &p[w2 + k * n_h..w2 + (k + 1) * n_h];
                let z: f64 = row.iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>() + p[b2 + k];
                sigmoid(z)
            })
            .collect();
        Activations { hidden, output }
    }

    pub fn forward(&self, plan: &[f64], state: &NetState) -> Result<Vec<f64>> {
        self.check_input(plan, &state.units)?;
        let input: Vec<f64> = plan.iter().chain(&state.units).copied().collect();
        Ok(self.activate(&input).output)
    }

    /// Adds the gradient of `0.5 * |output - target|^2` for one pattern into
    /// `grad` and returns that loss.
    fn accumulate_gradient(&self, pattern: &Pattern, grad: &mut [f64]) -> f64 {
        let n_in = self.shape.input_size();
        let n_h = self.shape.hidden_size;
        let (b1, w2, b2) = self.offsets();
        let act = self.activate(&pattern.input);

        let mut loss = 0.0;
        let delta_out: Vec<f64> = act
            .output
            .iter()
            .zip(&pattern.target)
            .map(|(o, y)| {
                loss += 0.5 * (o - y) * (o - y);
                (o - y) * o * (1.0 - o)
            })
            .collect();

        let mut delta_hidden = vec![0.0; n_h];
        for (k, d) in delta_out.iter().enumerate() {
            let row = w2 + k * n_h;
            for j in 0..n_h {
                grad[row + j] += d * act.hidden[j];
                delta_hidden[j] += self.params[row + j] * d;
            }
            grad[b2 + k] += d;
        }
        for j in 0..n_h {
            let d = delta_hidden[j] * act.hidden[j] * (1.0 - act.hidden[j]);
            let row = j * n_in;
            for (i, x) in pattern.input.iter().enumerate() {
                grad[row + i] += d * x;
            }
            grad[b1 + j] += d;
        }
        loss
    }

    /// Summed loss `0.5 * sum |output - target|^2` over all patterns and its
    /// gradient with respect to every parameter.
    pub fn loss_and_gradient(&self, patterns: &[Pattern]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.params.len()];
        let loss = patterns.iter().map(|p| self.accumulate_gradient(p, &mut grad)).sum();
        (loss, grad)
    }

    pub fn loss(&self, patterns: &[Pattern]) -> f64 {
        patterns
            .iter()
            .map(|p| {
                self.activate(&p.input)
                    .output
                    .iter()
                    .zip(&p.target)
                    .map(|(o, y)| 0.5 * (o - y) * (o - y))
                    .sum::<f64>()
            })
            .sum()
    }

    pub fn mean_squared_error(&self, patterns: &[Pattern]) -> f64 {
        if patterns.is_empty() {
            return 0.0;
        }
        2.0 * self.loss(patterns) / (patterns.len() * self.shape.output_size) as f64
    }

    fn sgd_step(&mut self, pattern: &Pattern, learning_rate: f64, scratch: &mut Vec<f64>) {
        scratch.clear();
        scratch.resize(self.params.len(), 0.0);
        self.accumulate_gradient(pattern, scratch);
        for (p, g) in self.params.iter_mut().zip(scratch.iter()) {
            *p -= learning_rate * g;
        }
    }

    /// Teacher-forced patterns: the state before step `t` accumulates the
    /// target codes of steps `0..t`.
    pub fn teacher_forced_patterns(&self, examples: &[TrainingExample]) -> Result<Vec<Pattern>> {
        let mut patterns = Vec::new();
        for ex in examples {
            self.check_example(ex)?;
            let mut state = self.initial_state();
            for code in melody_codes(&ex.voices)? {
                let input = ex.plan.iter().chain(&state.units).copied().collect();
                state = state.step(&code)?;
                patterns.push(Pattern { input, target: code });
            }
        }
        Ok(patterns)
    }

    fn check_example(&self, ex: &TrainingExample) -> Result<()> {
        if ex.plan.len() != self.shape.plan_size {
            return Err(Error::Input(format!(
                "plan of {} units for a net with {}",
                ex.plan.len(),
                self.shape.plan_size
            )));
        }
        if ex.voices.len() * CODE_SIZE != self.shape.output_size {
            return Err(Error::Input(format!(
                "{}-voice melody for a net with {} output units",
                ex.voices.len(),
                self.shape.output_size
            )));
        }
        Ok(())
    }

    /// Free-running pass: state is fed with the net's own outputs. Returns
    /// the mean squared error, optionally updating weights after each step.
    fn free_running_epoch(&mut self, examples: &[TrainingExample], learning_rate: Option<f64>) -> Result<f64> {
        let mut scratch = Vec::new();
        let mut sum = 0.0;
        let mut count = 0;
        for ex in examples {
            let mut state = self.initial_state();
            for target in melody_codes(&ex.voices)? {
                let input: Vec<f64> = ex.plan.iter().chain(&state.units).copied().collect();
                let output = self.activate(&input).output;
                sum += output.iter().zip(&target).map(|(o, y)| (o - y) * (o - y)).sum::<f64>();
                count += target.len();
                let pattern = Pattern { input, target };
                if let Some(lr) = learning_rate {
                    self.sgd_step(&pattern, lr, &mut scratch);
                }
                state = state.step(&output)?;
            }
        }
        Ok(sum / count as f64)
    }

    /// Online backpropagation, one update per pattern, patterns visited in
    /// corpus order.
    pub fn train(&mut self, examples: &[TrainingExample], cfg: &TrainConfig) -> Result<TrainReport> {
        if examples.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        for ex in examples {
            self.check_example(ex)?;
        }
        let mut report = TrainReport::default();
        if cfg.teacher_forcing {
            let patterns = self.teacher_forced_patterns(examples)?;
            let mut scratch = Vec::new();
            for _ in 0..cfg.epochs {
                for p in &patterns {
                    self.sgd_step(p, cfg.learning_rate, &mut scratch);
                }
                let mse = self.mean_squared_error(&patterns);
                report.mse.push(mse);
                if cfg.target_mse.is_some_and(|t| mse <= t) {
                    break;
                }
            }
        } else {
            for _ in 0..cfg.epochs {
                self.free_running_epoch(examples, Some(cfg.learning_rate))?;
                let mse = self.free_running_epoch(examples, None)?;
                report.mse.push(mse);
                if cfg.target_mse.is_some_and(|t| mse <= t) {
                    break;
                }
            }
        }
        Ok(report)
    }
}
