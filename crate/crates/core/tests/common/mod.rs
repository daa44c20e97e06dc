//! Brute-force reference implementations used by the integration tests and
//! the acceptance suite. Written against plain indices, not the library
//! types, so they check the library rather than restate it.

#![allow(dead_code)]

use std::collections::BTreeSet;

use netneg::negotiation::ActivationVector;
use netneg::seqnet::Pattern;
use netneg::{NetShape, NotePair, Pitch, SequentialNet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Semitones above the low re for gamut indices 0..13.
pub const SEMITONES: [i32; 13] = [0, 2, 3, 5, 7, 9, 10, 12, 14, 15, 17, 19, 21];

pub fn pair(a: usize, b: usize) -> NotePair {
    NotePair::new(Pitch::from_index(a).unwrap(), Pitch::from_index(b).unwrap())
}

fn steps(p: (usize, usize)) -> usize {
    p.0.abs_diff(p.1)
}

fn signed(p: (usize, usize)) -> i32 {
    p.1 as i32 - p.0 as i32
}

fn perfect(p: (usize, usize)) -> bool {
    let s = steps(p);
    match s % 7 {
        0 => true,
        4 => (SEMITONES[p.0] - SEMITONES[p.1]).abs() % 12 == 7,
        _ => false,
    }
}

fn dissonant(p: (usize, usize)) -> bool {
    !perfect(p) && !matches!(steps(p) % 7, 2 | 5)
}

fn family(p: (usize, usize)) -> Option<u8> {
    match steps(p) {
        2 | 9 => Some(3),
        5 | 12 => Some(6),
        _ => None,
    }
}

fn similar(prev: (usize, usize), cur: (usize, usize)) -> bool {
    let d1 = cur.0 as i32 - prev.0 as i32;
    let d2 = cur.1 as i32 - prev.1 as i32;
    (d1 > 0 && d2 > 0) || (d1 < 0 && d2 < 0)
}

/// Rule ids violated by `cur` placed after `history` in a duet of `length`.
/// Every count is recomputed from the whole history.
pub fn violations(history: &[(usize, usize)], cur: (usize, usize), length: usize, finalis: bool) -> BTreeSet<u8> {
    let t = history.len();
    let first_or_last = t == 0 || t == length - 1;
    let interior = |i: usize| i > 0 && i < length - 1;
    let mut v = BTreeSet::new();
    if dissonant(cur) {
        v.insert(1);
    }
    if first_or_last && !perfect(cur) {
        v.insert(2);
    }
    if !first_or_last && steps(cur) == 0 {
        v.insert(3);
    }
    if let Some(&prev) = history.last() {
        if perfect(cur) && similar(prev, cur) {
            v.insert(4);
        }
        if perfect(cur) && [4, 7, 11].contains(&steps(cur)) && steps(prev).abs_diff(steps(cur)) != 2 {
            v.insert(5);
        }
        let m1 = cur.0.abs_diff(prev.0);
        let m2 = cur.1.abs_diff(prev.1);
        if similar(prev, cur) && m1 >= 2 && m2 >= 2 && (m1 > 3 || m2 > 3) {
            v.insert(8);
        }
        if m1 == 0 || m2 == 0 {
            v.insert(9);
        }
    }
    if steps(cur) > 9 {
        v.insert(6);
    }
    if let Some(f) = family(cur) {
        let run = history.iter().rev().take_while(|p| family(**p) == Some(f)).count();
        if run >= 4 {
            v.insert(7);
        }
    }
    let interior_perfect = (0..t).filter(|&i| interior(i) && perfect(history[i])).count();
    if interior(t) && perfect(cur) && interior_perfect >= 2 {
        v.insert(10);
    }
    // Both upper and lower re close the piece.
    if finalis && t == length - 1 && !(cur.0.is_multiple_of(7) && cur.1.is_multiple_of(7)) {
        v.insert(11);
    }
    v
}

pub fn contrary_motion(prev: (usize, usize), cur: (usize, usize)) -> f64 {
    if similar(prev, cur) {
        return 0.0;
    }
    let delta = (signed(prev) - signed(cur)).abs();
    if delta == 0 {
        0.0
    } else {
        1.0 / delta as f64
    }
}

pub fn utility(
    history: &[(usize, usize)],
    cur: (usize, usize),
    length: usize,
    finalis: bool,
    act1: &[f64; 13],
    act2: &[f64; 13],
    weight: f64,
) -> f64 {
    if !violations(history, cur, length, finalis).is_empty() {
        return 0.0;
    }
    let cm = history.last().map_or(0.0, |&prev| contrary_motion(prev, cur));
    act1[cur.0] * act2[cur.1] + weight * cm
}

/// Exhaustive argmax over the 169 pairs, scanning voice 1 then voice 2
/// upwards and replacing only on strict improvement. `None` when nothing is
/// legal.
pub fn best_pair(
    history: &[(usize, usize)],
    length: usize,
    finalis: bool,
    act1: &[f64; 13],
    act2: &[f64; 13],
    weight: f64,
) -> Option<((usize, usize), f64)> {
    let mut best: Option<((usize, usize), f64)> = None;
    for a in 0..13 {
        for b in 0..13 {
            if !violations(history, (a, b), length, finalis).is_empty() {
                continue;
            }
            let u = utility(history, (a, b), length, finalis, act1, act2, weight);
            if best.is_none_or(|(_, bu)| u > bu) {
                best = Some(((a, b), u));
            }
        }
    }
    best
}

pub struct Instance {
    pub length: usize,
    pub finalis: bool,
    pub history: Vec<(usize, usize)>,
    pub act1: [f64; 13],
    pub act2: [f64; 13],
    pub weight: f64,
}

impl Instance {
    pub fn pairs(&self) -> Vec<NotePair> {
        self.history.iter().map(|&(a, b)| pair(a, b)).collect()
    }

    pub fn activations(&self) -> (ActivationVector, ActivationVector) {
        (
            ActivationVector::new(self.act1).unwrap(),
            ActivationVector::new(self.act2).unwrap(),
        )
    }
}

fn random_activations<R: Rng>(rng: &mut R) -> [f64; 13] {
    let mut a = [0.0; 13];
    match rng.gen_range(0..4) {
        0 => {}
        // Coarse values make utility ties common.
        1 => a.iter_mut().for_each(|x| *x = [0.0, 0.5, 1.0][rng.gen_range(0..3)]),
        _ => a.iter_mut().for_each(|x| *x = rng.gen::<f64>()),
    }
    a
}

/// A random legal history (possibly mixed with one illegal pair, which the
/// rules must still handle) plus random activations and weight.
pub fn random_instance<R: Rng>(rng: &mut R) -> Instance {
    let length = rng.gen_range(2..=12);
    let finalis = rng.gen_bool(0.8);
    let target = rng.gen_range(0..length);
    let mut history = Vec::new();
    while history.len() < target {
        let legal: Vec<(usize, usize)> = (0..13)
            .flat_map(|a| (0..13).map(move |b| (a, b)))
            .filter(|&p| violations(&history, p, length, finalis).is_empty())
            .collect();
        let next = if legal.is_empty() || rng.gen_bool(0.05) {
            (rng.gen_range(0..13), rng.gen_range(0..13))
        } else {
            legal[rng.gen_range(0..legal.len())]
        };
        history.push(next);
    }
    let weight = match rng.gen_range(0..3) {
        0 => 1.0,
        1 => [0.5, 1.49][rng.gen_range(0..2)],
        _ => rng.gen_range(0.01..3.0),
    };
    Instance {
        length,
        finalis,
        history,
        act1: random_activations(rng),
        act2: random_activations(rng),
        weight,
    }
}

/// Relative error with a floor so that tiny gradients compare absolutely.
pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-8)
}

pub fn random_net(seed: u64) -> (SequentialNet, Vec<Pattern>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = NetShape {
        plan_size: rng.gen_range(1..=4),
        hidden_size: rng.gen_range(1..=10),
        output_size: rng.gen_range(1..=10),
    };
    let net = SequentialNet::new(shape, 0.7, seed).unwrap();
    let patterns = (0..rng.gen_range(1..=5))
        .map(|_| Pattern {
            input: (0..shape.input_size()).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            target: (0..shape.output_size).map(|_| rng.gen::<f64>()).collect(),
        })
        .collect();
    (net, patterns)
}

/// Worst relative error between backprop and central differences.
pub fn gradient_error(seed: u64) -> f64 {
    let (mut net, patterns) = random_net(seed);
    let (_, grad) = net.loss_and_gradient(&patterns);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for (i, g) in grad.iter().enumerate() {
        let orig = net.params()[i];
        net.params_mut()[i] = orig + h;
        let up = net.loss(&patterns);
        net.params_mut()[i] = orig - h;
        let down = net.loss(&patterns);
        net.params_mut()[i] = orig;
        worst = worst.max(relative_error(*g, (up - down) / (2.0 * h)));
    }
    worst
}
