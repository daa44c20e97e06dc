//! C ABI over `netneg`.
//!
//! Objects are opaque handles created by `*_new`/`*_load`/`netneg_compose`
//! and released by the matching `*_free`. Every fallible call returns a
//! [`NetNegStatus`]; on failure `netneg_last_error_message` describes the
//! most recent error on the calling thread. Strings returned by the library
//! must be released with `netneg_string_free`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use netneg::io::{load_corpus, parse_duet, render_text, write_midi, Duet};
use netneg::negotiation::{negotiate, ActivationVector, Agreement, UtilityWeights, WeightMode};
use netneg::seqnet::{read_checkpoint, write_checkpoint};
use netneg::{
    validate_duet, CompositionConfig, CompositionResult, DuetState, Error, NetShape, NotePair, Pitch, SequentialNet,
    TrainConfig, GAMUT_SIZE,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetNegStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Io = 4,
    Contract = 5,
    Panic = 6,
}

/// A trained or loaded sequential net.
pub struct NetNegNet(SequentialNet);

/// A duet under construction, with rule bookkeeping.
pub struct NetNegDuet(DuetState);

/// The outcome of a composition run.
pub struct NetNegComposition(CompositionResult);

/// Result of one negotiation round. `dead_end` is true when no legal
/// pair exists; the pair fields are then unset.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NetNegAgreement {
    pub dead_end: bool,
    pub voice1: u8,
    pub voice2: u8,
    pub utility: f64,
    pub legal_count: usize,
}

/// Composition settings. Plans point at `plan_len` values each; they may be
/// null when `agent_only` is set.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NetNegComposeConfig {
    pub length: usize,
    pub plan1: *const f64,
    pub plan2: *const f64,
    pub plan_len: usize,
    pub cm_weight: f64,
    pub coin_toss: bool,
    pub seed: u64,
    pub has_start: bool,
    pub start_voice1: u8,
    pub start_voice2: u8,
    pub finalis: bool,
    pub agent_only: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(NetNegStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::UnknownPitch(_) | Error::Parse { .. } | Error::Checkpoint(_) => NetNegStatus::Parse,
            Error::Io { .. } => NetNegStatus::Io,
            Error::Contract(_) => NetNegStatus::Contract,
            _ => NetNegStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

type FfiResult<T = ()> = Result<T, Failure>;

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> FfiResult) -> NetNegStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NetNegStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            NetNegStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(NetNegStatus::NullPointer, format!("{what} is null"))
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(NetNegStatus::InvalidArgument, message.into())
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn as_mut<'a, T>(p: *mut T, what: &str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn as_str<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not UTF-8")))
}

fn pitch(index: u8) -> FfiResult<Pitch> {
    Pitch::from_index(index as usize).ok_or_else(|| invalid(format!("pitch index {index} outside 0..{GAMUT_SIZE}")))
}

unsafe fn activations(p: *const f64, what: &str) -> FfiResult<ActivationVector> {
    if p.is_null() {
        return Ok(ActivationVector::zeros());
    }
    let values = std::slice::from_raw_parts(p, GAMUT_SIZE);
    ActivationVector::from_slice(values).map_err(|e| invalid(format!("{what}: {e}")))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("no interior nul").into_raw()
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Short description of a status, e.g. `"parse error"`. Static; do not free.
#[no_mangle]
pub extern "C" fn netneg_status_name(status: NetNegStatus) -> *const c_char {
    let s: &'static CStr = match status {
        NetNegStatus::Ok => c"ok",
        NetNegStatus::NullPointer => c"null pointer",
        NetNegStatus::InvalidArgument => c"invalid argument",
        NetNegStatus::Parse => c"parse error",
        NetNegStatus::Io => c"i/o error",
        NetNegStatus::Contract => c"contract violation",
        NetNegStatus::Panic => c"panic",
    };
    s.as_ptr()
}

/// Copy of the calling thread's last error message, or null if none.
#[no_mangle]
pub extern "C" fn netneg_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null_mut(), |c| c.clone().into_raw()))
}

#[no_mangle]
pub unsafe extern "C" fn netneg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Solfège name of gamut pitch `index` (0 = re .. 12 = si8), or null.
/// Static; do not free.
#[no_mangle]
pub extern "C" fn netneg_pitch_name(index: u8) -> *const c_char {
    const NAMES: [&CStr; GAMUT_SIZE] = [
        c"re", c"mi", c"fa", c"sol", c"la", c"si", c"do8", c"re8", c"mi8", c"fa8", c"sol8", c"la8", c"si8",
    ];
    NAMES.get(index as usize).map_or(ptr::null(), |c| c.as_ptr())
}

#[no_mangle]
pub unsafe extern "C" fn netneg_pitch_parse(name: *const c_char, out_index: *mut u8) -> NetNegStatus {
    guard(|| {
        let out = as_mut(out_index, "out_index")?;
        let p: Pitch = as_str(name, "name")?.parse()?;
        *out = p.index() as u8;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn netneg_duet_new(length: usize, finalis: bool, out: *mut *mut NetNegDuet) -> NetNegStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        if length == 0 {
            return Err(invalid("duet length must be positive"));
        }
        *out = boxed(NetNegDuet(DuetState::new(length, finalis)));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn netneg_duet_free(duet: *mut NetNegDuet) {
    if !duet.is_null() {
        drop(Box::from_raw(duet));
    }
}

/// Number of pairs placed so far.
#[no_mangle]
pub unsafe extern "C" fn netneg_duet_position(duet: *const NetNegDuet) -> usize {
    duet.as_ref().map_or(0, |d| d.0.position())
}

/// Appends a pair without checking it against the rules.
#[no_mangle]
pub unsafe extern "C" fn netneg_duet_push(duet: *mut NetNegDuet, voice1: u8, voice2: u8) -> NetNegStatus {
    guard(|| {
        let d = as_mut(duet, "duet")?;
        d.0.push(NotePair::new(pitch(voice1)?, pitch(voice2)?))?;
        Ok(())
    })
}

/// Rules the pair would break at the next position, as a bit mask: bit `r`
/// is set when rule `r` fails. Zero means legal.
#[no_mangle]
pub unsafe extern "C" fn netneg_duet_check_pair(
    duet: *const NetNegDuet,
    voice1: u8,
    voice2: u8,
    out_mask: *mut u16,
) -> NetNegStatus {
    guard(|| {
        let d = as_ref(duet, "duet")?;
        let out = as_mut(out_mask, "out_mask")?;
        *out =
            d.0.check_pair(NotePair::new(pitch(voice1)?, pitch(voice2)?))?
                .violations
                .bits();
        Ok(())
    })
}

/// Negotiates the next pair. `act1`/`act2` point at 13 values each, or are
/// null for zero activations.
#[no_mangle]
pub unsafe extern "C" fn netneg_negotiate(
    duet: *const NetNegDuet,
    act1: *const f64,
    act2: *const f64,
    cm_weight: f64,
    out: *mut NetNegAgreement,
) -> NetNegStatus {
    guard(|| {
        let d = as_ref(duet, "duet")?;
        let out = as_mut(out, "out")?;
        let (a1, a2) = (activations(act1, "act1")?, activations(act2, "act2")?);
        let n = negotiate(&d.0, &a1, &a2, cm_weight)?;
        *out = match n.agreement {
            Agreement::Pair { pair, utility } => NetNegAgreement {
                dead_end: false,
                voice1: pair.voice1.index() as u8,
                voice2: pair.voice2.index() as u8,
                utility,
                legal_count: n.legal_count,
            },
            Agreement::DeadEnd { .. } => NetNegAgreement {
                dead_end: true,
                legal_count: 0,
                ..NetNegAgreement::default()
            },
        };
        Ok(())
    })
}

/// Validates a duet in `V1:`/`V2:` text form. `out_report` may be null;
/// otherwise it receives the per-position report, to be freed by the caller.
#[no_mangle]
pub unsafe extern "C" fn netneg_validate_text(
    text: *const c_char,
    finalis: bool,
    out_legal: *mut bool,
    out_report: *mut *mut c_char,
) -> NetNegStatus {
    guard(|| {
        let out = as_mut(out_legal, "out_legal")?;
        let duet = parse_duet(as_str(text, "text")?)?;
        let report = validate_duet(&duet.voice1, &duet.voice2, finalis)?;
        *out = report.is_legal();
        if let Some(slot) = out_report.as_mut() {
            *slot = into_c_string(report.to_string());
        }
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn netneg_net_load(path: *const c_char, out: *mut *mut NetNegNet) -> NetNegStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        let net = read_checkpoint(Path::new(as_str(path, "path")?))?;
        *out = boxed(NetNegNet(net));
        Ok(())
    })
}

/// Trains a fresh net on a corpus file with one-hot plans of `plan_size`
/// units. `out_mse` may be null.
#[no_mangle]
pub unsafe extern "C" fn netneg_net_train(
    corpus_path: *const c_char,
    plan_size: usize,
    hidden: usize,
    epochs: usize,
    learning_rate: f64,
    decay: f64,
    seed: u64,
    out: *mut *mut NetNegNet,
    out_mse: *mut f64,
) -> NetNegStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        let corpus = load_corpus(Path::new(as_str(corpus_path, "corpus_path")?), plan_size)?;
        let shape = NetShape::for_voices(corpus.mode.voices(), plan_size, hidden);
        let mut net = SequentialNet::new(shape, decay, seed)?;
        let cfg = TrainConfig {
            epochs,
            learning_rate,
            ..TrainConfig::default()
        };
        let report = net.train(&corpus.training_examples(), &cfg)?;
        if let Some(mse) = out_mse.as_mut() {
            *mse = report.final_mse().unwrap_or(f64::NAN);
        }
        *out = boxed(NetNegNet(net));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn netneg_net_save(net: *const NetNegNet, path: *const c_char) -> NetNegStatus {
    guard(|| {
        let n = as_ref(net, "net")?;
        write_checkpoint(&n.0, Path::new(as_str(path, "path")?))?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn netneg_net_free(net: *mut NetNegNet) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Defaults: length 8, plans (0.8 0 0.8 0) and (0 1 0 1), weight 1,
/// deterministic, start re8:re8, finalis on.
#[no_mangle]
pub extern "C" fn netneg_compose_default_config() -> NetNegComposeConfig {
    static PLAN1: [f64; 4] = [0.8, 0.0, 0.8, 0.0];
    static PLAN2: [f64; 4] = [0.0, 1.0, 0.0, 1.0];
    let d = CompositionConfig::default();
    let start = d.start_pair.map(|p| (p.voice1.index() as u8, p.voice2.index() as u8));
    NetNegComposeConfig {
        length: d.length,
        plan1: PLAN1.as_ptr(),
        plan2: PLAN2.as_ptr(),
        plan_len: PLAN1.len(),
        cm_weight: d.weights.cm_weight,
        coin_toss: false,
        seed: d.seed,
        has_start: start.is_some(),
        start_voice1: start.map_or(0, |s| s.0),
        start_voice2: start.map_or(0, |s| s.1),
        finalis: d.finalis,
        agent_only: d.agent_only,
    }
}

unsafe fn plan(p: *const f64, len: usize, what: &str) -> FfiResult<Vec<f64>> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len).to_vec())
}

/// Runs a composition. Nets may be null when `agent_only` is set. A dead end
/// is a successful result; query it with `netneg_composition_dead_end`.
#[no_mangle]
pub unsafe extern "C" fn netneg_compose(
    net_a: *const NetNegNet,
    net_b: *const NetNegNet,
    config: *const NetNegComposeConfig,
    out: *mut *mut NetNegComposition,
) -> NetNegStatus {
    guard(|| {
        let out = as_mut(out, "out")?;
        let c = as_ref(config, "config")?;
        let start_pair = if c.has_start {
            Some(NotePair::new(pitch(c.start_voice1)?, pitch(c.start_voice2)?))
        } else {
            None
        };
        let cfg = CompositionConfig {
            length: c.length,
            plan1: plan(c.plan1, c.plan_len, "plan1")?,
            plan2: plan(c.plan2, c.plan_len, "plan2")?,
            weights: UtilityWeights {
                cm_weight: c.cm_weight,
                mode: if c.coin_toss {
                    WeightMode::CoinToss
                } else {
                    WeightMode::Deterministic
                },
            },
            seed: c.seed,
            start_pair,
            finalis: c.finalis,
            agent_only: c.agent_only,
        };
        let result = netneg::compose(net_a.as_ref().map(|n| &n.0), net_b.as_ref().map(|n| &n.0), &cfg)?;
        *out = boxed(NetNegComposition(result));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn netneg_composition_free(composition: *mut NetNegComposition) {
    if !composition.is_null() {
        drop(Box::from_raw(composition));
    }
}

/// Number of pairs committed.
#[no_mangle]
pub unsafe extern "C" fn netneg_composition_len(composition: *const NetNegComposition) -> usize {
    composition.as_ref().map_or(0, |c| c.0.voice1.len())
}

#[no_mangle]
pub unsafe extern "C" fn netneg_composition_pair(
    composition: *const NetNegComposition,
    index: usize,
    out_voice1: *mut u8,
    out_voice2: *mut u8,
) -> NetNegStatus {
    guard(|| {
        let c = as_ref(composition, "composition")?;
        let (v1, v2) = (as_mut(out_voice1, "out_voice1")?, as_mut(out_voice2, "out_voice2")?);
        let pair =
            c.0.pairs()
                .nth(index)
                .ok_or_else(|| invalid(format!("pair {index} of {}", c.0.voice1.len())))?;
        *v1 = pair.voice1.index() as u8;
        *v2 = pair.voice2.index() as u8;
        Ok(())
    })
}

/// True if the run stopped early; `out_step` (may be null) receives the step.
#[no_mangle]
pub unsafe extern "C" fn netneg_composition_dead_end(
    composition: *const NetNegComposition,
    out_step: *mut usize,
) -> bool {
    match composition.as_ref().and_then(|c| c.0.dead_end) {
        Some(step) => {
            if let Some(s) = out_step.as_mut() {
                *s = step;
            }
            true
        }
        None => false,
    }
}

/// `V1:`/`V2:` text of the committed pairs. Free with `netneg_string_free`.
#[no_mangle]
pub unsafe extern "C" fn netneg_composition_text(composition: *const NetNegComposition) -> *mut c_char {
    match composition.as_ref() {
        Some(c) => into_c_string(render_text(&Duet::from_pairs(&c.0.pairs().collect::<Vec<_>>()))),
        None => ptr::null_mut(),
    }
}

/// The per-step trace as CSV. Free with `netneg_string_free`.
#[no_mangle]
pub unsafe extern "C" fn netneg_composition_trace_csv(composition: *const NetNegComposition) -> *mut c_char {
    composition
        .as_ref()
        .map_or(ptr::null_mut(), |c| into_c_string(c.0.trace_csv()))
}

#[no_mangle]
pub unsafe extern "C" fn netneg_composition_write_midi(
    composition: *const NetNegComposition,
    path: *const c_char,
    tempo_bpm: u32,
) -> NetNegStatus {
    guard(|| {
        let c = as_ref(composition, "composition")?;
        let duet = Duet::from_pairs(&c.0.pairs().collect::<Vec<_>>());
        write_midi(&duet, Path::new(as_str(path, "path")?), tempo_bpm)?;
        Ok(())
    })
}
