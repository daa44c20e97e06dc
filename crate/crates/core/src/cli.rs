//! `netneg` command line: train, generate, compose, validate.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use crate::composer::{compose, CompositionConfig};
use crate::error::{Error, Result};
use crate::gamut::{NotePair, Pitch};
use crate::io::{load_corpus, parse_duet, render_text, render_voice, write_atomic, write_midi, Duet};
use crate::negotiation::{UtilityWeights, WeightMode};
use crate::rules::validate_duet;
use crate::seqnet::{
    generate, read_checkpoint, write_checkpoint, NetShape, SequentialNet, TrainConfig, DEFAULT_DECAY,
    DEFAULT_LEARNING_RATE, DEFAULT_PLAN_SIZE,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DEAD_END: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "netneg",
    version,
    about = "First-species two-part counterpoint by nets and negotiating agents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Det,
    Coin,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train a sequential net on a corpus file.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 15)]
        hidden: usize,
        #[arg(long, default_value_t = 500)]
        epochs: usize,
        #[arg(long, default_value_t = DEFAULT_LEARNING_RATE)]
        lr: f64,
        #[arg(long, default_value_t = DEFAULT_DECAY)]
        decay: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_PLAN_SIZE)]
        plan_size: usize,
        /// Stop once the epoch error reaches this value.
        #[arg(long)]
        target_mse: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Write the error curve as `epoch,mse` CSV.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Generate melodies from a trained net.
    Generate {
        #[arg(long)]
        net: PathBuf,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        plan: Vec<f64>,
        #[arg(long, default_value_t = 8)]
        length: usize,
        /// First note, e.g. `re8`, or `re8:re8` for a two-voice net.
        #[arg(long)]
        start: Option<String>,
    },
    /// Compose a duet by negotiation.
    Compose {
        #[arg(long = "netA")]
        net_a: Option<PathBuf>,
        #[arg(long = "netB")]
        net_b: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "0.8,0,0.8,0")]
        plan1: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0,1,0,1")]
        plan2: Vec<f64>,
        #[arg(long, default_value_t = 8)]
        length: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Det)]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        cm_weight: f64,
        #[arg(long)]
        agent_only: bool,
        #[arg(long, default_value = "re8:re8")]
        start: NotePairArg,
        /// Negotiate the first pair too.
        #[arg(long, conflicts_with = "start")]
        no_start: bool,
        #[arg(long)]
        no_finalis: bool,
        #[arg(long)]
        midi: Option<PathBuf>,
        #[arg(long, default_value_t = crate::io::DEFAULT_TEMPO_BPM)]
        tempo: u32,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check a duet file against the rules; exit 0 iff legal.
    Validate {
        #[arg(long)]
        duet: PathBuf,
        #[arg(long)]
        no_finalis: bool,
    },
}

#[derive(Debug, Clone, Copy)]
struct NotePairArg(NotePair);

impl std::str::FromStr for NotePairArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        s.parse().map(NotePairArg).map_err(|e: Error| e.to_string())
    }
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",")
}

#[allow(clippy::too_many_arguments)]
fn run_train(
    out: &mut dyn Write,
    corpus: &Path,
    hidden: usize,
    cfg: TrainConfig,
    decay: f64,
    seed: u64,
    plan_size: usize,
    dest: &Path,
    curve: Option<&Path>,
) -> Result<i32> {
    let corpus = load_corpus(corpus, plan_size)?;
    let shape = NetShape::for_voices(corpus.mode.voices(), plan_size, hidden);
    let mut net = SequentialNet::new(shape, decay, seed)?;
    let report = net.train(&corpus.training_examples(), &cfg)?;
    write_checkpoint(&net, dest)?;
    if let Some(curve) = curve {
        write_atomic(curve, report.to_csv().as_bytes())?;
    }
    let _ = writeln!(
        out,
        "trained {} melodies ({} voice), {} epochs, final mse {:?}",
        corpus.len(),
        corpus.mode.voices(),
        report.mse.len(),
        report.final_mse().unwrap_or(f64::NAN)
    );
    Ok(EXIT_OK)
}

fn run_generate(out: &mut dyn Write, net: &Path, plan: &[f64], length: usize, start: Option<&str>) -> Result<i32> {
    let net = read_checkpoint(net)?;
    let start: Vec<Option<Pitch>> = match start {
        None => Vec::new(),
        Some(s) => s.split(':').map(|t| t.parse().map(Some)).collect::<Result<_>>()?,
    };
    let generation = generate(&net, plan, length, &start)?;
    for (i, voice) in generation.voices.iter().enumerate() {
        let _ = writeln!(out, "V{}: {}", i + 1, render_voice(voice));
    }
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn run_compose(
    out: &mut dyn Write,
    net_paths: [Option<&Path>; 2],
    cfg: CompositionConfig,
    midi: Option<&Path>,
    tempo: u32,
    trace: Option<&Path>,
) -> Result<i32> {
    let mut nets = Vec::new();
    let mut hashes = Vec::new();
    for path in net_paths.iter().flatten() {
        if !cfg.agent_only {
            nets.push(read_checkpoint(path)?);
        }
        hashes.push((path.display().to_string(), sha256_file(path)?));
    }
    let (a, b) = if cfg.agent_only {
        (None, None)
    } else {
        if nets.len() != 2 {
            return Err(Error::Input(
                "compose needs --netA and --netB unless --agent-only".into(),
            ));
        }
        (Some(&nets[0]), Some(&nets[1]))
    };
    let result = compose(a, b, &cfg)?;
    let duet = Duet::new(result.voice1.clone(), result.voice2.clone())?;
    let _ = out.write_all(render_text(&duet).as_bytes());
    if let Some(step) = result.dead_end {
        let _ = writeln!(out, "dead end at step {step}");
    }

    if let Some(path) = trace {
        let mut text = String::from("# netneg compose trace\n");
        text.push_str(&format!("# seed={}\n", cfg.seed));
        text.push_str(&format!(
            "# mode={}\n",
            match cfg.weights.mode {
                WeightMode::Deterministic => "det",
                WeightMode::CoinToss => "coin",
            }
        ));
        text.push_str(&format!("# cm_weight={:?}\n", cfg.weights.cm_weight));
        text.push_str(&format!("# length={}\n", cfg.length));
        text.push_str(&format!("# plan1={}\n", join(&cfg.plan1)));
        text.push_str(&format!("# plan2={}\n", join(&cfg.plan2)));
        text.push_str(&format!(
            "# start={}\n",
            cfg.start_pair.map_or("none".to_string(), |p| p.to_string())
        ));
        text.push_str(&format!("# finalis={}\n", cfg.finalis));
        text.push_str(&format!("# agent_only={}\n", cfg.agent_only));
        for (label, (path, hash)) in ["netA", "netB"].iter().zip(&hashes) {
            text.push_str(&format!("# {label}={path} sha256={hash}\n"));
        }
        text.push_str(&result.trace_csv());
        write_atomic(path, text.as_bytes())?;
    }
    if let Some(path) = midi {
        if result.is_complete() {
            write_midi(&duet, path, tempo)?;
        }
    }
    Ok(if result.is_complete() { EXIT_OK } else { EXIT_DEAD_END })
}

fn run_validate(out: &mut dyn Write, path: &Path, finalis: bool) -> Result<i32> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let duet = parse_duet(&text)?;
    let report = validate_duet(&duet.voice1, &duet.voice2, finalis)?;
    let _ = write!(out, "{report}");
    if report.is_legal() {
        let _ = writeln!(out, "legal");
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(out, "illegal at {} position(s)", report.violations().count());
        Ok(EXIT_FAILURE)
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Train {
            corpus,
            hidden,
            epochs,
            lr,
            decay,
            seed,
            plan_size,
            target_mse,
            out: dest,
            curve,
        } => {
            let cfg = TrainConfig {
                epochs,
                learning_rate: lr,
                teacher_forcing: true,
                target_mse,
            };
            run_train(
                out,
                &corpus,
                hidden,
                cfg,
                decay,
                seed,
                plan_size,
                &dest,
                curve.as_deref(),
            )
        }
        Command::Generate {
            net,
            plan,
            length,
            start,
        } => run_generate(out, &net, &plan, length, start.as_deref()),
        Command::Compose {
            net_a,
            net_b,
            plan1,
            plan2,
            length,
            mode,
            seed,
            cm_weight,
            agent_only,
            start,
            no_start,
            no_finalis,
            midi,
            tempo,
            trace,
        } => {
            let cfg = CompositionConfig {
                length,
                plan1,
                plan2,
                weights: UtilityWeights {
                    cm_weight,
                    mode: match mode {
                        ModeArg::Det => WeightMode::Deterministic,
                        ModeArg::Coin => WeightMode::CoinToss,
                    },
                },
                seed,
                start_pair: (!no_start).then_some(start.0),
                finalis: !no_finalis,
                agent_only,
            };
            run_compose(
                out,
                [net_a.as_deref(), net_b.as_deref()],
                cfg,
                midi.as_deref(),
                tempo,
                trace.as_deref(),
            )
        }
        Command::Validate { duet, no_finalis } => run_validate(out, &duet, !no_finalis),
    }
}

/// Runs the CLI with explicit streams; returns the process exit code.
pub fn run_cli<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(rendered.as_bytes());
            } else {
                let _ = out.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}\n\n{}", Cli::command().render_usage());
            EXIT_FAILURE
        }
    }
}
