//! Plain-text net checkpoints.
//!
//! ```text
//! netneg-seqnet 1
//! plan_size 4
//! hidden_size 15
//! output_size 19
//! decay 0.7
//! params 394
//! <one weight per line>
//! ```
//!
//! Weights use Rust's shortest round-trip decimal form, so reading a
//! checkpoint back yields bit-identical values.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::write_atomic;

use super::net::{NetShape, SequentialNet};

pub const CHECKPOINT_MAGIC: &str = "netneg-seqnet";
const VERSION: u32 = 1;

impl SequentialNet {
    pub fn to_checkpoint_text(&self) -> String {
        let shape = self.shape();
        let mut s = String::new();
        let _ = writeln!(s, "{CHECKPOINT_MAGIC} {VERSION}");
        let _ = writeln!(s, "plan_size {}", shape.plan_size);
        let _ = writeln!(s, "hidden_size {}", shape.hidden_size);
        let _ = writeln!(s, "output_size {}", shape.output_size);
        let _ = writeln!(s, "decay {:?}", self.decay());
        let _ = writeln!(s, "params {}", self.params().len());
        for p in self.params() {
            let _ = writeln!(s, "{p:?}");
        }
        s
    }

    pub fn from_checkpoint_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::Checkpoint(format!("truncated before {what}")))
        };

        let (line, header) = next("header")?;
        match header.split_once(' ') {
            Some((CHECKPOINT_MAGIC, v)) if v.trim() == VERSION.to_string() => {}
            Some((CHECKPOINT_MAGIC, v)) => {
                return Err(Error::Checkpoint(format!("unsupported version {v}")));
            }
            _ => return Err(Error::parse(line, "not a netneg-seqnet checkpoint")),
        }

        fn field<T: std::str::FromStr>((line, text): (usize, &str), key: &str) -> Result<T> {
            let value = text
                .strip_prefix(key)
                .and_then(|rest| rest.strip_prefix(' '))
                .ok_or_else(|| Error::parse(line, format!("expected `{key} <value>`")))?;
            value
                .trim()
                .parse()
                .map_err(|_| Error::parse(line, format!("bad value for {key}: `{value}`")))
        }

        let plan_size = field(next("plan_size")?, "plan_size")?;
        let hidden_size = field(next("hidden_size")?, "hidden_size")?;
        let output_size = field(next("output_size")?, "output_size")?;
        let decay: f64 = field(next("decay")?, "decay")?;
        let count: usize = field(next("params")?, "params")?;
        let shape = NetShape {
            plan_size,
            hidden_size,
            output_size,
        };
        if count != shape.param_count() {
            return Err(Error::Checkpoint(format!(
                "{count} parameters declared, shape needs {}",
                shape.param_count()
            )));
        }
        let mut params = Vec::with_capacity(count);
        for _ in 0..count {
            let (line, text) = next("end of parameters")?;
            params.push(
                text.parse::<f64>()
                    .map_err(|_| Error::parse(line, format!("bad weight `{text}`")))?,
            );
        }
        SequentialNet::from_params(shape, decay, params)
    }
}

pub fn write_checkpoint(net: &SequentialNet, path: &Path) -> Result<()> {
    write_atomic(path, net.to_checkpoint_text().as_bytes())
}

pub fn read_checkpoint(path: &Path) -> Result<SequentialNet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SequentialNet::from_checkpoint_text(&text)
}
