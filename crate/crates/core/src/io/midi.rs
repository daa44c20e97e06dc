//! Format-1 standard MIDI file, one track per voice, whole notes.

use std::path::Path;

use crate::error::Result;
use crate::gamut::Pitch;

use super::score::Duet;
use super::write_atomic;

pub const TICKS_PER_QUARTER: u16 = 480;
pub const WHOLE_NOTE_TICKS: u32 = 4 * TICKS_PER_QUARTER as u32;
pub const DEFAULT_TEMPO_BPM: u32 = 60;
const VELOCITY: u8 = 80;

fn push_vlq(out: &mut Vec<u8>, mut value: u32) {
    let mut buf = [0u8; 4];
    let mut n = 0;
    loop {
        buf[n] = (value & 0x7f) as u8;
        n += 1;
        value >>= 7;
        if value == 0 {
            break;
        }
    }
    for i in (0..n).rev() {
        out.push(if i == 0 { buf[i] } else { buf[i] | 0x80 });
    }
}

fn meta(out: &mut Vec<u8>, delta: u32, kind: u8, data: &[u8]) {
    push_vlq(out, delta);
    out.extend_from_slice(&[0xff, kind]);
    push_vlq(out, data.len() as u32);
    out.extend_from_slice(data);
}

fn track(voice: &[Pitch], channel: u8, name: &str, tempo_bpm: Option<u32>) -> Vec<u8> {
    let mut ev = Vec::new();
    if let Some(bpm) = tempo_bpm {
        let micros = 60_000_000 / bpm.max(1);
        meta(&mut ev, 0, 0x51, &micros.to_be_bytes()[1..]);
    }
    meta(&mut ev, 0, 0x03, name.as_bytes());
    for p in voice {
        push_vlq(&mut ev, 0);
        ev.extend_from_slice(&[0x90 | channel, p.midi_key(), VELOCITY]);
        push_vlq(&mut ev, WHOLE_NOTE_TICKS);
        ev.extend_from_slice(&[0x80 | channel, p.midi_key(), 0]);
    }
    meta(&mut ev, 0, 0x2f, &[]);

    let mut chunk = b"MTrk".to_vec();
    chunk.extend_from_slice(&(ev.len() as u32).to_be_bytes());
    chunk.extend(ev);
    chunk
}

/// The complete file image. Identical duets give identical bytes.
pub fn midi_bytes(duet: &Duet, tempo_bpm: u32) -> Vec<u8> {
    let mut out = b"MThd".to_vec();
    out.extend_from_slice(&6u32.to_be_bytes());
    out.extend_from_slice(&1u16.to_be_bytes());
    out.extend_from_slice(&2u16.to_be_bytes());
    out.extend_from_slice(&TICKS_PER_QUARTER.to_be_bytes());
    out.extend(track(&duet.voice1, 0, "V1", Some(tempo_bpm)));
    out.extend(track(&duet.voice2, 1, "V2", None));
    out
}

pub fn write_midi(duet: &Duet, path: &Path, tempo_bpm: u32) -> Result<()> {
    write_atomic(path, &midi_bytes(duet, tempo_bpm))
}
