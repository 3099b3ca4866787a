//! Six-byte absolute touch frame codec.
//!
//! Wire layout, one frame per touch sample:
//!
//! ```text
//! byte0  1000000F   sync pattern, F = finger present
//! byte1  000XXXXX   x[12:8]
//! byte2  XXXXXXXX   x[7:0]
//! byte3  000YYYYY   y[12:8]
//! byte4  YYYYYYYY   y[7:0]
//! byte5  ZZZZZZZZ   pressure
//! ```
//!
//! Timestamps are not carried on the wire. [`StreamDecoder`] stamps each
//! decoded sample from a [`Clock`] and resynchronizes after corruption by
//! dropping one byte at a time until a valid frame lines up again. Payload
//! bytes can imitate a sync byte, so after any corruption the first valid
//! frame must also be followed by a sync byte before it is released.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest raw coordinate on either axis.
pub const COORD_MAX: u16 = 6143;

pub const FRAME_LEN: usize = 6;

const SYNC_MASK: u8 = 0xFE;
const SYNC_BITS: u8 = 0x80;
const HIGH_BITS_MASK: u8 = 0xE0;

/// One decoded touch event.
///
/// When `finger` is false the coordinates are the last known contact point
/// and carry no control meaning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct TouchSample {
    pub t_ms: u64,
    pub x: u16,
    pub y: u16,
    pub z: u8,
    pub finger: bool,
}

impl TouchSample {
    pub fn new(x: u16, y: u16, z: u8, finger: bool) -> Self {
        Self {
            t_ms: 0,
            x,
            y,
            z,
            finger,
        }
    }

    pub fn at(mut self, t_ms: u64) -> Self {
        self.t_ms = t_ms;
        self
    }

    pub fn check_range(&self) -> Result<()> {
        if self.x > COORD_MAX {
            return Err(Error::range("x", self.x, COORD_MAX));
        }
        if self.y > COORD_MAX {
            return Err(Error::range("y", self.y, COORD_MAX));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RawFrame(pub [u8; FRAME_LEN]);

impl RawFrame {
    pub fn as_bytes(&self) -> &[u8; FRAME_LEN] {
        &self.0
    }
}

impl From<[u8; FRAME_LEN]> for RawFrame {
    fn from(bytes: [u8; FRAME_LEN]) -> Self {
        RawFrame(bytes)
    }
}

#[inline]
pub fn is_sync_byte(b: u8) -> bool {
    b & SYNC_MASK == SYNC_BITS
}

pub fn encode_frame(sample: &TouchSample) -> Result<RawFrame> {
    sample.check_range()?;
    let [x_hi, x_lo] = sample.x.to_be_bytes();
    let [y_hi, y_lo] = sample.y.to_be_bytes();
    Ok(RawFrame([
        SYNC_BITS | sample.finger as u8,
        x_hi,
        x_lo,
        y_hi,
        y_lo,
        sample.z,
    ]))
}

/// Inverse of [`encode_frame`]. The returned sample has `t_ms == 0`.
pub fn decode_frame(frame: &RawFrame) -> Result<TouchSample> {
    let b = frame.0;
    if !is_sync_byte(b[0]) {
        return Err(Error::Framing("sync byte missing"));
    }
    if b[1] & HIGH_BITS_MASK != 0 {
        return Err(Error::Framing("x high byte has reserved bits set"));
    }
    if b[3] & HIGH_BITS_MASK != 0 {
        return Err(Error::Framing("y high byte has reserved bits set"));
    }
    let sample = TouchSample::new(
        u16::from_be_bytes([b[1], b[2]]),
        u16::from_be_bytes([b[3], b[4]]),
        b[5],
        b[0] & 1 == 1,
    );
    sample.check_range()?;
    Ok(sample)
}

/// Millisecond time source used to stamp decoded samples.
pub trait Clock {
    fn now_ms(&mut self) -> u64;
}

/// Wall clock, milliseconds since construction.
#[derive(Debug, Clone, Copy)]
pub struct HostClock(Instant);

impl HostClock {
    pub fn new() -> Self {
        HostClock(Instant::now())
    }
}

impl Default for HostClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for HostClock {
    fn now_ms(&mut self) -> u64 {
        self.0.elapsed().as_millis() as u64
    }
}

/// Deterministic clock that advances by a fixed step on every reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepClock {
    next: u64,
    step: u64,
}

impl StepClock {
    pub fn new(start: u64, step: u64) -> Self {
        Self { next: start, step }
    }
}

impl Clock for StepClock {
    fn now_ms(&mut self) -> u64 {
        let t = self.next;
        self.next += self.step;
        t
    }
}

/// Non-fatal stream corruption report. `offset` is the stream byte offset
/// where the affected region starts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    /// Bytes discarded while hunting for a sync byte.
    Skipped { offset: u64, count: usize },
    /// A candidate frame starting at a sync byte failed validation.
    BadFrame { offset: u64, error: Error },
    /// The stream ended in the middle of a candidate frame.
    Truncated { offset: u64, len: usize },
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Diagnostic::Skipped { offset, count } => {
                write!(f, "offset {offset}: skipped {count} byte(s) without sync")
            }
            Diagnostic::BadFrame { offset, error } => {
                write!(f, "offset {offset}: bad frame: {error}")
            }
            Diagnostic::Truncated { offset, len } => {
                write!(
                    f,
                    "offset {offset}: stream ended inside a frame ({len} of {FRAME_LEN} bytes)"
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decoded {
    Sample(TouchSample),
    Diagnostic(Diagnostic),
}

/// Incremental decoder for a raw frame byte stream.
#[derive(Debug)]
pub struct StreamDecoder<C = HostClock> {
    clock: C,
    /// Candidate frame; when non-empty the first byte is a sync byte.
    pending: Vec<(u64, u8)>,
    /// Cleared by any diagnostic. While unlocked, a valid candidate is only
    /// released once the byte after it is a sync byte.
    locked: bool,
    /// Set when `pending` holds a valid frame awaiting that confirmation.
    held: Option<TouchSample>,
    skipped: usize,
    skipped_from: u64,
    position: u64,
}

impl StreamDecoder<HostClock> {
    pub fn new() -> Self {
        Self::with_clock(HostClock::new())
    }
}

impl Default for StreamDecoder<HostClock> {
    fn default() -> Self {
        Self::new()
    }
}

impl<C: Clock> StreamDecoder<C> {
    pub fn with_clock(clock: C) -> Self {
        Self {
            clock,
            pending: Vec::with_capacity(FRAME_LEN),
            locked: true,
            held: None,
            skipped: 0,
            skipped_from: 0,
            position: 0,
        }
    }

    /// Total bytes consumed so far.
    pub fn position(&self) -> u64 {
        self.position
    }

    pub fn push(&mut self, byte: u8) -> Vec<Decoded> {
        let mut out = Vec::new();
        self.push_into(byte, &mut out);
        out
    }

    pub fn push_into(&mut self, byte: u8, out: &mut Vec<Decoded>) {
        let offset = self.position;
        self.position += 1;
        self.scan(offset, byte, out);
    }

    pub fn extend(&mut self, bytes: &[u8]) -> Vec<Decoded> {
        let mut out = Vec::new();
        for &b in bytes {
            self.push_into(b, &mut out);
        }
        out
    }

    /// Reports whatever is left over at end of stream and resets the
    /// candidate buffer.
    pub fn finish(&mut self) -> Vec<Decoded> {
        let mut out = Vec::new();
        self.flush_skipped(&mut out);
        if let Some(sample) = self.held.take() {
            self.pending.clear();
            self.release(sample, &mut out);
        }
        if let Some(&(offset, _)) = self.pending.first() {
            out.push(Decoded::Diagnostic(Diagnostic::Truncated {
                offset,
                len: self.pending.len(),
            }));
            self.pending.clear();
        }
        out
    }

    fn scan(&mut self, offset: u64, byte: u8, out: &mut Vec<Decoded>) {
        if let Some(sample) = self.held.take() {
            if is_sync_byte(byte) {
                self.pending.clear();
                self.locked = true;
                self.release(sample, out);
            } else {
                self.reject(Error::Framing("frame not followed by a sync byte"), out);
                self.scan(offset, byte, out);
                return;
            }
        }

        if self.pending.is_empty() {
            if is_sync_byte(byte) {
                self.flush_skipped(out);
                self.pending.push((offset, byte));
            } else {
                if self.skipped == 0 {
                    self.skipped_from = offset;
                }
                self.skipped += 1;
            }
            return;
        }

        self.pending.push((offset, byte));
        if self.pending.len() < FRAME_LEN {
            return;
        }

        let mut raw = [0u8; FRAME_LEN];
        for (dst, &(_, b)) in raw.iter_mut().zip(&self.pending) {
            *dst = b;
        }
        match decode_frame(&RawFrame(raw)) {
            Ok(sample) if self.locked => {
                self.pending.clear();
                self.release(sample, out);
            }
            Ok(sample) => self.held = Some(sample),
            Err(error) => self.reject(error, out),
        }
    }

    fn release(&mut self, sample: TouchSample, out: &mut Vec<Decoded>) {
        let t_ms = self.clock.now_ms();
        out.push(Decoded::Sample(sample.at(t_ms)));
    }

    /// Reports the candidate in `pending` as bad, then shifts by one byte
    /// and rescans the rest.
    fn reject(&mut self, error: Error, out: &mut Vec<Decoded>) {
        self.locked = false;
        out.push(Decoded::Diagnostic(Diagnostic::BadFrame {
            offset: self.pending[0].0,
            error,
        }));
        let rest: Vec<_> = self.pending.drain(..).skip(1).collect();
        for (o, b) in rest {
            self.scan(o, b, out);
        }
    }

    fn flush_skipped(&mut self, out: &mut Vec<Decoded>) {
        if self.skipped > 0 {
            self.locked = false;
            out.push(Decoded::Diagnostic(Diagnostic::Skipped {
                offset: self.skipped_from,
                count: self.skipped,
            }));
            self.skipped = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decode_all(bytes: &[u8]) -> Vec<Decoded> {
        let mut dec = StreamDecoder::with_clock(StepClock::new(0, 0));
        let mut out = dec.extend(bytes);
        out.extend(dec.finish());
        out
    }

    fn samples(out: &[Decoded]) -> Vec<TouchSample> {
        out.iter()
            .filter_map(|d| match d {
                Decoded::Sample(s) => Some(*s),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn encode_zero_sample() {
        let f = encode_frame(&TouchSample::new(0, 0, 0, false)).unwrap();
        assert_eq!(f.0, [0x80, 0x00, 0x00, 0x00, 0x00, 0x00]);
    }

    #[test]
    fn encode_max_sample() {
        let f = encode_frame(&TouchSample::new(6143, 6143, 255, true)).unwrap();
        assert_eq!(f.0, [0x81, 0x17, 0xFF, 0x17, 0xFF, 0xFF]);
    }

    #[test]
    fn encode_rejects_out_of_range() {
        assert!(matches!(
            encode_frame(&TouchSample::new(6144, 0, 0, true)),
            Err(Error::Range {
                what: "x",
                value: 6144,
                ..
            })
        ));
        assert!(matches!(
            encode_frame(&TouchSample::new(0, 6144, 0, true)),
            Err(Error::Range { what: "y", .. })
        ));
    }

    #[test]
    fn timestamp_not_on_wire() {
        let a = encode_frame(&TouchSample::new(10, 20, 30, true).at(999)).unwrap();
        let b = encode_frame(&TouchSample::new(10, 20, 30, true)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn decode_max_frame() {
        let s = decode_frame(&RawFrame([0x81, 0x17, 0xFF, 0x17, 0xFF, 0xFF])).unwrap();
        assert_eq!(s, TouchSample::new(6143, 6143, 255, true));
    }

    #[test]
    fn decode_errors() {
        assert!(matches!(
            decode_frame(&RawFrame([0x42, 0, 0, 0, 0, 0])),
            Err(Error::Framing(_))
        ));
        assert!(matches!(
            decode_frame(&RawFrame([0x80, 0x20, 0, 0, 0, 0])),
            Err(Error::Framing(_))
        ));
        assert!(matches!(
            decode_frame(&RawFrame([0x80, 0, 0, 0x40, 0, 0])),
            Err(Error::Framing(_))
        ));
        assert!(matches!(
            decode_frame(&RawFrame([0x80, 0x1F, 0xFF, 0x00, 0x00, 0x00])),
            Err(Error::Range {
                what: "x",
                value: 8191,
                ..
            })
        ));
    }

    #[test]
    fn clean_stream_emits_on_sixth_byte() {
        let s = TouchSample::new(1234, 4321, 77, true);
        let bytes = encode_frame(&s).unwrap().0;
        let mut dec = StreamDecoder::with_clock(StepClock::new(40, 10));
        for &b in &bytes[..5] {
            assert!(dec.push(b).is_empty());
        }
        assert_eq!(dec.push(bytes[5]), vec![Decoded::Sample(s.at(40))]);
    }

    #[test]
    fn garbage_prefix_then_frame() {
        // hand-stepped: the three zero bytes never match the sync pattern, so
        // they are reported as one skipped run once the real sync byte arrives
        let s = TouchSample::new(5000, 100, 200, true);
        let mut bytes = vec![0x00, 0x00, 0x00];
        bytes.extend(encode_frame(&s).unwrap().0);
        let out = decode_all(&bytes);
        assert_eq!(
            out,
            vec![
                Decoded::Diagnostic(Diagnostic::Skipped {
                    offset: 0,
                    count: 3
                }),
                Decoded::Sample(s),
            ]
        );
    }

    #[test]
    fn drop_byte_two_of_frame_a() {
        // frame A loses x_lo; the candidate A0 A1 A3 A4 A5 B0 fails because
        // A4 (0x34) lands in the y-high slot, then A1 A3 A4 A5 are hunted
        // past and frame B decodes cleanly
        let a = TouchSample::new(0x0102, 0x0334, 0x05, true);
        let b = TouchSample::new(2000, 3000, 90, true);
        let fa = encode_frame(&a).unwrap().0;
        let fb = encode_frame(&b).unwrap().0;
        let mut bytes: Vec<u8> = fa
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != 2)
            .map(|(_, &b)| b)
            .collect();
        bytes.extend(fb);
        let out = decode_all(&bytes);
        let bad = out
            .iter()
            .filter(|d| matches!(d, Decoded::Diagnostic(Diagnostic::BadFrame { .. })))
            .count();
        assert!(bad <= 1);
        assert_eq!(samples(&out), vec![b]);
    }

    #[test]
    fn after_corruption_frame_waits_for_next_sync() {
        let a = TouchSample::new(100, 200, 50, true);
        let b = TouchSample::new(300, 400, 60, false);
        let mut dec = StreamDecoder::with_clock(StepClock::new(0, 1));
        let mut out = dec.push(0x00);
        out.extend(dec.extend(&encode_frame(&a).unwrap().0));
        assert_eq!(
            out,
            vec![Decoded::Diagnostic(Diagnostic::Skipped {
                offset: 0,
                count: 1
            })]
        );
        let fb = encode_frame(&b).unwrap().0;
        assert_eq!(dec.push(fb[0]), vec![Decoded::Sample(a)]);
        // locked again: b goes out on its own sixth byte
        assert_eq!(dec.extend(&fb[1..]), vec![Decoded::Sample(b.at(1))]);
    }

    #[test]
    fn unconfirmed_false_frame_is_rejected() {
        // after a skipped byte, 81 00 00 00 00 05 is a valid frame but is
        // followed by 0x05, so it is discarded and the scan restarts at the
        // second byte
        let mut bytes = vec![0x11, 0x81, 0x00, 0x00, 0x00, 0x00, 0x05, 0x05];
        let real = TouchSample::new(7, 8, 9, true);
        bytes.extend(encode_frame(&real).unwrap().0);
        let out = decode_all(&bytes);
        assert_eq!(samples(&out), vec![real]);
        assert!(out.iter().any(|d| matches!(
            d,
            Decoded::Diagnostic(Diagnostic::BadFrame { offset: 1, .. })
        )));
    }

    #[test]
    fn truncated_tail_reported() {
        let bytes = &encode_frame(&TouchSample::new(1, 2, 3, true)).unwrap().0[..4];
        let out = decode_all(bytes);
        assert_eq!(
            out,
            vec![Decoded::Diagnostic(Diagnostic::Truncated {
                offset: 0,
                len: 4
            })]
        );
    }

    #[test]
    fn bad_frame_rescans_from_next_byte() {
        // 0x80 0x80 <valid frame tail>: first candidate has 0x80 in the x-high
        // slot and is rejected; the second 0x80 starts a valid frame
        let s = TouchSample::new(0x0011, 0x0022, 0x33, false);
        let frame = encode_frame(&s).unwrap().0;
        let mut bytes = vec![0x80];
        bytes.extend(frame);
        let out = decode_all(&bytes);
        assert_eq!(out.len(), 2);
        assert!(matches!(
            out[0],
            Decoded::Diagnostic(Diagnostic::BadFrame {
                offset: 0,
                error: Error::Framing(_)
            })
        ));
        assert_eq!(out[1], Decoded::Sample(s));
    }
}
