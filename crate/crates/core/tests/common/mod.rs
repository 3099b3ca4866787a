#![allow(dead_code)]

use padlight::frame_codec::{
    encode_frame, Decoded, StepClock, StreamDecoder, TouchSample, COORD_MAX,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_sample(rng: &mut impl Rng) -> TouchSample {
    TouchSample::new(
        rng.gen_range(0..=COORD_MAX),
        rng.gen_range(0..=COORD_MAX),
        rng.gen(),
        rng.gen(),
    )
}

pub fn encode_stream(samples: &[TouchSample]) -> Vec<u8> {
    samples
        .iter()
        .flat_map(|s| encode_frame(s).unwrap().0)
        .collect()
}

pub fn decoded_samples(bytes: &[u8]) -> Vec<TouchSample> {
    let mut dec = StreamDecoder::with_clock(StepClock::new(0, 0));
    let mut out = dec.extend(bytes);
    out.extend(dec.finish());
    out.into_iter()
        .filter_map(|d| match d {
            Decoded::Sample(s) => Some(s),
            Decoded::Diagnostic(_) => None,
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub enum Fault {
    Drop(usize),
    Flip(usize, u8),
    Insert(usize, u8),
}

pub fn inject(bytes: &[u8], fault: Fault) -> Vec<u8> {
    let mut v = bytes.to_vec();
    match fault {
        Fault::Drop(i) => {
            v.remove(i);
        }
        Fault::Flip(i, bit) => v[i] ^= 1 << bit,
        Fault::Insert(i, b) => v.insert(i, b),
    }
    v
}

/// Recovery check for one fault landing in frame `hit`.
///
/// Frames before the fault must come out untouched, and from frame
/// `hit + 2` on every frame must come out in order at the tail of the
/// output. Anything in between (at most two samples) is the damaged region.
pub fn recovered_within_two(frames: &[TouchSample], decoded: &[TouchSample], hit: usize) -> bool {
    let resume = (hit + 2).min(frames.len());
    let tail = &frames[resume..];
    decoded.len() >= hit + tail.len()
        && decoded.len() <= frames.len()
        && decoded[..hit] == frames[..hit]
        && decoded[decoded.len() - tail.len()..] == *tail
}
