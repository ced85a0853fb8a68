//! Binary arithmetic coder with 32-bit registers.
//!
//! Classic interval coder: bits are emitted MSB-first as soon as the
//! interval settles into one half, and intervals straddling the midpoint
//! inside the middle half are expanded while counting pending bits.
//! Termination writes the shortest bit string whose dyadic interval lies
//! inside the final interval, so the total length `l` satisfies
//! `l ≤ ⌈−log₂ P⌉ + 1` for the coded probability `P`.
//!
//! The stream carries no end marker. The decoder mirrors the encoder's
//! interval trajectory exactly, so once the caller has decoded the framed
//! number of symbols it can compute how long the payload must be and
//! reject truncated or padded streams.

use crate::bitio::{BitReader, BitWriter};
use crate::model::BitPredictor;
use thiserror::Error;

const FULL: u64 = 0xFFFF_FFFF;
const HALF: u64 = 1 << 31;
const QUARTER: u64 = 1 << 30;
const THREE_QUARTERS: u64 = 3 << 30;

/// Probabilities are clamped to `[MIN_PROB, 1 − MIN_PROB]` before coding.
pub const MIN_PROB: f64 = 1.0 / (1u64 << 20) as f64;

#[derive(Debug, Error, PartialEq)]
pub enum CoderError {
    #[error("probability {0} is not a finite number")]
    NonFiniteProbability(f64),
    #[error("payload is truncated")]
    TruncatedStream,
    #[error("payload has {0} unexpected trailing bits")]
    TrailingData(u64),
}

#[inline]
fn clamp_probability(p_one: f64) -> Result<f64, CoderError> {
    if !p_one.is_finite() {
        return Err(CoderError::NonFiniteProbability(p_one));
    }
    Ok(p_one.clamp(MIN_PROB, 1.0 - MIN_PROB))
}

/// Width of the zero sub-interval for an interval of `range` values.
#[inline]
fn zero_width(range: u64, p_one: f64) -> u64 {
    let r0 = (range as f64 * (1.0 - p_one)) as u64;
    r0.clamp(1, range - 1)
}

/// Termination bits for the interval `[low, high]` with `pending`
/// outstanding straddle bits: the shortest `t`-bit prefix `j` whose
/// dyadic interval fits inside.
fn termination(low: u64, high: u64, pending: u64) -> (u32, u64) {
    if pending == 0 && low == 0 && high == FULL {
        return (0, 0);
    }
    for t in 1..=2u32 {
        let width = 1u64 << (32 - t);
        for j in 0..(1u64 << t) {
            let lo = j * width;
            if lo >= low && lo + width - 1 <= high {
                return (t, j);
            }
        }
    }
    unreachable!("renormalized interval always contains a quarter")
}

/// Output of a finished encoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedPayload {
    pub bytes: Vec<u8>,
    /// Code length in bits before padding to whole bytes.
    pub bits: u64,
}

#[derive(Debug, Clone)]
pub struct Encoder {
    low: u64,
    high: u64,
    pending: u64,
    out: BitWriter,
}

impl Default for Encoder {
    fn default() -> Self {
        Self::new()
    }
}

impl Encoder {
    pub fn new() -> Self {
        Self {
            low: 0,
            high: FULL,
            pending: 0,
            out: BitWriter::new(),
        }
    }

    /// Current `(low, high)` registers.
    pub fn state(&self) -> (u64, u64) {
        (self.low, self.high)
    }

    pub fn pending_bits(&self) -> u64 {
        self.pending
    }

    pub fn bits_written(&self) -> u64 {
        self.out.bits_written()
    }

    #[inline]
    fn emit(&mut self, bit: u8) {
        self.out.push(bit);
        self.out.push_repeat(bit ^ 1, self.pending);
        self.pending = 0;
    }

    /// Encodes `bit` given the model's probability that it is a one.
    #[inline]
    pub fn encode(&mut self, bit: u8, p_one: f64) -> Result<(), CoderError> {
        let p_one = clamp_probability(p_one)?;
        let range = self.high - self.low + 1;
        let r0 = zero_width(range, p_one);
        if bit == 0 {
            self.high = self.low + r0 - 1;
        } else {
            self.low += r0;
        }
        loop {
            if self.high < HALF {
                self.emit(0);
            } else if self.low >= HALF {
                self.emit(1);
                self.low -= HALF;
                self.high -= HALF;
            } else if self.low >= QUARTER && self.high < THREE_QUARTERS {
                self.pending += 1;
                self.low -= QUARTER;
                self.high -= QUARTER;
            } else {
                break;
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
        }
        Ok(())
    }

    /// Writes the termination bits and returns the payload.
    pub fn finish(mut self) -> EncodedPayload {
        let (t, j) = termination(self.low, self.high, self.pending);
        for i in (0..t).rev() {
            let bit = ((j >> i) & 1) as u8;
            if i == t - 1 {
                self.emit(bit);
            } else {
                self.out.push(bit);
            }
        }
        let bits = self.out.bits_written();
        EncodedPayload {
            bytes: self.out.finish(),
            bits,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Decoder<'a> {
    low: u64,
    high: u64,
    value: u64,
    /// Encoder-side pending count, mirrored to predict the termination.
    pending: u64,
    /// Interval doublings so far; the encoder emits one bit for each.
    doublings: u64,
    input: BitReader<'a>,
}

impl<'a> Decoder<'a> {
    pub fn new(payload: &'a [u8]) -> Self {
        let mut input = BitReader::new(payload);
        let mut value = 0u64;
        for _ in 0..32 {
            value = (value << 1) | input.next_bit() as u64;
        }
        Self {
            low: 0,
            high: FULL,
            value,
            pending: 0,
            doublings: 0,
            input,
        }
    }

    pub fn state(&self) -> (u64, u64) {
        (self.low, self.high)
    }

    /// Decodes one bit given the model's probability that it is a one.
    #[inline]
    pub fn decode(&mut self, p_one: f64) -> Result<u8, CoderError> {
        let p_one = clamp_probability(p_one)?;
        let range = self.high - self.low + 1;
        let r0 = zero_width(range, p_one);
        let split = self.low + r0;
        let bit = if self.value < split {
            self.high = split - 1;
            0
        } else {
            self.low = split;
            1
        };
        loop {
            if self.high < HALF {
                self.pending = 0;
            } else if self.low >= HALF {
                self.pending = 0;
                self.low -= HALF;
                self.high -= HALF;
                self.value -= HALF;
            } else if self.low >= QUARTER && self.high < THREE_QUARTERS {
                self.pending += 1;
                self.low -= QUARTER;
                self.high -= QUARTER;
                self.value -= QUARTER;
            } else {
                break;
            }
            self.low <<= 1;
            self.high = (self.high << 1) | 1;
            self.value = (self.value << 1) | self.input.next_bit() as u64;
            self.doublings += 1;
        }
        // A valid payload holds at least one bit per doubling, so the
        // 32-bit lookahead is the most that may be read past its end.
        if self.input.overrun() > 32 {
            return Err(CoderError::TruncatedStream);
        }
        Ok(bit)
    }

    /// Number of payload bits the encoder must have produced, given that
    /// every symbol has now been decoded.
    pub fn expected_bits(&self) -> u64 {
        let (t, _) = termination(self.low, self.high, self.pending);
        self.doublings + t as u64
    }

    /// Checks that the payload length matches what the encoder would have
    /// written for the decoded symbols.
    pub fn finish(self) -> Result<(), CoderError> {
        let expected = self.expected_bits();
        let available = self.input.len_bits();
        let expected_padded = expected.div_ceil(8) * 8;
        if available < expected_padded {
            return Err(CoderError::TruncatedStream);
        }
        if available > expected_padded {
            return Err(CoderError::TrailingData(available - expected));
        }
        let data = self.input.data();
        if expected < available {
            let last = data[data.len() - 1];
            let pad = (available - expected) as u32;
            if last & ((1u16 << pad) - 1) as u8 != 0 {
                return Err(CoderError::TrailingData(available - expected));
            }
        }
        Ok(())
    }
}

/// Encodes a bit sequence with an adaptive model.
pub fn encode_bits<M: BitPredictor>(model: &mut M, bits: &[u8]) -> Result<EncodedPayload, CoderError> {
    let mut enc = Encoder::new();
    for &bit in bits {
        let p = model.p_one();
        enc.encode(bit, p)?;
        model.update(bit);
    }
    Ok(enc.finish())
}

/// Decodes `count` bits with an adaptive model and validates the payload
/// length.
pub fn decode_bits<M: BitPredictor>(model: &mut M, payload: &[u8], count: usize) -> Result<Vec<u8>, CoderError> {
    let mut dec = Decoder::new(payload);
    let mut bits = Vec::with_capacity(count.min(1 << 24));
    for _ in 0..count {
        let p = model.p_one();
        let bit = dec.decode(p)?;
        model.update(bit);
        bits.push(bit);
    }
    dec.finish()?;
    Ok(bits)
}
