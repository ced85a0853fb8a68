//! MSB-first bit packing.

#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    bytes: Vec<u8>,
    acc: u8,
    filled: u8,
    written: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, bit: u8) {
        self.acc = (self.acc << 1) | (bit & 1);
        self.filled += 1;
        self.written += 1;
        if self.filled == 8 {
            self.bytes.push(self.acc);
            self.acc = 0;
            self.filled = 0;
        }
    }

    pub fn push_repeat(&mut self, bit: u8, count: u64) {
        for _ in 0..count {
            self.push(bit);
        }
    }

    pub fn bits_written(&self) -> u64 {
        self.written
    }

    /// Pads the final byte with zeros.
    pub fn finish(mut self) -> Vec<u8> {
        if self.filled > 0 {
            self.bytes.push(self.acc << (8 - self.filled));
        }
        self.bytes
    }
}

/// Reads bits MSB-first; past the end it yields zeros and counts how many
/// it made up.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    data: &'a [u8],
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    #[inline]
    pub fn next_bit(&mut self) -> u8 {
        let byte = (self.pos / 8) as usize;
        let bit = match self.data.get(byte) {
            Some(&b) => (b >> (7 - (self.pos % 8))) & 1,
            None => 0,
        };
        self.pos += 1;
        bit
    }

    /// Bits consumed so far, including made-up ones.
    pub fn position(&self) -> u64 {
        self.pos
    }

    /// Number of bits actually available.
    pub fn len_bits(&self) -> u64 {
        self.data.len() as u64 * 8
    }

    /// Bits read past the end of the data.
    pub fn overrun(&self) -> u64 {
        self.pos.saturating_sub(self.len_bits())
    }

    pub fn data(&self) -> &'a [u8] {
        self.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn msb_first_packing() {
        let mut w = BitWriter::new();
        for b in [1, 0, 1, 1, 0, 0, 0, 0, 1] {
            w.push(b);
        }
        assert_eq!(w.bits_written(), 9);
        assert_eq!(w.finish(), vec![0b1011_0000, 0b1000_0000]);
    }

    #[test]
    fn reader_pads_with_zeros() {
        let mut r = BitReader::new(&[0xff]);
        for _ in 0..8 {
            assert_eq!(r.next_bit(), 1);
        }
        assert_eq!(r.overrun(), 0);
        assert_eq!(r.next_bit(), 0);
        assert_eq!(r.overrun(), 1);
    }

    proptest! {
        #[test]
        fn write_then_read(bits in proptest::collection::vec(0u8..2, 0..200)) {
            let mut w = BitWriter::new();
            for &b in &bits { w.push(b); }
            let bytes = w.finish();
            prop_assert_eq!(bytes.len(), bits.len().div_ceil(8));
            let mut r = BitReader::new(&bytes);
            for &b in &bits { prop_assert_eq!(r.next_bit(), b); }
        }
    }
}
