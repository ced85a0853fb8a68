//! Container format and the byte-to-bit pipeline.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "CTS1"
//! 4       1     variant (0 = ctw, 1 = cts, 2 = cts-star)
//! 5       2     depth D, little endian
//! 7       8     original length in bytes, little endian
//! 15      ..    arithmetic-coded payload
//! ```
//!
//! Bits are taken MSB-first from each byte. The model history starts as
//! `D` zero bits on both sides, so every input bit is coded.
//!
//! `ctw` and `cts` model the flat bit stream with a single context tree.
//! `cts-star` codes each byte as eight binary decisions along a binary
//! tree of within-byte prefixes, with one context tree per prefix (255 in
//! all). Each of those trees is conditioned on the bits of the preceding
//! bytes only; the current byte's earlier bits are implied by which tree
//! is active.

use crate::coder::{CoderError, Decoder, Encoder};
use crate::model::{BitHistory, BitPredictor, ContextTree, ModelConfig, ModelError, Variant};
use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"CTS1";
pub const HEADER_LEN: usize = 15;

#[derive(Debug, Error, PartialEq)]
pub enum CodecError {
    #[error("not a CTS1 container (bad magic)")]
    BadMagic,
    #[error("unsupported model variant code {0}")]
    UnsupportedVariant(u8),
    #[error("container header is truncated")]
    TruncatedHeader,
    #[error("payload is truncated")]
    TruncatedPayload,
    #[error("payload has {0} unexpected trailing bits")]
    TrailingData(u64),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("coder failure: {0}")]
    Coder(CoderError),
}

impl From<CoderError> for CodecError {
    fn from(e: CoderError) -> Self {
        match e {
            CoderError::TruncatedStream => CodecError::TruncatedPayload,
            CoderError::TrailingData(n) => CodecError::TrailingData(n),
            other => CodecError::Coder(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContainerHeader {
    pub variant: Variant,
    pub depth: u16,
    pub original_len: u64,
}

impl ContainerHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[..4].copy_from_slice(&MAGIC);
        out[4] = self.variant.code();
        out[5..7].copy_from_slice(&self.depth.to_le_bytes());
        out[7..15].copy_from_slice(&self.original_len.to_le_bytes());
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, CodecError> {
        if bytes.len() >= 4 && bytes[..4] != MAGIC {
            return Err(CodecError::BadMagic);
        }
        if bytes.len() < HEADER_LEN {
            return Err(CodecError::TruncatedHeader);
        }
        let variant = Variant::from_code(bytes[4]).ok_or(CodecError::UnsupportedVariant(bytes[4]))?;
        let depth = u16::from_le_bytes([bytes[5], bytes[6]]);
        let original_len = u64::from_le_bytes(bytes[7..15].try_into().expect("8-byte slice"));
        Ok(Self {
            variant,
            depth,
            original_len,
        })
    }

    pub fn config(&self) -> Result<ModelConfig, ModelError> {
        ModelConfig::new(self.variant, self.depth as usize)
    }
}

/// One context tree per within-byte bit prefix, all conditioned on the
/// history of complete preceding bytes.
#[derive(Debug, Clone)]
pub struct ByteDecomposition {
    trees: Vec<ContextTree>,
    history: BitHistory,
    /// Position in the prefix tree: 1 at a byte boundary, then 2p + bit.
    prefix: usize,
}

impl ByteDecomposition {
    pub fn new(config: ModelConfig) -> Self {
        Self {
            trees: (0..255).map(|_| ContextTree::new(config)).collect(),
            history: BitHistory::new(config.depth()),
            prefix: 1,
        }
    }

    /// The tree for prefix node `p` (1 = empty prefix, 2..3 = one bit
    /// seen, ..., 128..255 = seven bits seen).
    pub fn tree(&self, prefix: usize) -> &ContextTree {
        &self.trees[prefix - 1]
    }

    pub fn log_prob(&self) -> f64 {
        self.trees.iter().map(ContextTree::log_prob).sum()
    }

    pub fn node_count(&self) -> usize {
        self.trees.iter().map(ContextTree::node_count).sum()
    }
}

impl BitPredictor for ByteDecomposition {
    fn p_one(&mut self) -> f64 {
        self.trees[self.prefix - 1].p_one_in(&self.history)
    }

    fn update(&mut self, bit: u8) {
        self.trees[self.prefix - 1].update_in(&self.history, bit);
        self.prefix = (self.prefix << 1) | bit as usize;
        if self.prefix >= 256 {
            let byte = (self.prefix - 256) as u8;
            for i in (0..8).rev() {
                self.history.push((byte >> i) & 1);
            }
            self.prefix = 1;
        }
    }
}

/// The bit model used for a given configuration.
#[derive(Debug, Clone)]
pub enum StreamModel {
    Flat(ContextTree),
    Decomposed(Box<ByteDecomposition>),
}

impl StreamModel {
    pub fn new(config: ModelConfig) -> Self {
        match config.variant() {
            Variant::CtsStar => StreamModel::Decomposed(Box::new(ByteDecomposition::new(config))),
            Variant::Ctw | Variant::Cts => StreamModel::Flat(ContextTree::new(config)),
        }
    }

    /// log₂ probability the model assigned to everything seen so far.
    pub fn log_prob(&self) -> f64 {
        match self {
            StreamModel::Flat(t) => t.log_prob(),
            StreamModel::Decomposed(d) => d.log_prob(),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            StreamModel::Flat(t) => t.node_count(),
            StreamModel::Decomposed(d) => d.node_count(),
        }
    }

    /// Feeds a whole byte string without coding it.
    pub fn observe_bytes(&mut self, bytes: &[u8]) {
        for &byte in bytes {
            for i in (0..8).rev() {
                let bit = (byte >> i) & 1;
                self.update(bit);
            }
        }
    }
}

impl BitPredictor for StreamModel {
    #[inline]
    fn p_one(&mut self) -> f64 {
        match self {
            StreamModel::Flat(t) => t.p_one(),
            StreamModel::Decomposed(d) => d.p_one(),
        }
    }

    #[inline]
    fn update(&mut self, bit: u8) {
        match self {
            StreamModel::Flat(t) => t.update(bit),
            StreamModel::Decomposed(d) => d.update(bit),
        }
    }
}

/// Code length bookkeeping for one compression run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressionReport {
    /// Arithmetic-coded payload length in bits, before byte padding.
    pub payload_bits: u64,
    /// log₂ of the model probability of the input.
    pub model_log_prob: f64,
    /// Nodes allocated by the model.
    pub nodes: usize,
}

pub fn compress(input: &[u8], config: &ModelConfig) -> Vec<u8> {
    compress_with_report(input, config).0
}

pub fn compress_with_report(input: &[u8], config: &ModelConfig) -> (Vec<u8>, CompressionReport) {
    let header = ContainerHeader {
        variant: config.variant(),
        depth: u16::try_from(config.depth()).expect("ModelConfig bounds the depth"),
        original_len: input.len() as u64,
    };
    let mut model = StreamModel::new(*config);
    let mut enc = Encoder::new();
    for &byte in input {
        for i in (0..8).rev() {
            let bit = (byte >> i) & 1;
            let p = model.p_one();
            enc.encode(bit, p).expect("context-tree probabilities are finite");
            model.update(bit);
        }
    }
    let payload = enc.finish();
    let report = CompressionReport {
        payload_bits: payload.bits,
        model_log_prob: model.log_prob(),
        nodes: model.node_count(),
    };
    let mut out = Vec::with_capacity(HEADER_LEN + payload.bytes.len());
    out.extend_from_slice(&header.to_bytes());
    out.extend_from_slice(&payload.bytes);
    (out, report)
}

pub fn decompress(stream: &[u8]) -> Result<Vec<u8>, CodecError> {
    let header = ContainerHeader::parse(stream)?;
    let config = header.config()?;
    let mut model = StreamModel::new(config);
    let mut dec = Decoder::new(&stream[HEADER_LEN..]);
    let len = usize::try_from(header.original_len).map_err(|_| CodecError::TruncatedPayload)?;
    let mut out = Vec::with_capacity(len.min(1 << 26));
    for _ in 0..len {
        let mut byte = 0u8;
        for _ in 0..8 {
            let p = model.p_one();
            let bit = dec.decode(p)?;
            model.update(bit);
            byte = (byte << 1) | bit;
        }
        out.push(byte);
    }
    dec.finish()?;
    Ok(out)
}
