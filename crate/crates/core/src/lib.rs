//! Context Tree Weighting and Context Tree Switching for binary sources.
//!
//! The crate is organized bottom-up:
//!
//! - [`kt`]: the Krichevsky-Trofimov estimator.
//! - [`switching`]: the switch distribution over sequences of experts.
//! - [`model`]: depth-bounded context-tree models (CTW, CTS, CTS*).
//! - [`coder`]: a 32-bit binary arithmetic coder.
//! - [`codec`]: the `CTS1` container and byte/bit pipeline.
//! - [`oracle`]: brute-force reference implementations and redundancy bounds.
//! - [`bench`]: corpus benchmark harness.
//! - [`cli`]: the command-line front end.

pub mod bench;
pub mod bitio;
pub mod cli;
pub mod codec;
pub mod coder;
pub mod kt;
pub mod logmath;
pub mod model;
pub mod oracle;
pub mod switching;

pub use codec::{compress, decompress, CodecError};
pub use model::{BitPredictor, ContextTree, ModelConfig, Variant};
