//! Rate-adaptive LDPC syndrome reconciliation for QKD post-processing.
//!
//! One fixed mother parity-check matrix is built by progressive edge growth;
//! the rate is adapted by encoding only its leftmost columns. The crate covers
//! matrix construction and girth analysis ([`tanner`]), syndrome encoding and
//! belief-propagation decoding ([`codec`]), rate and efficiency metrics with
//! the width-selection table ([`adapt`]), Monte-Carlo characterization of that
//! table ([`charact`]), and a fiber-link simulation driving it ([`qkdsim`]).

pub mod adapt;
pub mod bits;
pub mod charact;
pub mod codec;
mod error;
pub mod manifest;
pub mod qkdsim;
pub mod seed;
pub mod tanner;

pub use bits::{KeyBlock, Syndrome};
pub use error::{Error, Result};
