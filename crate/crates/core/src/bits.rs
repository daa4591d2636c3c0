//! Bit-string newtypes for sifted-key blocks and syndromes.
//!
//! Bits are stored one per byte (`0` or `1`); blocks are a few thousand bits
//! and the decoder indexes them constantly, so packing buys nothing.

use crate::error::{Error, Result};

macro_rules! bit_string {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
        pub struct $name(Vec<u8>);

        impl $name {
            /// Wraps a vector of 0/1 values. Any other byte value is rejected.
            pub fn from_bits(bits: Vec<u8>) -> Result<Self> {
                if let Some(pos) = bits.iter().position(|&b| b > 1) {
                    return Err(Error::invalid(format!("bit {pos} is not 0 or 1")));
                }
                Ok($name(bits))
            }

            pub fn zeros(len: usize) -> Self {
                $name(vec![0; len])
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn bits(&self) -> &[u8] {
                &self.0
            }

            pub fn into_bits(self) -> Vec<u8> {
                self.0
            }

            pub fn weight(&self) -> usize {
                self.0.iter().map(|&b| b as usize).sum()
            }

            /// Bitwise XOR. Panics if the lengths differ.
            pub fn xor(&self, other: &Self) -> Self {
                assert_eq!(self.len(), other.len(), "xor of unequal lengths");
                $name(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect())
            }

            /// Number of positions where the two strings differ.
            pub fn hamming_distance(&self, other: &Self) -> usize {
                self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
            }

            /// Parses a string of ASCII `0`/`1` characters.
            pub fn parse_ascii(text: &str) -> Result<Self> {
                text.bytes()
                    .enumerate()
                    .map(|(i, ch)| match ch {
                        b'0' => Ok(0),
                        b'1' => Ok(1),
                        _ => Err(Error::parse(1, format!("invalid bit character at column {}", i + 1))),
                    })
                    .collect::<Result<Vec<u8>>>()
                    .map($name)
            }

            pub fn to_ascii(&self) -> String {
                self.0.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect()
            }
        }
    };
}

bit_string!(
    /// A block of sifted key bits encoded against one effective matrix.
    KeyBlock
);
bit_string!(
    /// The `m` parity bits disclosed over the classical channel.
    Syndrome
);

/// Reads one block per non-empty line, each exactly `width` bits long.
pub fn parse_blocks(text: &str, width: usize) -> Result<Vec<KeyBlock>> {
    let mut blocks = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let block = KeyBlock::parse_ascii(line).map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(idx + 1, message),
            other => other,
        })?;
        if block.len() != width {
            return Err(Error::parse(
                idx + 1,
                format!("block has {} bits, expected {width}", block.len()),
            ));
        }
        blocks.push(block);
    }
    Ok(blocks)
}

pub fn format_blocks<'a>(blocks: impl IntoIterator<Item = &'a KeyBlock>) -> String {
    let mut out = String::new();
    for b in blocks {
        out.push_str(&b.to_ascii());
        out.push('\n');
    }
    out
}
