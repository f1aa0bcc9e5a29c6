//! Bit-string conventions shared by every layer.
//!
//! A basis state over `n` variables is printed left to right as
//! `z_0 z_1 … z_{n-1}`, and its basis index is `Σ z_i · 2^(n-1-i)`: variable
//! 0 is the most significant bit. With this convention the printed string
//! reads positionally as vertex 0, 1, 2, … and lexicographic order on
//! equal-length strings matches numeric order on indices.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BitStringError {
    #[error("invalid character {0:?} in bit string")]
    InvalidCharacter(char),
    #[error("bit string of length {0} exceeds 64 positions")]
    TooLong(usize),
}

/// Bit `i` of the basis state with the given index.
#[inline]
pub fn bit(index: usize, position: usize, len: usize) -> bool {
    index >> (len - 1 - position) & 1 == 1
}

pub fn index_to_bits(index: usize, len: usize) -> Vec<bool> {
    (0..len).map(|i| bit(index, i, len)).collect()
}

pub fn bits_to_index(bits: &[bool]) -> usize {
    bits.iter().fold(0, |acc, &b| acc << 1 | usize::from(b))
}

pub fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn format_index(index: usize, len: usize) -> String {
    (0..len)
        .map(|i| if bit(index, i, len) { '1' } else { '0' })
        .collect()
}

pub fn parse_bits(text: &str) -> Result<Vec<bool>, BitStringError> {
    let bits = text
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(BitStringError::InvalidCharacter(other)),
        })
        .collect::<Result<Vec<_>, _>>()?;
    if bits.len() > 64 {
        return Err(BitStringError::TooLong(bits.len()));
    }
    Ok(bits)
}
