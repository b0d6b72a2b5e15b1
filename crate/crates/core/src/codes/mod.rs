//! Code constructions: Tunstall parse dictionaries (variable-to-fixed) and
//! block Huffman codes (fixed-to-variable), plus the length statistics the
//! queueing analysis consumes.

mod huffman;
mod tunstall;

pub use huffman::{BlockCode, DEFAULT_BLOCK_CAP};
pub use tunstall::ParseDictionary;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stats::{kahan_sum, KahanSum};

/// Distribution of an integer length (block length B or codeword length L)
/// together with its first two moments.
#[derive(Debug, Clone, PartialEq)]
pub struct LengthPmf<F> {
    support: Vec<(u32, F)>,
    mean: F,
    second_moment: F,
    variance: F,
    min_value: u32,
    max_value: u32,
}

impl<F: Real> LengthPmf<F> {
    /// Build from `(value, probability)` pairs. Values must be positive and
    /// distinct; probabilities positive and summing to one.
    pub fn from_support(mut support: Vec<(u32, F)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidPmf("length pmf has empty support".into()));
        }
        support.sort_by_key(|&(v, _)| v);
        for window in support.windows(2) {
            if window[0].0 == window[1].0 {
                return Err(Error::InvalidPmf(format!(
                    "duplicate length value {}",
                    window[0].0
                )));
            }
        }
        let mut total = KahanSum::new();
        for &(v, p) in &support {
            if v == 0 {
                return Err(Error::InvalidPmf("length values must be positive".into()));
            }
            if !(p > F::zero()) || !p.is_finite() {
                return Err(Error::InvalidPmf(format!(
                    "probability of length {v} must be strictly positive, got {p}"
                )));
            }
            total.add(p);
        }
        if (total.value() - F::one()).abs() > F::prob_tol() {
            return Err(Error::InvalidPmf(format!(
                "length probabilities sum to {}, expected 1",
                total.value()
            )));
        }

        let mean = kahan_sum(support.iter().map(|&(v, p)| p * F::from_u32(v).unwrap()));
        let second_moment = kahan_sum(
            support
                .iter()
                .map(|&(v, p)| p * F::from_u32(v).unwrap() * F::from_u32(v).unwrap()),
        );
        // computed about the mean so it can never go negative
        let variance = kahan_sum(support.iter().map(|&(v, p)| {
            let d = F::from_u32(v).unwrap() - mean;
            p * d * d
        }))
        .max(F::zero());

        Ok(Self {
            min_value: support.first().unwrap().0,
            max_value: support.last().unwrap().0,
            support,
            mean,
            second_moment,
            variance,
        })
    }

    /// Distribution that puts all mass on a single length.
    pub fn deterministic(value: u32) -> Self {
        Self::from_support(vec![(value, F::one())]).expect("single atom is a valid pmf")
    }

    /// Support as `(value, probability)` pairs in increasing value order.
    pub fn support(&self) -> &[(u32, F)] {
        &self.support
    }

    pub fn mean(&self) -> F {
        self.mean
    }

    pub fn second_moment(&self) -> F {
        self.second_moment
    }

    pub fn variance(&self) -> F {
        self.variance
    }

    pub fn min_value(&self) -> u32 {
        self.min_value
    }

    pub fn max_value(&self) -> u32 {
        self.max_value
    }
}

/// Result of encoding a symbol stream.
///
/// `bits` is the concatenation of the emitted codewords; `block_sizes[i]`
/// and `codeword_bits[i]` describe the i-th codeword. A trailing partial
/// block (input exhausted mid-parse) is reported via `trailing_symbols` and
/// excluded from the bit stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedStream {
    pub bits: Vec<bool>,
    pub block_sizes: Vec<u32>,
    pub codeword_bits: Vec<u32>,
    pub trailing_symbols: usize,
}

impl EncodedStream {
    pub(crate) fn new() -> Self {
        Self {
            bits: Vec::new(),
            block_sizes: Vec::new(),
            codeword_bits: Vec::new(),
            trailing_symbols: 0,
        }
    }

    /// Number of complete codewords in the stream.
    pub fn n_blocks(&self) -> usize {
        self.block_sizes.len()
    }
}

pub(crate) fn bits_to_string(bits: impl Iterator<Item = bool>) -> String {
    bits.map(|b| if b { '1' } else { '0' }).collect()
}
