//! Block Huffman codes: fixed-length symbol blocks mapped to prefix-free
//! variable-length codewords.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, BTreeMap};
use std::fmt::Write as _;

use crate::codes::{EncodedStream, LengthPmf};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::source::SymbolPmf;
use crate::stats::KahanSum;

/// Default cap on `|alphabet|^b`, the number of codewords a block code may
/// have to enumerate.
pub const DEFAULT_BLOCK_CAP: usize = 1 << 20;

const EMPTY: u32 = u32::MAX;
const LEAF_TAG: u32 = 1 << 31;

struct HeapEntry<F> {
    prob: F,
    created: u32,
    id: u32,
}

impl<F: Real> PartialEq for HeapEntry<F> {
    fn eq(&self, other: &Self) -> bool {
        self.prob == other.prob && self.created == other.created
    }
}

impl<F: Real> Eq for HeapEntry<F> {}

impl<F: Real> Ord for HeapEntry<F> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.prob
            .partial_cmp(&other.prob)
            .expect("block probabilities are finite")
            .then_with(|| self.created.cmp(&other.created))
    }
}

impl<F: Real> PartialOrd for HeapEntry<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A fixed-to-variable code: one prefix-free codeword per `b`-symbol block.
///
/// The Huffman merge is made deterministic by always combining the two
/// nodes with the smallest `(probability, creation index)`; blocks are
/// numbered in lexicographic order and merged nodes in creation order.
/// Codewords are assigned canonically from the resulting lengths, so only
/// the length multiset depends on the merge order.
#[derive(Debug, Clone)]
pub struct BlockCode<F> {
    block_len: u32,
    alphabet: usize,
    /// Product-distribution probability of each block, lexicographic order.
    probs: Vec<F>,
    lengths: Vec<u8>,
    /// Canonical codewords, MSB first within the low `lengths[i]` bits.
    codes: Vec<u64>,
    trie: Vec<[u32; 2]>,
}

impl<F: Real> BlockCode<F> {
    /// Build with the default block-space cap.
    pub fn build(pmf: &SymbolPmf<F>, block_len: u32) -> Result<Self> {
        Self::build_with_cap(pmf, block_len, DEFAULT_BLOCK_CAP)
    }

    pub fn build_with_cap(pmf: &SymbolPmf<F>, block_len: u32, cap: usize) -> Result<Self> {
        if block_len == 0 {
            return Err(Error::InvalidParameter(
                "block length must be at least 1".into(),
            ));
        }
        let m = pmf.alphabet_size();
        let n_blocks_wide = (m as u128)
            .checked_pow(block_len)
            .unwrap_or(u128::MAX);
        if n_blocks_wide > cap as u128 {
            return Err(Error::BlockSpaceExceeded {
                blocks: n_blocks_wide,
                cap: cap as u128,
            });
        }
        let n = n_blocks_wide as usize;

        // product distribution over blocks, built one position at a time
        let mut probs = vec![F::one()];
        for _ in 0..block_len {
            let mut next = Vec::with_capacity(probs.len() * m);
            for &pre in &probs {
                for &p in pmf.probs() {
                    next.push(pre * p);
                }
            }
            probs = next;
        }
        debug_assert_eq!(probs.len(), n);

        let lengths = huffman_lengths(&probs)?;
        let codes = canonical_codes(&lengths);
        let trie = build_trie(&lengths, &codes);

        Ok(Self {
            block_len,
            alphabet: m,
            probs,
            lengths,
            codes,
            trie,
        })
    }

    /// Input block length in symbols.
    pub fn block_len(&self) -> u32 {
        self.block_len
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    pub fn n_codewords(&self) -> usize {
        self.lengths.len()
    }

    /// Lexicographic index of a block of exactly `block_len` symbols.
    pub fn block_index(&self, block: &[u16]) -> Result<usize> {
        if block.len() != self.block_len as usize {
            return Err(Error::InvalidParameter(format!(
                "block has {} symbols, expected {}",
                block.len(),
                self.block_len
            )));
        }
        let mut idx = 0usize;
        for &sym in block {
            if (sym as usize) >= self.alphabet {
                return Err(Error::InvalidParameter(format!(
                    "symbol index {sym} outside alphabet of size {}",
                    self.alphabet
                )));
            }
            idx = idx * self.alphabet + sym as usize;
        }
        Ok(idx)
    }

    /// Codeword length in bits for the block with the given index.
    pub fn length_of(&self, block_index: usize) -> u32 {
        self.lengths[block_index] as u32
    }

    pub fn prob_of(&self, block_index: usize) -> F {
        self.probs[block_index]
    }

    /// Exact Kraft completeness check, `sum 2^-len == 1` in integer
    /// arithmetic.
    pub fn kraft_is_complete(&self) -> bool {
        let max_len = *self.lengths.iter().max().expect("nonempty code") as u32;
        let total: u128 = self
            .lengths
            .iter()
            .map(|&l| 1u128 << (max_len - l as u32))
            .sum();
        total == 1u128 << max_len
    }

    /// Distribution of the codeword length L under the source.
    pub fn codeword_length_pmf(&self) -> LengthPmf<F> {
        let mut by_len: BTreeMap<u32, KahanSum<F>> = BTreeMap::new();
        for (i, &l) in self.lengths.iter().enumerate() {
            by_len.entry(l as u32).or_default().add(self.probs[i]);
        }
        let support = by_len
            .into_iter()
            .map(|(len, sum)| (len, sum.value()))
            .collect();
        LengthPmf::from_support(support).expect("block probabilities form a valid pmf")
    }

    /// Average coded bits per source symbol, `E[L] / b`.
    pub fn code_rate(&self) -> F {
        self.codeword_length_pmf().mean() / F::from_u32(self.block_len).unwrap()
    }

    /// Encode consecutive `b`-symbol blocks; a trailing partial block is
    /// reported, not encoded.
    pub fn encode_stream(&self, symbols: &[u16]) -> Result<EncodedStream> {
        let b = self.block_len as usize;
        let mut out = EncodedStream::new();
        let mut chunks = symbols.chunks_exact(b);
        for block in &mut chunks {
            let idx = self.block_index(block)?;
            let len = self.lengths[idx] as u32;
            let code = self.codes[idx];
            for j in (0..len).rev() {
                out.bits.push((code >> j) & 1 == 1);
            }
            out.block_sizes.push(self.block_len);
            out.codeword_bits.push(len);
        }
        out.trailing_symbols = chunks.remainder().len();
        Ok(out)
    }

    /// Invert a concatenation of codewords by walking the prefix trie.
    pub fn decode_stream(&self, bits: &[bool]) -> Result<Vec<u16>> {
        let mut symbols = Vec::new();
        let mut node = 0u32;
        for &bit in bits {
            let arc = self.trie[node as usize][bit as usize];
            if arc == EMPTY {
                return Err(Error::Decode("bit pattern is not a valid codeword".into()));
            }
            if arc & LEAF_TAG != 0 {
                self.push_block_symbols((arc & !LEAF_TAG) as usize, &mut symbols);
                node = 0;
            } else {
                node = arc;
            }
        }
        if node != 0 {
            return Err(Error::Decode("bit stream ends inside a codeword".into()));
        }
        Ok(symbols)
    }

    fn push_block_symbols(&self, mut idx: usize, out: &mut Vec<u16>) {
        let b = self.block_len as usize;
        let start = out.len();
        out.resize(start + b, 0);
        for j in (0..b).rev() {
            out[start + j] = (idx % self.alphabet) as u16;
            idx /= self.alphabet;
        }
    }

    /// Debug dump, one `symbol.string<TAB>codeword` line per block.
    pub fn to_debug_table(&self) -> String {
        let mut out = String::new();
        let mut block = Vec::new();
        for idx in 0..self.n_codewords() {
            block.clear();
            self.push_block_symbols(idx, &mut block);
            let path_str = block
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(".");
            let len = self.lengths[idx] as u32;
            let code = self.codes[idx];
            let mut word = String::new();
            for j in (0..len).rev() {
                word.push(if (code >> j) & 1 == 1 { '1' } else { '0' });
            }
            let _ = writeln!(out, "{path_str}\t{word}");
        }
        out
    }
}

/// Deterministic Huffman codeword lengths for the given probabilities.
fn huffman_lengths<F: Real>(probs: &[F]) -> Result<Vec<u8>> {
    let n = probs.len();
    debug_assert!(n >= 2);
    let mut heap: BinaryHeap<Reverse<HeapEntry<F>>> = BinaryHeap::with_capacity(n);
    for (i, &p) in probs.iter().enumerate() {
        heap.push(Reverse(HeapEntry {
            prob: p,
            created: i as u32,
            id: i as u32,
        }));
    }
    // children of merged nodes; merged ids start at n
    let mut children: Vec<(u32, u32)> = Vec::with_capacity(n - 1);
    let mut next_id = n as u32;
    while heap.len() > 1 {
        let a = heap.pop().unwrap().0;
        let b = heap.pop().unwrap().0;
        children.push((a.id, b.id));
        heap.push(Reverse(HeapEntry {
            prob: a.prob + b.prob,
            created: next_id,
            id: next_id,
        }));
        next_id += 1;
    }
    let root = heap.pop().unwrap().0.id;

    let mut lengths = vec![0u8; n];
    let mut stack = vec![(root, 0u32)];
    while let Some((id, depth)) = stack.pop() {
        if (id as usize) < n {
            if depth > 64 {
                return Err(Error::InvalidParameter(
                    "codeword length exceeds 64 bits; source too skewed for this block length"
                        .into(),
                ));
            }
            lengths[id as usize] = depth as u8;
        } else {
            let (left, right) = children[id as usize - n];
            stack.push((left, depth + 1));
            stack.push((right, depth + 1));
        }
    }
    Ok(lengths)
}

/// Canonical code assignment: blocks sorted by `(length, index)` receive
/// consecutive codes, shifted left whenever the length grows.
fn canonical_codes(lengths: &[u8]) -> Vec<u64> {
    let mut order: Vec<u32> = (0..lengths.len() as u32).collect();
    order.sort_by_key(|&i| (lengths[i as usize], i));

    let mut codes = vec![0u64; lengths.len()];
    let mut code = 0u64;
    let mut prev_len = lengths[order[0] as usize];
    for (k, &i) in order.iter().enumerate() {
        let len = lengths[i as usize];
        if k > 0 {
            code += 1;
            code <<= len - prev_len;
        }
        codes[i as usize] = code;
        prev_len = len;
    }
    // a complete code ends exactly at the all-ones word of maximal length
    debug_assert_eq!(code as u128 + 1, 1u128 << prev_len);
    codes
}

fn build_trie(lengths: &[u8], codes: &[u64]) -> Vec<[u32; 2]> {
    let mut trie: Vec<[u32; 2]> = vec![[EMPTY, EMPTY]];
    for (i, (&len, &code)) in lengths.iter().zip(codes).enumerate() {
        let mut node = 0usize;
        for j in (0..len as u32).rev() {
            let bit = ((code >> j) & 1) as usize;
            if j == 0 {
                trie[node][bit] = LEAF_TAG | i as u32;
            } else {
                let mut next = trie[node][bit];
                if next == EMPTY {
                    next = trie.len() as u32;
                    trie.push([EMPTY, EMPTY]);
                    trie[node][bit] = next;
                }
                node = next as usize;
            }
        }
    }
    trie
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pmf(probs: &[f64]) -> SymbolPmf<f64> {
        SymbolPmf::new(probs.to_vec()).unwrap()
    }

    #[test]
    fn dyadic_single_symbol_blocks() {
        let code = BlockCode::build(&pmf(&[0.5, 0.5]), 1).unwrap();
        assert_eq!(code.n_codewords(), 2);
        assert_eq!(code.lengths, vec![1, 1]);
        let l = code.codeword_length_pmf();
        assert_eq!(l.mean(), 1.0);
        assert!(code.kraft_is_complete());
    }

    #[test]
    fn skewed_pair_blocks_match_hand_merge() {
        // probabilities {aa: 0.81, ab: 0.09, ba: 0.09, bb: 0.01}; merging by
        // smallest (prob, creation index) pairs bb with ab first, so the
        // length multiset is {1, 2, 3, 3} with ba at depth 2.
        let code = BlockCode::build(&pmf(&[0.9, 0.1]), 2).unwrap();
        assert_eq!(code.lengths, vec![1, 3, 2, 3]);
        let l = code.codeword_length_pmf();
        assert!((l.mean() - 1.29).abs() < 1e-12);
        assert!((l.second_moment() - 2.07).abs() < 1e-12);
        assert!((l.variance() - 0.4059).abs() < 1e-12);
        assert!((code.code_rate() - 0.645).abs() < 1e-12);
        assert!(code.kraft_is_complete());
    }

    #[test]
    fn dyadic_pair_blocks_are_uniform() {
        let code = BlockCode::build(&pmf(&[0.5, 0.5]), 2).unwrap();
        let l = code.codeword_length_pmf();
        assert_eq!(l.support(), &[(2, 1.0)]);
        assert_eq!(l.variance(), 0.0);
    }

    #[test]
    fn kraft_sum_exactly_one_for_assorted_pmfs() {
        for probs in [
            vec![0.9f64, 0.1],
            vec![0.5, 0.5],
            vec![0.6, 0.4],
            vec![0.25, 0.7, 0.05],
        ] {
            let code = BlockCode::build(&SymbolPmf::new(probs).unwrap(), 2).unwrap();
            assert!(code.kraft_is_complete());
        }
    }

    #[test]
    fn cap_is_enforced() {
        let err = BlockCode::build_with_cap(&pmf(&[0.5, 0.5]), 12, 1 << 10).unwrap_err();
        assert!(matches!(err, Error::BlockSpaceExceeded { .. }));
        assert!(BlockCode::build_with_cap(&pmf(&[0.5, 0.5]), 10, 1 << 10).is_ok());
    }

    #[test]
    fn encode_emits_expected_lengths() {
        let code = BlockCode::build(&pmf(&[0.9, 0.1]), 2).unwrap();
        // blocks aa then ba: lengths 1 then 2 under the deterministic merge
        let enc = code.encode_stream(&[0, 0, 1, 0]).unwrap();
        assert_eq!(enc.codeword_bits, vec![1, 2]);
        assert_eq!(enc.block_sizes, vec![2, 2]);
        // trailing partial block
        let enc = code.encode_stream(&[0, 0, 1]).unwrap();
        assert_eq!(enc.n_blocks(), 1);
        assert_eq!(enc.trailing_symbols, 1);
    }

    #[test]
    fn decode_inverts_encode() {
        let code = BlockCode::build(&pmf(&[0.9, 0.1]), 2).unwrap();
        let input = vec![0, 0, 1, 0, 0, 1, 1, 1, 0, 0];
        let enc = code.encode_stream(&input).unwrap();
        assert_eq!(code.decode_stream(&enc.bits).unwrap(), input);
    }

    #[test]
    fn truncated_stream_fails_decode() {
        let code = BlockCode::build(&pmf(&[0.9, 0.1]), 2).unwrap();
        let enc = code.encode_stream(&[1, 1, 1, 1]).unwrap();
        assert!(code
            .decode_stream(&enc.bits[..enc.bits.len() - 1])
            .is_err());
    }

    #[test]
    fn debug_table_is_prefix_free_listing() {
        let code = BlockCode::build(&pmf(&[0.9, 0.1]), 2).unwrap();
        let table = code.to_debug_table();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("0.0\t"));
    }
}
