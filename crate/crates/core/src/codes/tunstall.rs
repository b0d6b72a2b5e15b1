//! Tunstall parse dictionaries: variable-length source phrases mapped to
//! fixed-length codewords.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, BTreeMap};
use std::fmt::Write as _;

use crate::codes::{bits_to_string, EncodedStream, LengthPmf};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stats::KahanSum;
use crate::source::SymbolPmf;

/// Largest supported output word length; the decode table is a dense
/// `2^ell` array.
pub(crate) const MAX_ELL: u32 = 20;

const NO_LEAF: u32 = u32::MAX;

#[derive(Debug, Clone)]
struct TreeNode {
    /// One child per alphabet symbol; empty for leaves.
    children: Vec<u32>,
    /// Index into the sorted leaf table, `NO_LEAF` for internal nodes.
    leaf: u32,
}

#[derive(Debug, Clone)]
struct Leaf<F> {
    path: Vec<u16>,
    prob: F,
}

/// Candidate leaf in the expansion frontier. Ordered by probability with
/// ties broken toward the lexicographically smallest symbol string, which
/// pins the construction down across runs and platforms.
struct Candidate<F> {
    prob: F,
    path: Vec<u16>,
    node: u32,
}

impl<F: Real> PartialEq for Candidate<F> {
    fn eq(&self, other: &Self) -> bool {
        self.prob == other.prob && self.path == other.path
    }
}

impl<F: Real> Eq for Candidate<F> {}

impl<F: Real> Ord for Candidate<F> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.prob
            .partial_cmp(&other.prob)
            .expect("leaf probabilities are finite")
            .then_with(|| other.path.cmp(&self.path))
    }
}

impl<F: Real> PartialOrd for Candidate<F> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A variable-to-fixed code: a full parse tree over the source alphabet
/// whose leaves carry distinct `ell`-bit codewords.
///
/// Construction is the classic Tunstall procedure: start from the root with
/// one leaf per symbol and repeatedly expand the most probable leaf while
/// the leaf budget `2^ell` allows, which maximizes the expected block
/// length over all full parse trees of that size. Leaves are enumerated in
/// lexicographic order of their symbol strings and assigned words in
/// ascending binary order.
#[derive(Debug, Clone)]
pub struct ParseDictionary<F> {
    ell: u32,
    alphabet: usize,
    nodes: Vec<TreeNode>,
    /// Leaves sorted lexicographically by path; index == codeword value.
    leaves: Vec<Leaf<F>>,
    /// Dense map from `ell`-bit word to leaf index (`NO_LEAF` if unused).
    word_to_leaf: Vec<u32>,
}

impl<F: Real> ParseDictionary<F> {
    pub fn build(pmf: &SymbolPmf<F>, ell: u32) -> Result<Self> {
        let m = pmf.alphabet_size();
        if ell > MAX_ELL {
            return Err(Error::InvalidParameter(format!(
                "output length {ell} exceeds supported maximum {MAX_ELL}"
            )));
        }
        let max_leaves = 1usize << ell;
        if max_leaves < m {
            return Err(Error::InvalidParameter(format!(
                "2^{ell} = {max_leaves} codewords cannot cover an alphabet of {m} symbols"
            )));
        }

        let mut nodes = vec![TreeNode {
            children: Vec::new(),
            leaf: NO_LEAF,
        }];
        let mut frontier: BinaryHeap<Candidate<F>> = BinaryHeap::new();
        expand(&mut nodes, &mut frontier, 0, F::one(), &[], pmf);

        let mut leaf_count = m;
        while leaf_count + (m - 1) <= max_leaves {
            let best = frontier.pop().expect("frontier never empties");
            expand(&mut nodes, &mut frontier, best.node, best.prob, &best.path, pmf);
            leaf_count += m - 1;
        }

        let mut leaves: Vec<(Vec<u16>, F, u32)> = frontier
            .into_iter()
            .map(|c| (c.path, c.prob, c.node))
            .collect();
        leaves.sort_by(|a, b| a.0.cmp(&b.0));

        let mut total = KahanSum::new();
        let mut word_to_leaf = vec![NO_LEAF; max_leaves];
        let leaves = leaves
            .into_iter()
            .enumerate()
            .map(|(word, (path, prob, node))| {
                nodes[node as usize].leaf = word as u32;
                word_to_leaf[word] = word as u32;
                total.add(prob);
                Leaf { path, prob }
            })
            .collect::<Vec<_>>();
        debug_assert!((total.value() - F::one()).abs() <= F::prob_tol());

        Ok(Self {
            ell,
            alphabet: m,
            nodes,
            leaves,
            word_to_leaf,
        })
    }

    /// Output codeword length in bits.
    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    pub fn n_leaves(&self) -> usize {
        self.leaves.len()
    }

    /// Leaves as `(symbol string, probability, codeword)` triples in
    /// lexicographic path order.
    pub fn leaves(&self) -> impl Iterator<Item = (&[u16], F, u32)> + '_ {
        self.leaves
            .iter()
            .enumerate()
            .map(|(w, leaf)| (leaf.path.as_slice(), leaf.prob, w as u32))
    }

    /// Distribution of the parse block length B.
    pub fn block_length_pmf(&self) -> LengthPmf<F> {
        let mut by_depth: BTreeMap<u32, KahanSum<F>> = BTreeMap::new();
        for leaf in &self.leaves {
            by_depth
                .entry(leaf.path.len() as u32)
                .or_default()
                .add(leaf.prob);
        }
        let support = by_depth
            .into_iter()
            .map(|(depth, sum)| (depth, sum.value()))
            .collect();
        LengthPmf::from_support(support).expect("leaf probabilities form a valid pmf")
    }

    /// Average coded bits per source symbol, `ell / E[B]`.
    pub fn code_rate(&self) -> F {
        F::from_u32(self.ell).unwrap() / self.block_length_pmf().mean()
    }

    /// Walker for feeding symbols one at a time; used by the simulator.
    pub fn walker(&self) -> ParseWalker<'_, F> {
        ParseWalker {
            dict: self,
            node: 0,
            depth: 0,
        }
    }

    /// Greedily parse `symbols` and emit one `ell`-bit word per completed
    /// block. An unfinished trailing parse is reported, not encoded.
    pub fn encode_stream(&self, symbols: &[u16]) -> Result<EncodedStream> {
        let mut out = EncodedStream::new();
        let mut walker = self.walker();
        let mut pending = 0usize;
        for &sym in symbols {
            pending += 1;
            if let Some((block_len, word)) = walker.step(sym)? {
                for j in (0..self.ell).rev() {
                    out.bits.push((word >> j) & 1 == 1);
                }
                out.block_sizes.push(block_len);
                out.codeword_bits.push(self.ell);
                pending = 0;
            }
        }
        out.trailing_symbols = pending;
        Ok(out)
    }

    /// Invert a concatenation of `ell`-bit codewords.
    pub fn decode_stream(&self, bits: &[bool]) -> Result<Vec<u16>> {
        let ell = self.ell as usize;
        if bits.len() % ell != 0 {
            return Err(Error::Decode(format!(
                "bit stream length {} is not a multiple of the word length {ell}",
                bits.len()
            )));
        }
        let mut symbols = Vec::new();
        for chunk in bits.chunks_exact(ell) {
            let word = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
            let leaf = self.word_to_leaf[word];
            if leaf == NO_LEAF {
                return Err(Error::Decode(format!(
                    "word {} is not assigned to any parse leaf",
                    bits_to_string(chunk.iter().copied())
                )));
            }
            symbols.extend_from_slice(&self.leaves[leaf as usize].path);
        }
        Ok(symbols)
    }

    /// Debug dump, one `symbol.string<TAB>codeword` line per leaf.
    pub fn to_debug_table(&self) -> String {
        let mut out = String::new();
        for (path, _, word) in self.leaves() {
            let path_str = path
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(".");
            let mut word_str = String::new();
            for j in (0..self.ell).rev() {
                word_str.push(if (word >> j) & 1 == 1 { '1' } else { '0' });
            }
            let _ = writeln!(out, "{path_str}\t{word_str}");
        }
        out
    }
}

fn expand<F: Real>(
    nodes: &mut Vec<TreeNode>,
    frontier: &mut BinaryHeap<Candidate<F>>,
    node: u32,
    prob: F,
    path: &[u16],
    pmf: &SymbolPmf<F>,
) {
    let mut children = Vec::with_capacity(pmf.alphabet_size());
    for (sym, &p) in pmf.probs().iter().enumerate() {
        let child = nodes.len() as u32;
        nodes.push(TreeNode {
            children: Vec::new(),
            leaf: NO_LEAF,
        });
        children.push(child);
        let mut child_path = Vec::with_capacity(path.len() + 1);
        child_path.extend_from_slice(path);
        child_path.push(sym as u16);
        frontier.push(Candidate {
            prob: prob * p,
            path: child_path,
            node: child,
        });
    }
    nodes[node as usize].children = children;
}

/// Incremental parse-tree walk.
pub struct ParseWalker<'a, F> {
    dict: &'a ParseDictionary<F>,
    node: u32,
    depth: u32,
}

impl<F: Real> ParseWalker<'_, F> {
    /// Feed one symbol; returns `Some((block_len, codeword))` when the walk
    /// reaches a leaf and restarts from the root.
    pub fn step(&mut self, sym: u16) -> Result<Option<(u32, u32)>> {
        if (sym as usize) >= self.dict.alphabet {
            return Err(Error::InvalidParameter(format!(
                "symbol index {sym} outside alphabet of size {}",
                self.dict.alphabet
            )));
        }
        let next = self.dict.nodes[self.node as usize].children[sym as usize];
        self.depth += 1;
        let leaf = self.dict.nodes[next as usize].leaf;
        if leaf != NO_LEAF {
            let block_len = self.depth;
            self.node = 0;
            self.depth = 0;
            Ok(Some((block_len, leaf)))
        } else {
            self.node = next;
            Ok(None)
        }
    }

    /// Symbols consumed since the last completed block.
    pub fn pending_symbols(&self) -> u32 {
        self.depth
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pmf(probs: &[f64]) -> SymbolPmf<f64> {
        SymbolPmf::new(probs.to_vec()).unwrap()
    }

    #[test]
    fn uniform_binary_fills_complete_tree() {
        let dict = ParseDictionary::build(&pmf(&[0.5, 0.5]), 2).unwrap();
        assert_eq!(dict.n_leaves(), 4);
        let b = dict.block_length_pmf();
        assert_eq!(b.support(), &[(2, 1.0)]);
        assert_eq!(b.mean(), 2.0);
        assert_eq!(b.variance(), 0.0);
        assert!((dict.code_rate() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn skewed_binary_dictionary_matches_hand_construction() {
        // expansions: a then aa, giving leaves aaa, aab, ab, b
        let dict = ParseDictionary::build(&pmf(&[0.9, 0.1]), 2).unwrap();
        let leaves: Vec<(Vec<u16>, f64, u32)> = dict
            .leaves()
            .map(|(p, pr, w)| (p.to_vec(), pr, w))
            .collect();
        assert_eq!(
            leaves,
            vec![
                (vec![0, 0, 0], 0.9 * 0.9 * 0.9, 0),
                (vec![0, 0, 1], 0.9 * 0.9 * 0.1, 1),
                (vec![0, 1], 0.9 * 0.1, 2),
                (vec![1], 0.1, 3),
            ]
        );
        let b = dict.block_length_pmf();
        assert_eq!(b.max_value(), 3);
        assert!((b.mean() - 2.71).abs() < 1e-12);
        let by_depth: Vec<(u32, f64)> = b.support().to_vec();
        assert_eq!(by_depth.len(), 3);
        assert!((by_depth[0].1 - 0.1).abs() < 1e-15);
        assert!((by_depth[1].1 - 0.09).abs() < 1e-15);
        assert!((by_depth[2].1 - 0.81).abs() < 1e-15);
        assert!((dict.code_rate() - 2.0 / 2.71).abs() < 1e-12);
    }

    #[test]
    fn rejects_word_length_below_alphabet() {
        assert!(matches!(
            ParseDictionary::build(&pmf(&[0.5, 0.5]), 0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(ParseDictionary::build(&pmf(&[0.4, 0.3, 0.3]), 1).is_err());
    }

    #[test]
    fn encode_walks_the_tree() {
        let dict = ParseDictionary::build(&pmf(&[0.9, 0.1]), 2).unwrap();
        // "aab" parses to the single leaf aab (codeword 01)
        let enc = dict.encode_stream(&[0, 0, 1]).unwrap();
        assert_eq!(enc.block_sizes, vec![3]);
        assert_eq!(enc.codeword_bits, vec![2]);
        assert_eq!(enc.bits, vec![false, true]);
        assert_eq!(enc.trailing_symbols, 0);
        // "aa" stops mid-parse: nothing encoded, trailing reported
        let enc = dict.encode_stream(&[0, 0]).unwrap();
        assert_eq!(enc.n_blocks(), 0);
        assert_eq!(enc.trailing_symbols, 2);
        // empty input
        let enc = dict.encode_stream(&[]).unwrap();
        assert!(enc.bits.is_empty());
        assert_eq!(enc.trailing_symbols, 0);
    }

    #[test]
    fn decode_inverts_encode() {
        let dict = ParseDictionary::build(&pmf(&[0.9, 0.1]), 2).unwrap();
        let input = vec![0, 0, 1, 1, 0, 1, 0, 0, 0];
        let enc = dict.encode_stream(&input).unwrap();
        let decoded = dict.decode_stream(&enc.bits).unwrap();
        assert_eq!(decoded, input[..input.len() - enc.trailing_symbols]);
    }

    #[test]
    fn unassigned_word_fails_decode() {
        // ternary alphabet, 4 possible words but only 3 leaves: word 11 unused
        let dict = ParseDictionary::build(&pmf(&[0.5, 0.3, 0.2]), 2).unwrap();
        assert_eq!(dict.n_leaves(), 3);
        assert!(matches!(
            dict.decode_stream(&[true, true]),
            Err(Error::Decode(_))
        ));
        // ragged tail
        assert!(dict.decode_stream(&[false]).is_err());
    }

    #[test]
    fn debug_table_lists_each_leaf() {
        let dict = ParseDictionary::build(&pmf(&[0.9, 0.1]), 2).unwrap();
        let table = dict.to_debug_table();
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines, vec!["0.0.0\t00", "0.0.1\t01", "0.1\t10", "1\t11"]);
    }

    #[test]
    fn out_of_alphabet_symbol_is_rejected() {
        let dict = ParseDictionary::build(&pmf(&[0.9, 0.1]), 2).unwrap();
        assert!(dict.encode_stream(&[2]).is_err());
    }
}
