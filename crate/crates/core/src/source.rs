//! Source model: i.i.d. symbols arriving at geometrically distributed
//! instants, sampled reproducibly from a seeded counter-based generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stats::kahan_sum;

/// Identifier of the generator behind [`sample_stream`]; recorded in run
/// metadata so reproducibility claims name the algorithm.
pub const RNG_ALGORITHM: &str = "chacha8";

/// Largest supported alphabet; symbol indices are stored as `u16`.
pub const MAX_ALPHABET: usize = 1 << 16;

/// Probability mass function of the source symbols.
///
/// Invariants enforced at construction: at least two symbols, every
/// probability strictly positive and finite, and the total within
/// [`Real::prob_tol`] of one. Zero-probability symbols are rejected rather
/// than stripped so that alphabet indices stay stable across modules.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolPmf<F> {
    probs: Vec<F>,
}

impl<F: Real> SymbolPmf<F> {
    pub fn new(probs: Vec<F>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidPmf(format!(
                "alphabet must have at least 2 symbols, got {}",
                probs.len()
            )));
        }
        if probs.len() > MAX_ALPHABET {
            return Err(Error::InvalidPmf(format!(
                "alphabet size {} exceeds supported maximum {}",
                probs.len(),
                MAX_ALPHABET
            )));
        }
        for (i, &p) in probs.iter().enumerate() {
            if !(p > F::zero()) || !p.is_finite() {
                return Err(Error::InvalidPmf(format!(
                    "probability of symbol {i} must be strictly positive and finite, got {p}"
                )));
            }
        }
        let total = kahan_sum(probs.iter().copied());
        if (total - F::one()).abs() > F::prob_tol() {
            return Err(Error::InvalidPmf(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[F] {
        &self.probs
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    /// Source entropy in bits per symbol.
    pub fn entropy(&self) -> F {
        let ln2 = F::from_f64(std::f64::consts::LN_2).unwrap();
        -kahan_sum(self.probs.iter().map(|&p| p * p.ln())) / ln2
    }
}

/// Arrival process parameters: per-step arrival probability and RNG seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalSpec<F> {
    q: F,
    seed: u64,
}

impl<F: Real> ArrivalSpec<F> {
    pub fn new(q: F, seed: u64) -> Result<Self> {
        if !(q > F::zero() && q < F::one()) {
            return Err(Error::InvalidParameter(format!(
                "arrival probability must lie in (0, 1), got {q}"
            )));
        }
        Ok(Self { q, seed })
    }

    pub fn q(&self) -> F {
        self.q
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// A sampled stream of symbols with their integer arrival instants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolStream {
    pub symbols: Vec<u16>,
    /// Strictly increasing arrival times; `arrival_times[n]` is the step at
    /// which symbol `n` was generated (time starts at 0, first arrival >= 1).
    pub arrival_times: Vec<u64>,
}

impl SymbolStream {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Sample `n_symbols` i.i.d. symbols with geometric inter-arrival gaps.
///
/// Gaps are drawn by inverse CDF on a single uniform variate,
/// `D = 1 + floor(ln(u) / ln(1 - q))` with `u` uniform on (0, 1], which is
/// exactly geometric on {1, 2, ...}; sampling gaps directly instead of
/// stepping per-slot Bernoulli keeps the cost O(n_symbols). The draw order
/// is fixed (gap, then symbol value) so equal inputs give byte-identical
/// streams.
pub fn sample_stream<F: Real>(
    pmf: &SymbolPmf<F>,
    arrivals: &ArrivalSpec<F>,
    n_symbols: usize,
) -> SymbolStream {
    let mut rng = ChaCha8Rng::seed_from_u64(arrivals.seed());
    let q = arrivals.q().to_f64().expect("q fits f64");
    let log_1mq = (1.0 - q).ln();

    // cumulative distribution in f64 for the inverse-CDF symbol draw
    let mut cdf = Vec::with_capacity(pmf.alphabet_size());
    let mut acc = 0.0f64;
    for &p in pmf.probs() {
        acc += p.to_f64().expect("probability fits f64");
        cdf.push(acc);
    }
    let last = cdf.len() - 1;
    cdf[last] = 1.0;

    let mut symbols = Vec::with_capacity(n_symbols);
    let mut arrival_times = Vec::with_capacity(n_symbols);
    let mut now: u64 = 0;
    for _ in 0..n_symbols {
        let u = 1.0 - rng.random::<f64>(); // in (0, 1]
        let gap = 1 + (u.ln() / log_1mq).floor() as u64;
        now += gap;
        arrival_times.push(now);

        let v = rng.random::<f64>(); // in [0, 1)
        let sym = cdf.partition_point(|&c| c <= v).min(last);
        symbols.push(sym as u16);
    }

    SymbolStream {
        symbols,
        arrival_times,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pmf64(probs: &[f64]) -> SymbolPmf<f64> {
        SymbolPmf::new(probs.to_vec()).unwrap()
    }

    #[test]
    fn accepts_well_formed_pmfs() {
        assert!(SymbolPmf::new(vec![0.5f64, 0.5]).is_ok());
        assert!(SymbolPmf::new(vec![0.9f64, 0.1]).is_ok());
    }

    #[test]
    fn rejects_bad_pmfs() {
        // does not sum to one
        assert!(matches!(
            SymbolPmf::new(vec![0.5f64, 0.5, 0.1]),
            Err(Error::InvalidPmf(_))
        ));
        // zero and negative probabilities
        assert!(SymbolPmf::new(vec![1.0f64, 0.0]).is_err());
        assert!(SymbolPmf::new(vec![1.2f64, -0.2]).is_err());
        // singleton alphabet
        assert!(SymbolPmf::new(vec![1.0f64]).is_err());
        // sum off by more than the tolerance
        assert!(SymbolPmf::new(vec![0.5f64, 0.5 + 1e-9]).is_err());
    }

    #[test]
    fn entropy_of_uniform_sources() {
        assert!((pmf64(&[0.5, 0.5]).entropy() - 1.0).abs() < 1e-15);
        assert!((pmf64(&[0.25; 4]).entropy() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn entropy_matches_direct_formula() {
        // oracle: direct evaluation of -sum p*log2(p)
        let expected = -(0.05f64 * 0.05f64.log2() + 0.95 * 0.95f64.log2());
        assert!((expected - 0.2863969571159562).abs() < 1e-12);
        let h = pmf64(&[0.05, 0.95]).entropy();
        assert!((h - expected).abs() < 1e-12);
        // spec-level sanity: roughly 0.2864 bits
        assert!((h - 0.2864).abs() < 1e-4);
    }

    #[test]
    fn entropy_bounded_by_log_alphabet() {
        for probs in [vec![0.9f64, 0.1], vec![0.3, 0.3, 0.4], vec![0.05, 0.95]] {
            let pmf = SymbolPmf::new(probs.clone()).unwrap();
            let h = pmf.entropy();
            assert!(h > 0.0);
            assert!(h <= (probs.len() as f64).log2() + 1e-12);
        }
    }

    #[test]
    fn arrival_spec_validates_q() {
        assert!(ArrivalSpec::new(0.5f64, 1).is_ok());
        assert!(ArrivalSpec::new(0.0f64, 1).is_err());
        assert!(ArrivalSpec::new(1.0f64, 1).is_err());
        assert!(ArrivalSpec::new(-0.25f64, 1).is_err());
    }

    #[test]
    fn streams_are_reproducible() {
        let pmf = pmf64(&[0.5, 0.5]);
        let spec = ArrivalSpec::new(0.5f64, 0xfeed).unwrap();
        let a = sample_stream(&pmf, &spec, 4096);
        let b = sample_stream(&pmf, &spec, 4096);
        assert_eq!(a, b);
        let c = sample_stream(&pmf, &ArrivalSpec::new(0.5f64, 0xbeef).unwrap(), 4096);
        assert_ne!(a, c);
    }

    #[test]
    fn arrival_times_are_exact_gap_sums() {
        let pmf = pmf64(&[0.9, 0.1]);
        let spec = ArrivalSpec::new(0.3f64, 7).unwrap();
        let stream = sample_stream(&pmf, &spec, 10_000);
        let mut acc = 0u64;
        for (k, &a) in stream.arrival_times.iter().enumerate() {
            assert!(a > acc, "arrival times must be strictly increasing");
            let gap = a - acc;
            assert!(gap >= 1);
            acc += gap;
            assert_eq!(stream.arrival_times[k], acc);
        }
    }

    #[test]
    fn gap_mean_within_three_sigma() {
        let pmf = pmf64(&[0.5, 0.5]);
        let q = 0.5f64;
        let n = 100_000usize;
        let stream = sample_stream(&pmf, &ArrivalSpec::new(q, 11).unwrap(), n);
        let mean = stream.arrival_times[n - 1] as f64 / n as f64;
        let sigma = ((1.0 - q) / (q * q)).sqrt();
        assert!(
            (mean - 1.0 / q).abs() <= 3.0 * sigma / (n as f64).sqrt(),
            "empirical gap mean {mean} too far from {}",
            1.0 / q
        );
    }

    #[test]
    fn symbol_frequencies_track_pmf() {
        let pmf = pmf64(&[0.5, 0.5]);
        let n = 100_000usize;
        let stream = sample_stream(&pmf, &ArrivalSpec::new(0.5f64, 23).unwrap(), n);
        let ones = stream.symbols.iter().filter(|&&s| s == 1).count() as f64;
        assert!((ones / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn geometric_sampler_moments() {
        // mean within 4 standard errors of 1/q, variance within 5% of (1-q)/q^2
        let pmf = pmf64(&[0.5, 0.5]);
        let n = 1_000_000usize;
        for (i, q) in [0.1f64, 0.5, 0.9].into_iter().enumerate() {
            let spec = ArrivalSpec::new(q, 1000 + i as u64).unwrap();
            let stream = sample_stream(&pmf, &spec, n);
            let mut prev = 0u64;
            let mut sum = 0.0f64;
            let mut sum_sq = 0.0f64;
            for &a in &stream.arrival_times {
                let d = (a - prev) as f64;
                sum += d;
                sum_sq += d * d;
                prev = a;
            }
            let mean = sum / n as f64;
            let var = sum_sq / n as f64 - mean * mean;
            let true_var = (1.0 - q) / (q * q);
            let se = true_var.sqrt() / (n as f64).sqrt();
            assert!(
                (mean - 1.0 / q).abs() <= 4.0 * se,
                "q={q}: mean {mean} vs {}",
                1.0 / q
            );
            assert!(
                (var - true_var).abs() <= 0.05 * true_var,
                "q={q}: variance {var} vs {true_var}"
            );
        }
    }

    #[test]
    fn f32_pmf_entropy_works() {
        let pmf = SymbolPmf::new(vec![0.5f32, 0.5]).unwrap();
        assert!((pmf.entropy() - 1.0).abs() < 1e-6);
    }
}
