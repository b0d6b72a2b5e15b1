//! Streaming statistics used by the simulator.
//!
//! Means come from Kahan-compensated sums so that the exact accounting
//! identities between delay components survive millions of updates;
//! variances use Welford's recurrence.

use crate::scalar::Real;

/// Kahan-compensated running sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KahanSum<F> {
    sum: F,
    carry: F,
}

impl<F: Real> Default for KahanSum<F> {
    fn default() -> Self {
        Self {
            sum: F::zero(),
            carry: F::zero(),
        }
    }
}

impl<F: Real> KahanSum<F> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: F) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> F {
        self.sum
    }
}

/// Kahan-compensated sum of an iterator of scalars.
pub fn kahan_sum<F: Real>(values: impl IntoIterator<Item = F>) -> F {
    let mut acc = KahanSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Single-pass mean/variance accumulator with integer weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningStat<F> {
    count: u64,
    sum: KahanSum<F>,
    welford_mean: F,
    m2: F,
}

impl<F: Real> Default for RunningStat<F> {
    fn default() -> Self {
        Self {
            count: 0,
            sum: KahanSum::new(),
            welford_mean: F::zero(),
            m2: F::zero(),
        }
    }
}

impl<F: Real> RunningStat<F> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: F) {
        self.push_weighted(x, 1);
    }

    /// Record `x` as if it had been pushed `weight` times.
    pub fn push_weighted(&mut self, x: F, weight: u64) {
        if weight == 0 {
            return;
        }
        let w = F::from_u64(weight).expect("weight fits scalar");
        self.count += weight;
        let n = F::from_u64(self.count).expect("count fits scalar");
        self.sum.add(x * w);
        let delta = x - self.welford_mean;
        self.welford_mean = self.welford_mean + delta * w / n;
        self.m2 = self.m2 + delta * w * (x - self.welford_mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> F {
        if self.count == 0 {
            return F::zero();
        }
        self.sum.value() / F::from_u64(self.count).expect("count fits scalar")
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> F {
        if self.count < 2 {
            return F::zero();
        }
        let denom = F::from_u64(self.count - 1).expect("count fits scalar");
        (self.m2 / denom).max(F::zero())
    }

    /// Standard error of the mean.
    pub fn std_err(&self) -> F {
        if self.count == 0 {
            return F::zero();
        }
        (self.variance() / F::from_u64(self.count).expect("count fits scalar")).sqrt()
    }
}
