//! Closed-form queueing analysis: stability conditions, mean tarry time,
//! and the two upper bounds on the mean waiting time (low-moment and
//! m.g.f.), plus the delay / peak-AoI decompositions for both code
//! families.
//!
//! Conventions: the per-client drift is `U = S - T` (service minus
//! inter-arrival), so stability is `E[U] < 0` and all bounds below require
//! the strict inequality. Unbounded results are represented by an explicit
//! [`Bound::Unbounded`] variant rather than floating-point infinities so
//! serialization stays unambiguous.

use crate::codes::LengthPmf;
use crate::error::{Error, Result};
use crate::scalar::{cast, Real};
use crate::stats::KahanSum;

/// FIFO channel parameters: emission rate in bits per time step and the
/// per-step arrival probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSpec<F> {
    r_ch: F,
    q: F,
}

impl<F: Real> ChannelSpec<F> {
    pub fn new(r_ch: F, q: F) -> Result<Self> {
        if !(r_ch > F::zero()) || !r_ch.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "channel rate must be positive and finite, got {r_ch}"
            )));
        }
        if !(q > F::zero() && q < F::one()) {
            return Err(Error::InvalidParameter(format!(
                "arrival probability must lie in (0, 1), got {q}"
            )));
        }
        Ok(Self { r_ch, q })
    }

    pub fn r_ch(&self) -> F {
        self.r_ch
    }

    pub fn q(&self) -> F {
        self.q
    }

    /// Stability threshold on the code rate, `r_ch / q` bits per symbol.
    pub fn rate_threshold(&self) -> F {
        self.r_ch / self.q
    }
}

/// A nonnegative quantity that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound<F> {
    Finite(F),
    Unbounded,
}

impl<F: Real> Bound<F> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Bound::Finite(_))
    }

    pub fn value(&self) -> Option<F> {
        match self {
            Bound::Finite(v) => Some(*v),
            Bound::Unbounded => None,
        }
    }

    /// Finite value or `+inf` of the scalar type.
    pub fn or_infinity(&self) -> F {
        match self {
            Bound::Finite(v) => *v,
            Bound::Unbounded => F::infinity(),
        }
    }

    pub fn map(self, f: impl FnOnce(F) -> F) -> Bound<F> {
        match self {
            Bound::Finite(v) => Bound::Finite(f(v)),
            Bound::Unbounded => Bound::Unbounded,
        }
    }

    /// The tighter (smaller) of two bounds.
    pub fn tighter(self, other: Bound<F>) -> Bound<F> {
        match (self, other) {
            (Bound::Finite(a), Bound::Finite(b)) => Bound::Finite(a.min(b)),
            (Bound::Finite(a), Bound::Unbounded) => Bound::Finite(a),
            (Bound::Unbounded, b) => b,
        }
    }
}

/// Queue stability for a memoryless code of the given rate: stable iff
/// `rate < r_ch / q`, strictly. Returns the flag and the margin
/// `r_ch/q - rate`.
pub fn rate_stability<F: Real>(code_rate: F, ch: &ChannelSpec<F>) -> (bool, F) {
    let threshold = ch.rate_threshold();
    (code_rate < threshold, threshold - code_rate)
}

/// Whether any lossless code can stabilize the queue: true iff the source
/// entropy is strictly below `r_ch / q`.
pub fn stabilizable<F: Real>(entropy_bits: F, ch: &ChannelSpec<F>) -> bool {
    entropy_bits < ch.rate_threshold()
}

/// Mean tarry time `(E[B^2] - E[B]) / (2 q E[B])`: the average time a
/// symbol spends waiting for its parse block to complete.
pub fn tarry_mean<F: Real>(b_pmf: &LengthPmf<F>, q: F) -> F {
    let two = cast::<F>(2.0);
    (b_pmf.second_moment() - b_pmf.mean()) / (two * q * b_pmf.mean())
}

/// Low-moment waiting bound for a variable-to-fixed code:
/// `(Var(B) + (1-q) E[B]) / (q (E[B] - q ell / r_ch))`, infinite when the
/// denominator is not positive.
pub fn low_moment_bound_vtf<F: Real>(
    b_pmf: &LengthPmf<F>,
    ell: u32,
    ch: &ChannelSpec<F>,
) -> Bound<F> {
    let q = ch.q();
    let ell = F::from_u32(ell).unwrap();
    let numerator = b_pmf.variance() + (F::one() - q) * b_pmf.mean();
    let denominator = q * (b_pmf.mean() - q * ell / ch.r_ch());
    if denominator > F::zero() {
        Bound::Finite(numerator / denominator)
    } else {
        Bound::Unbounded
    }
}

/// Low-moment waiting bound for a fixed-to-variable code:
/// `(Var(L)/r_ch^2 + (1-q) b / q^2) / (b/q - E[L]/r_ch)`.
pub fn low_moment_bound_ftv<F: Real>(
    l_pmf: &LengthPmf<F>,
    block_len: u32,
    ch: &ChannelSpec<F>,
) -> Bound<F> {
    let q = ch.q();
    let r = ch.r_ch();
    let b = F::from_u32(block_len).unwrap();
    let numerator = l_pmf.variance() / (r * r) + (F::one() - q) * b / (q * q);
    let denominator = b / q - l_pmf.mean() / r;
    if denominator > F::zero() {
        Bound::Finite(numerator / denominator)
    } else {
        Bound::Unbounded
    }
}

/// M.g.f. of the drift `U = ell/r_ch - sum_{n<=B} D_n` at `theta >= 0`:
/// `exp(theta ell / r_ch) * E[(q e^-theta / (1 - (1-q) e^-theta))^B]`.
pub fn phi_u<F: Real>(theta: F, b_pmf: &LengthPmf<F>, ell: u32, ch: &ChannelSpec<F>) -> F {
    phi_u_with_derivative(theta, b_pmf, ell, ch).0
}

/// `phi_U(theta)` together with its derivative in `theta`; terms are
/// evaluated in log space so large block lengths cannot produce 0 * inf.
fn phi_u_with_derivative<F: Real>(
    theta: F,
    b_pmf: &LengthPmf<F>,
    ell: u32,
    ch: &ChannelSpec<F>,
) -> (F, F) {
    let q = ch.q();
    let c = F::from_u32(ell).unwrap() / ch.r_ch();
    let s = (-theta).exp();
    // 1 - (1-q) e^-theta, in (q, 1] for theta >= 0
    let d = F::one() - (F::one() - q) * s;
    let ln_gap = q.ln() - theta - d.ln();
    let mut phi = KahanSum::new();
    let mut dphi = KahanSum::new();
    for &(b, p) in b_pmf.support() {
        let bf = F::from_u32(b).unwrap();
        let term = p * (theta * c + bf * ln_gap).exp();
        phi.add(term);
        dphi.add(term * (c - bf / d));
    }
    (phi.value(), dphi.value())
}

/// Result of the m.g.f. waiting-bound computation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgfSolution<F> {
    /// The decay rate `nu = sup { theta > 0 : phi_U(theta) < 1 }`.
    pub nu: Bound<F>,
    /// The bound `E[W] <= 1/nu`; zero when `nu` is unbounded.
    pub bound: Bound<F>,
    pub iterations: u32,
}

/// M.g.f. waiting bound for a variable-to-fixed code.
///
/// Three outcomes:
/// - a unique positive root `theta*` of `phi_U = 1` exists: `nu = theta*`,
///   bound `1/theta*`;
/// - `phi_U < 1` for all positive `theta` (service never exceeds the
///   minimal inter-arrival time, `ell/r_ch <= min B`): `nu` unbounded and
///   the bound is exactly 0;
/// - no positive `theta` keeps `phi_U` below 1 (the queue is not strictly
///   stable): `nu = 0` and the bound is unbounded.
///
/// The root search brackets by doubling from 1e-6 up to
/// `theta_cap = 64 ln(1/(1-q)) + 64` (reaching the cap identifies the
/// second case) and then refines by bisection with damped Newton steps
/// until `|phi_U - 1| <= tol`.
pub fn mgf_bound_vtf<F: Real>(
    b_pmf: &LengthPmf<F>,
    ell: u32,
    ch: &ChannelSpec<F>,
    tol: F,
) -> Result<MgfSolution<F>> {
    if !(tol > F::zero()) {
        return Err(Error::InvalidParameter(format!(
            "root tolerance must be positive, got {tol}"
        )));
    }
    let q = ch.q();
    let drift = F::from_u32(ell).unwrap() / ch.r_ch() - b_pmf.mean() / q;
    if drift >= F::zero() {
        return Ok(MgfSolution {
            nu: Bound::Finite(F::zero()),
            bound: Bound::Unbounded,
            iterations: 0,
        });
    }

    let phi = |theta: F| phi_u_with_derivative(theta, b_pmf, ell, ch);
    let theta_cap = cast::<F>(64.0) * (F::one() / (F::one() - q)).ln() + cast::<F>(64.0);

    // starting point with phi < 1; under stability one exists arbitrarily
    // close to 0, but it may sit below 1e-6 when the margin is razor thin
    let mut lo = cast::<F>(1e-6);
    let mut shrinks = 0u32;
    while phi(lo).0 >= F::one() {
        lo = lo * cast::<F>(0.5);
        shrinks += 1;
        if shrinks > 120 {
            return Err(Error::RootSearchFailed {
                last_lo: 0.0,
                last_hi: (lo + lo).to_f64().unwrap_or(f64::NAN),
                iterations: shrinks,
            });
        }
    }

    // bracket by doubling; passing theta_cap means phi stays below 1
    let mut hi = lo + lo;
    loop {
        if hi > theta_cap {
            return Ok(MgfSolution {
                nu: Bound::Unbounded,
                bound: Bound::Finite(F::zero()),
                iterations: 0,
            });
        }
        let (p, _) = phi(hi);
        if (p - F::one()).abs() <= tol {
            return Ok(MgfSolution {
                nu: Bound::Finite(hi),
                bound: Bound::Finite(F::one() / hi),
                iterations: 0,
            });
        }
        if p > F::one() {
            break;
        }
        lo = hi;
        hi = hi + hi;
    }

    // refine [lo, hi] with phi(lo) < 1 < phi(hi)
    let mut x = (lo + hi) * cast::<F>(0.5);
    let mut iterations = 0u32;
    loop {
        iterations += 1;
        if iterations > 200 {
            return Err(Error::RootSearchFailed {
                last_lo: lo.to_f64().unwrap_or(f64::NAN),
                last_hi: hi.to_f64().unwrap_or(f64::NAN),
                iterations,
            });
        }
        let (p, dp) = phi(x);
        if (p - F::one()).abs() <= tol {
            return Ok(MgfSolution {
                nu: Bound::Finite(x),
                bound: Bound::Finite(F::one() / x),
                iterations,
            });
        }
        if p < F::one() {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - (p - F::one()) / dp;
        x = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) * cast::<F>(0.5)
        };
        if hi - lo <= x * F::epsilon() * cast::<F>(4.0) {
            // bracket collapsed to floating-point resolution
            let (p_mid, _) = phi(x);
            if (p_mid - F::one()).abs() <= tol * cast::<F>(10.0) {
                return Ok(MgfSolution {
                    nu: Bound::Finite(x),
                    bound: Bound::Finite(F::one() / x),
                    iterations,
                });
            }
            return Err(Error::RootSearchFailed {
                last_lo: lo.to_f64().unwrap_or(f64::NAN),
                last_hi: hi.to_f64().unwrap_or(f64::NAN),
                iterations,
            });
        }
    }
}

/// Both waiting-time bounds for a variable-to-fixed code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaitingBounds<F> {
    pub low_moment: Bound<F>,
    pub mgf: Bound<F>,
    pub nu: Bound<F>,
    pub root_iterations: u32,
}

pub fn waiting_bounds_vtf<F: Real>(
    b_pmf: &LengthPmf<F>,
    ell: u32,
    ch: &ChannelSpec<F>,
    tol: F,
) -> Result<WaitingBounds<F>> {
    let low_moment = low_moment_bound_vtf(b_pmf, ell, ch);
    let mgf = mgf_bound_vtf(b_pmf, ell, ch, tol)?;
    Ok(WaitingBounds {
        low_moment,
        mgf: mgf.bound,
        nu: mgf.nu,
        root_iterations: mgf.iterations,
    })
}

/// Mean delay and mean peak AoI split into their three components.
///
/// By construction `delay_bound = tarry + service + waiting` and
/// `peak_aoi_bound = inter_arrival + service + waiting`, exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayDecomposition<F> {
    pub tarry_mean: F,
    pub inter_arrival_mean: F,
    pub service_mean: F,
    pub waiting_mean_bound: Bound<F>,
    pub delay_bound: Bound<F>,
    pub peak_aoi_bound: Bound<F>,
}

/// Decomposition for a variable-to-fixed code: `J` from the block-length
/// moments, `E[T] = E[B]/q`, `E[S] = ell/r_ch`.
pub fn decompose_vtf<F: Real>(
    b_pmf: &LengthPmf<F>,
    ell: u32,
    ch: &ChannelSpec<F>,
    waiting_bound: Bound<F>,
) -> DelayDecomposition<F> {
    let tarry = tarry_mean(b_pmf, ch.q());
    let inter = b_pmf.mean() / ch.q();
    let service = F::from_u32(ell).unwrap() / ch.r_ch();
    assemble(tarry, inter, service, waiting_bound)
}

/// Decomposition for a fixed-to-variable code: `J = (b-1)/(2q)`,
/// `E[T] = b/q`, `E[S] = E[L]/r_ch`.
pub fn decompose_ftv<F: Real>(
    l_pmf: &LengthPmf<F>,
    block_len: u32,
    ch: &ChannelSpec<F>,
    waiting_bound: Bound<F>,
) -> DelayDecomposition<F> {
    let b = F::from_u32(block_len).unwrap();
    let tarry = (b - F::one()) / (cast::<F>(2.0) * ch.q());
    let inter = b / ch.q();
    let service = l_pmf.mean() / ch.r_ch();
    assemble(tarry, inter, service, waiting_bound)
}

fn assemble<F: Real>(
    tarry: F,
    inter: F,
    service: F,
    waiting: Bound<F>,
) -> DelayDecomposition<F> {
    DelayDecomposition {
        tarry_mean: tarry,
        inter_arrival_mean: inter,
        service_mean: service,
        waiting_mean_bound: waiting,
        delay_bound: waiting.map(|w| tarry + service + w),
        peak_aoi_bound: waiting.map(|w| inter + service + w),
    }
}
