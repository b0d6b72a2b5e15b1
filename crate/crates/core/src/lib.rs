//! Lossless source coding of randomly arriving symbols over a rate-limited
//! FIFO channel.
//!
//! The crate builds the two classic memoryless code families --
//! variable-to-fixed Tunstall parse dictionaries and fixed-to-variable
//! block Huffman codes -- and treats the noiseless channel as a GI/GI/1
//! queue. On top of that it provides the closed-form performance analysis
//! (stability conditions, mean tarry time, low-moment and m.g.f. bounds on
//! the mean waiting time, delay and peak age-of-information
//! decompositions) and a discrete-event simulator that measures the same
//! quantities empirically via the Lindley recursion.
//!
//! All numeric code is generic over the scalar type through the
//! [`Real`] trait (`f32` or `f64`); the aliases below fix concrete
//! instantiations. The `f64` forms are what the CLI and test suites use.

mod error;
pub mod codes;
pub mod queue;
pub mod scalar;
pub mod sim;
pub mod source;
pub mod stats;

pub use codes::{BlockCode, EncodedStream, LengthPmf, ParseDictionary, DEFAULT_BLOCK_CAP};
pub use error::{Error, Result};
pub use queue::{
    decompose_ftv, decompose_vtf, low_moment_bound_ftv, low_moment_bound_vtf, mgf_bound_vtf,
    phi_u, rate_stability, stabilizable, tarry_mean, waiting_bounds_vtf, Bound, ChannelSpec,
    DelayDecomposition, MgfSolution, WaitingBounds,
};
pub use scalar::Real;
pub use sim::{
    detect_divergence, simulate, simulate_stream, simulate_stream_traced, BlockRecord, Scheme,
    SimConfig, SimReport,
};
pub use source::{sample_stream, ArrivalSpec, SymbolPmf, SymbolStream, RNG_ALGORITHM};

/// `f64` instantiations.
pub type SymbolPmf64 = SymbolPmf<f64>;
pub type ArrivalSpec64 = ArrivalSpec<f64>;
pub type ParseDictionary64 = ParseDictionary<f64>;
pub type BlockCode64 = BlockCode<f64>;
pub type LengthPmf64 = LengthPmf<f64>;
pub type ChannelSpec64 = ChannelSpec<f64>;
pub type SimConfig64 = SimConfig<f64>;
pub type SimReport64 = SimReport<f64>;

/// `f32` instantiations.
pub type SymbolPmf32 = SymbolPmf<f32>;
pub type ArrivalSpec32 = ArrivalSpec<f32>;
pub type ParseDictionary32 = ParseDictionary<f32>;
pub type BlockCode32 = BlockCode<f32>;
pub type LengthPmf32 = LengthPmf<f32>;
pub type ChannelSpec32 = ChannelSpec<f32>;
pub type SimConfig32 = SimConfig<f32>;
pub type SimReport32 = SimReport<f32>;
