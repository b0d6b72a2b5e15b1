//! Discrete-event simulation of the source -> encoder -> FIFO -> decoder
//! pipeline, measuring mean delay, mean peak AoI, mean waiting time and
//! mean tarry time through the Lindley recursion.

use crate::codes::{BlockCode, ParseDictionary};
use crate::error::Result;
use crate::queue::ChannelSpec;
use crate::scalar::Real;
use crate::source::{sample_stream, ArrivalSpec, SymbolPmf, SymbolStream};
use crate::stats::RunningStat;

/// Which code family drives the encoder.
#[derive(Debug, Clone)]
pub enum Scheme<F> {
    Vtf(ParseDictionary<F>),
    Ftv(BlockCode<F>),
}

/// One simulation run's configuration.
#[derive(Debug, Clone)]
pub struct SimConfig<F> {
    pub pmf: SymbolPmf<F>,
    pub arrivals: ArrivalSpec<F>,
    pub scheme: Scheme<F>,
    pub channel: ChannelSpec<F>,
    pub n_symbols: usize,
    /// Blocks excluded from all statistics at the start of the run.
    pub warmup_blocks: usize,
}

/// Per-block trace record (CSV-friendly).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockRecord<F> {
    /// 1-based block index.
    pub index: u64,
    /// Source symbols consumed by this codeword (B for VtF, b for FtV).
    pub block_symbols: u32,
    /// Codeword length in bits.
    pub codeword_bits: u32,
    /// Arrival time of the block's last symbol.
    pub arrival_last: u64,
    pub waiting: F,
    pub service: F,
    pub decode_time: F,
    /// Peak AoI, defined from the second block on.
    pub peak_aoi: Option<F>,
}

/// Empirical statistics from one run.
///
/// Symbol-level means (`mean_delay`, `mean_tarry`, and the
/// `symbol_mean_*` terms that weight each block's waiting/service by its
/// symbol count) cover every completed post-warmup block. Block-level
/// means (`mean_waiting`, `mean_service`, `mean_inter_arrival`,
/// `mean_peak_aoi`) cover post-warmup blocks from index 2 on, the range
/// where peak AoI is defined, so the accounting identities
/// `mean_delay = mean_tarry + symbol_mean_waiting + symbol_mean_service`
/// and `mean_peak_aoi = mean_inter_arrival + mean_waiting + mean_service`
/// both hold exactly over their respective index sets.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport<F> {
    pub mean_delay: F,
    pub stderr_delay: F,
    pub mean_tarry: F,
    pub stderr_tarry: F,
    pub mean_peak_aoi: F,
    pub stderr_peak_aoi: F,
    pub mean_waiting: F,
    pub stderr_waiting: F,
    pub mean_service: F,
    pub stderr_service: F,
    pub mean_inter_arrival: F,
    pub stderr_inter_arrival: F,
    pub symbol_mean_waiting: F,
    pub symbol_mean_service: F,
    /// Completed blocks (including warmup ones).
    pub n_blocks: u64,
    /// Symbols belonging to completed blocks.
    pub n_symbols_decoded: u64,
}

/// Sample a stream per the config and simulate it.
pub fn simulate<F: Real>(cfg: &SimConfig<F>) -> Result<SimReport<F>> {
    let stream = sample_stream(&cfg.pmf, &cfg.arrivals, cfg.n_symbols);
    simulate_stream(&cfg.scheme, &cfg.channel, cfg.warmup_blocks, &stream)
}

/// Simulate a given symbol stream.
pub fn simulate_stream<F: Real>(
    scheme: &Scheme<F>,
    channel: &ChannelSpec<F>,
    warmup_blocks: usize,
    stream: &SymbolStream,
) -> Result<SimReport<F>> {
    simulate_stream_traced(scheme, channel, warmup_blocks, stream, |_| {})
}

/// Simulate with a per-block callback (used for trace dumps and tests).
///
/// Blocks are formed greedily (VtF: parse-tree walk; FtV: consecutive
/// groups of `b` symbols); a codeword enters the FIFO at the arrival
/// instant of its last symbol, waits per the Lindley recursion
/// `W_i = max(0, W_{i-1} + S_{i-1} - T_i)` with `W_1 = 0`, and is decoded
/// at `R_i = a_i + W_i + S_i`. The trailing partial block is discarded.
/// An unstable configuration still runs and reports; detecting the drift
/// is the caller's job.
pub fn simulate_stream_traced<F: Real>(
    scheme: &Scheme<F>,
    channel: &ChannelSpec<F>,
    warmup_blocks: usize,
    stream: &SymbolStream,
    mut on_block: impl FnMut(&BlockRecord<F>),
) -> Result<SimReport<F>> {
    let r_ch = channel.r_ch();
    let warmup = warmup_blocks as u64;

    let mut delay = RunningStat::new();
    let mut tarry = RunningStat::new();
    let mut peak_aoi = RunningStat::new();
    let mut waiting = RunningStat::new();
    let mut service = RunningStat::new();
    let mut inter_arrival = RunningStat::new();
    let mut sym_waiting = RunningStat::new();
    let mut sym_service = RunningStat::new();

    let mut n_blocks: u64 = 0;
    let mut n_symbols_decoded: u64 = 0;

    // queue state
    let mut prev_arrival: u64 = 0; // a_0 = 0
    let mut w_prev = F::zero();
    let mut s_prev = F::zero();

    let mut block_start = 0usize; // first symbol index of the open block

    let mut handle_block = |end: usize, codeword_bits: u32, block_start: usize| {
        let n_syms = (end - block_start + 1) as u32;
        n_blocks += 1;
        n_symbols_decoded += n_syms as u64;
        let i = n_blocks;

        let a_i = stream.arrival_times[end];
        let t_i = F::from_u64(a_i - prev_arrival).unwrap();
        let w_i = if i == 1 {
            F::zero()
        } else {
            (w_prev + s_prev - t_i).max(F::zero())
        };
        let s_i = F::from_u32(codeword_bits).unwrap() / r_ch;
        // R_i - a_{i-1} = T_i + W_i + S_i, avoiding large-time cancellation
        let gamma = if i >= 2 { Some(t_i + w_i + s_i) } else { None };

        if i > warmup {
            for n in block_start..=end {
                let tarry_n = F::from_u64(a_i - stream.arrival_times[n]).unwrap();
                tarry.push(tarry_n);
                delay.push(tarry_n + w_i + s_i);
            }
            sym_waiting.push_weighted(w_i, n_syms as u64);
            sym_service.push_weighted(s_i, n_syms as u64);
            if let Some(g) = gamma {
                peak_aoi.push(g);
                waiting.push(w_i);
                service.push(s_i);
                inter_arrival.push(t_i);
            }
        }

        on_block(&BlockRecord {
            index: i,
            block_symbols: n_syms,
            codeword_bits,
            arrival_last: a_i,
            waiting: w_i,
            service: s_i,
            decode_time: F::from_u64(a_i).unwrap() + w_i + s_i,
            peak_aoi: gamma,
        });

        prev_arrival = a_i;
        w_prev = w_i;
        s_prev = s_i;
    };

    match scheme {
        Scheme::Vtf(dict) => {
            let mut walker = dict.walker();
            for (n, &sym) in stream.symbols.iter().enumerate() {
                if let Some((_, _word)) = walker.step(sym)? {
                    handle_block(n, dict.ell(), block_start);
                    block_start = n + 1;
                }
            }
        }
        Scheme::Ftv(code) => {
            let b = code.block_len() as usize;
            let mut end = b;
            while end <= stream.symbols.len() {
                let idx = code.block_index(&stream.symbols[block_start..end])?;
                handle_block(end - 1, code.length_of(idx), block_start);
                block_start = end;
                end += b;
            }
        }
    }

    Ok(SimReport {
        mean_delay: delay.mean(),
        stderr_delay: delay.std_err(),
        mean_tarry: tarry.mean(),
        stderr_tarry: tarry.std_err(),
        mean_peak_aoi: peak_aoi.mean(),
        stderr_peak_aoi: peak_aoi.std_err(),
        mean_waiting: waiting.mean(),
        stderr_waiting: waiting.std_err(),
        mean_service: service.mean(),
        stderr_service: service.std_err(),
        mean_inter_arrival: inter_arrival.mean(),
        stderr_inter_arrival: inter_arrival.std_err(),
        symbol_mean_waiting: sym_waiting.mean(),
        symbol_mean_service: sym_service.mean(),
        n_blocks,
        n_symbols_decoded,
    })
}

/// Empirical divergence check: simulate, split the post-warmup blocks into
/// `windows` equal windows, and report whether the windowed mean waiting
/// time increases strictly across every window boundary.
pub fn detect_divergence<F: Real>(cfg: &SimConfig<F>, windows: usize) -> Result<bool> {
    assert!(windows >= 3, "divergence detection needs at least 3 windows");
    let stream = sample_stream(&cfg.pmf, &cfg.arrivals, cfg.n_symbols);
    let mut waits: Vec<F> = Vec::new();
    let warmup = cfg.warmup_blocks as u64;
    simulate_stream_traced(&cfg.scheme, &cfg.channel, cfg.warmup_blocks, &stream, |rec| {
        if rec.index > warmup {
            waits.push(rec.waiting);
        }
    })?;

    let per_window = waits.len() / windows;
    if per_window == 0 {
        return Ok(false);
    }
    let mut means = Vec::with_capacity(windows);
    for w in 0..windows {
        let chunk = &waits[w * per_window..(w + 1) * per_window];
        let mut stat = RunningStat::new();
        for &x in chunk {
            stat.push(x);
        }
        means.push(stat.mean());
    }
    Ok(means.windows(2).all(|pair| pair[1] > pair[0]))
}
