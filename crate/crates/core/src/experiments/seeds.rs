//! Seed splitting.
//!
//! Realization `i` of a run with master seed `m` uses
//! `realization_seed(m, i) = splitmix64(m ^ splitmix64(i))`. Each random
//! ingredient of a realization then draws from its own stream,
//! `stream_seed(realization_seed, stream)`, so adding a new ingredient never
//! shifts the others.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// One round of the SplitMix64 output function applied to `x + golden`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn realization_seed(master: u64, index: usize) -> u64 {
    splitmix64(master ^ splitmix64(index as u64))
}

/// Independent random ingredients of one realization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Couplings = 1,
    InitialState = 2,
    Inputs = 3,
    /// Seed of a series shared by every realization (Mackey-Glass history).
    SharedSeries = 4,
}

pub fn stream_seed(seed: u64, stream: Stream) -> u64 {
    splitmix64(seed ^ (stream as u64).wrapping_mul(GOLDEN))
}
