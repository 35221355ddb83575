//! Deterministic seed derivation.
//!
//! Every random stream in an experiment is seeded by a pure function of the
//! base seed and the cell coordinates, so any single cell rerun in
//! isolation reproduces its record bit-for-bit and the execution order or
//! parallelism degree cannot change results.

use crate::datasets::{Benchmark, Partition};
use crate::harness::plan::Method;

/// SplitMix64 step; a well-mixed 64-bit permutation.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// FNV-1a over a string, used to fold identifiers into the seed chain.
pub fn fnv1a64(s: &str) -> u64 {
    let mut hash = 0xCBF2_9CE4_8422_2325u64;
    for b in s.as_bytes() {
        hash ^= u64::from(*b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

fn combine(parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(0x243F_6A88_85A3_08D3, |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Seed of the rng that materializes one partition of one resample.
pub fn data_seed(base: u64, benchmark: Benchmark, partition: Partition, sample_id: u32) -> u64 {
    combine(&[
        fnv1a64("data"),
        base,
        fnv1a64(benchmark.id()),
        matches!(partition, Partition::Test) as u64,
        u64::from(sample_id),
    ])
}

/// Seed of the noise injector. Independent of the repetition index: all
/// repetitions on one sample see the same noisy targets, making each
/// (dataset, level, sample) variant a fixed artifact.
pub fn noise_seed(base: u64, benchmark: Benchmark, noise_permille: u32, sample_id: u32) -> u64 {
    combine(&[
        fnv1a64("noise"),
        base,
        fnv1a64(benchmark.id()),
        u64::from(noise_permille),
        u64::from(sample_id),
    ])
}

/// Seed of one engine run.
pub fn run_seed(
    base: u64,
    method: Method,
    benchmark: Benchmark,
    noise_permille: u32,
    sample_id: u32,
    rep_index: u32,
) -> u64 {
    combine(&[
        fnv1a64("run"),
        base,
        fnv1a64(method.id()),
        fnv1a64(benchmark.id()),
        u64::from(noise_permille),
        u64::from(sample_id),
        u64::from(rep_index),
    ])
}
