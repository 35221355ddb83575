//! A symbolic-regression laboratory for studying how additive output noise
//! affects canonical genetic programming (GP) and geometric semantic genetic
//! programming (GSGP).
//!
//! The crate bundles everything needed to run the comparison end to end:
//!
//! - [`expr`] — expression trees over `{+, -, ×, AQ}`, their evaluation over
//!   an input matrix, and the grow / full / ramped half-and-half generators.
//! - [`datasets`] — the 15 Keijzer/Vladislavleva synthetic benchmarks with
//!   deterministic grid and seeded uniform sampling, plus the Gaussian
//!   output-noise injector.
//! - [`gp`] — canonical tree GP (tournament selection, subtree crossover and
//!   mutation, generational loop with elitism).
//! - [`gsgp`] — geometric semantic GP over a semantics DAG: offspring are
//!   stored as operator metadata plus cached output vectors, so runs stay
//!   linear in population and dataset size instead of growing exponentially
//!   with the composed expression.
//! - [`metrics`] — NRMSE and the RIE/EIE noise-robustness measures.
//! - [`stats`] — medians and the paired one-tailed Wilcoxon signed-rank test
//!   (exact enumeration for small samples, normal approximation above).
//! - [`harness`] — experiment planning, seeded execution, CSV persistence,
//!   analysis, significance tables, and plot-data emission.
//!
//! Every random decision flows from an explicit seed, so any run — from a
//! single tree draw to a full experiment grid — reproduces bit-for-bit.
//!
//! See the `examples/` directory for one runnable example per capability,
//! and the `gsgp-lab` binary for the `gen-data` / `run` / `analyze` /
//! `report` command-line surface.

pub mod datasets;
pub mod error;
pub mod expr;
pub mod gp;
pub mod gsgp;
pub mod harness;
pub mod metrics;
pub mod stats;

pub use error::{Error, Result};
