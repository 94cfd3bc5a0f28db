//! A laboratory for prime and sifted-integer gap statistics.
//!
//! The crate walks ascending element streams (primes, or integers whose
//! least prime factor is large) and measures how often the gap to the next
//! element stays below a slowly shrinking multiple of `ln t`, comparing the
//! outcomes against exponential and Poisson heuristics. The pieces:
//!
//! * [`sieve`]: segmented prime enumeration, gap streams, and counting.
//! * [`spf`]: least-prime-factor tables over a window.
//! * [`thresholds`]: the gap threshold families `lambda(t) ln t` and the
//!   iterated-logarithm machinery behind them.
//! * [`singular`]: singular series for prime tuples, pair and triple
//!   correlation sums, and tuple counting.
//! * [`survivors`]: sifted sets with large least prime factor, their gap
//!   streams, and cross-checks against residue-class counting.
//! * [`stats`]: the sweeps that tie streams and thresholds together into
//!   reciprocal sums, gap CDFs, interval histograms, and dyadic reports.
//!
//! Every parallel entry point takes an explicit thread count and returns
//! bitwise identical results for every value of it: work is split into
//! blocks derived from the query alone and merged in a fixed order. The
//! `parallel` feature (on by default) backs thread counts above one with a
//! rayon pool; without it the same block structure runs sequentially.

pub mod error;
mod exec;
pub mod kahan;
pub mod sieve;
pub mod singular;
pub mod spf;
pub mod stats;
pub mod survivors;
pub mod thresholds;

pub use error::{Error, Result};
