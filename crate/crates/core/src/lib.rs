//! Modelling toolkit for password-choice frequency distributions.
//!
//! The pipeline starts from a leaked-style credential corpus and turns it into
//! a [`RankFrequencyTable`]. From there:
//!
//! * [`zipf_fit`] estimates the Zipf exponent by least squares (raw and
//!   dyadically binned, on both the rank-frequency and count-of-counts views)
//!   and by truncated-Zipf maximum likelihood with a parametric bootstrap
//!   goodness-of-fit p-value.
//! * [`stats`] computes guesswork, α-guesswork, Shannon, min- and Rényi-½
//!   entropy under empirical, uniform and Zipf models.
//! * [`crossguess`] measures how well one list's ordering guesses another.
//! * [`crack`] replays an ordering against a salted hash corpus.
//! * [`mh_uniform`] simulates the Metropolis-Hastings gate that flattens the
//!   distribution of passwords users end up with.
//!
//! Data-parallel loops (bootstrap replicates, salt buckets) run on rayon when
//! the default `parallel` feature is enabled; see [`Execution`].

pub mod crack;
pub mod crossguess;
mod error;
mod exec;
pub mod hashing;
pub mod ingest;
pub mod mh_uniform;
pub mod numeric;
pub mod stats;
pub mod tsv;
pub mod zipf_fit;

pub use error::{Error, ErrorKind, Result};
pub use exec::Execution;
pub use ingest::{CountOfCounts, CredentialRecord, RankFrequencyTable};
pub use stats::ProbabilityModel;
pub use zipf_fit::ZipfFit;

/// Seed used by every seeded operation when the caller does not supply one.
pub const DEFAULT_SEED: u64 = 0x005E_ED0F_2010;
