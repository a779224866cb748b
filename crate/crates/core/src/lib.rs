//! Landlord: online file caching with arbitrary sizes and retrieval costs,
//! its classic paging specializations, an exact offline optimum, and tooling
//! for competitive and loosely competitive analysis.
//!
//! All costs and credits are exact rationals.

pub mod advgen;
pub mod analysis;
pub mod error;
pub mod file;
pub mod landlord;
pub mod opt;
pub mod paging;
pub mod rational;
pub mod trace;

pub use error::{Error, Result};
pub use file::{FileId, FileSpec, FutureIndex, RequestSequence};
pub use landlord::{
    run_cost, run_trace, EvictionSelector, Greediness, LandlordCache, LandlordPolicy,
    RequestOutcome, RunReport,
};
pub use opt::{opt_cost, opt_cost_fast_paging, OptResult};
pub use paging::{belady_opt, simulate_paging, PagingAlgorithm, PagingTrace};
pub use rational::Rational;
pub use trace::{parse_trace, serialize_trace};
