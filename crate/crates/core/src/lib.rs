//! Ornstein d-bar distance between ordered binary chains by perfect simulation
//! of a maximal coupling.

pub mod cli;
pub mod config;
pub mod coupling;
pub mod decomposition;
pub mod error;
pub mod estimator;
pub mod kernel;
pub mod regeneration;
pub mod rng;
pub mod stats;

pub use coupling::{CertifiedPair, Condition3, CoupledPair, OrderedSuffix, SymbolPair, K_HARD};
pub use error::{Error, Result};
pub use kernel::{ChainSpec, Ell, HazardKind, HazardSequence, MarkovTable, OrderVerdict, PastSummary, Suffix};
pub use regeneration::{backtrack, perfect_sample, sample_memory_length, CoupledPath};
pub use rng::TimeKeyedRandomness;
pub use estimator::{estimate_dbar, marginal_oracle, EstimateReport, MarginalEstimate, OracleMethod};
