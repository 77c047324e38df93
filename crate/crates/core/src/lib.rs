//! Finite-key security analysis for efficient decoy-state BB84.
//!
//! The crate computes secret key lengths for the four-intensity protocol
//! (signal `mu` and decoy `v1` in Z, decoy `v2` in X, weakest decoy `omega`
//! in both bases) and for the three-intensity baseline, from either observed
//! counts or a fiber channel model. On top of the estimators it provides a
//! multi-start simplex optimizer over the source parameters, distance and
//! `omega` scans, and an event-level Monte Carlo simulator that checks every
//! statistical bound against ground truth.
//!
//! ```
//! use decoy_qkd::{bounds, channel, SecurityParams, SourceConfig, SystemParams};
//!
//! let cfg = SourceConfig::reference_four();
//! let sys = SystemParams::default().with_length(100.0);
//! let counts = channel::expected_counts(&cfg, &sys);
//! let report = bounds::evaluate(&cfg, &counts, sys.n_pulses, &SecurityParams::four_intensity());
//! assert!(report.feasible && report.rate > 1e-5);
//! ```
//!
//! Runnable walkthroughs live in `examples/`; the `decoy-qkd` binary wraps
//! the same API for batch runs that write CSV tables.

pub mod baseline3;
pub mod bounds;
pub mod channel;
pub mod cli;
mod error;
pub mod mcsim;
pub mod optimizer;
mod params;

pub use error::{Error, Result};
pub use params::{
    Basis, Fluctuations, ObservedCounts, ObservedCounts3, SecurityParams, SourceConfig,
    SourceConfig3, SystemParams,
};
