//! Exact multivariate information measures over discrete distributions,
//! plus upper bounds on the secret-key capacity of wiretap multi-way
//! channels.
//!
//! The crate is organized around a dense, exactly-normalized joint tensor
//! ([`dist::JointDist`]) and builds up from there:
//!
//! - [`dist`] — joint distributions, channels, entropy / mutual-information
//!   kernels (base-2 logs, bits everywhere).
//! - [`fracpart`] — fractional partitions of `[k]`: validation, presets,
//!   vertex enumeration, and linear optimization over the weight polytope.
//! - [`lambda_mi`] — the multivariate mutual information `I_lambda`, the
//!   total correlation `J`, their identities, and the Fano / data-processing
//!   properties.
//! - [`dbbound`] — exact simulation of interactive codes over memoryless
//!   channels and the per-letter dependence-balance inequality.
//! - [`keybound`] — the single-channel bound functional `V_lambda` and the
//!   composite secret-key upper bound across parallel channels.
//! - [`macregion`] — outer bounds for two-user MACs with generalized
//!   feedback, with the dependence-balance input constraints.
//! - [`fileio`] — the JSON file formats shared with the CLI.
//! - [`sampling`] — seeded random instances for property suites.
//! - [`props`] — the runnable property/acceptance suites.
//!
//! Core math is generic over the scalar type (`f32`/`f64`) via
//! [`scalar::Scalar`]; the aliases at the crate root fix `f64`, which is the
//! reference precision for all documented tolerances.

// index-heavy numeric kernels: range loops over parallel arrays and
// one-element block lists are the intended forms here
#![allow(clippy::needless_range_loop)]
#![allow(clippy::single_range_in_vec_init)]

pub mod dist;
pub mod error;
pub mod fileio;
pub mod fracpart;
pub mod keybound;
pub mod lambda_mi;
pub mod macregion;
pub mod dbbound;
pub mod opt;
pub mod props;
pub mod sampling;
pub mod scalar;
mod shape;

pub use error::{Error, ErrorKind, Result};
pub use scalar::Scalar;

pub use dist::VarSpec;

/// `f64` aliases for the generic core types.
pub type JointDist = dist::JointDist<f64>;
pub type Channel = dist::Channel<f64>;
pub type FractionalPartition = fracpart::FractionalPartition<f64>;
pub type TraceDist = dbbound::TraceDist<f64>;
pub type InteractiveCode = dbbound::InteractiveCode<f64>;
pub type ChannelSet = dbbound::ChannelSet<f64>;
pub type WiMWCSystem = keybound::WiMWCSystem<f64>;
pub type GenFeedbackMAC = macregion::GenFeedbackMAC<f64>;

pub use fracpart::Partition;
pub use keybound::OptimizerConfig;
