//! Max-stable processes built from moving maxima of a kernel: exact pair
//! distributions, simulation and rank-based estimation of the kernel scale.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod estimation;
pub mod exactdist;
pub mod experiment;
pub mod kernels;
pub mod observations;
pub mod oracle;
pub mod quadrature;
pub mod simulator;
pub mod sites;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use estimation::{EstimateOptions, EstimateReport, Estimator};
pub use exactdist::PairDependence;
pub use kernels::KernelModel;
pub use observations::Observations;
pub use simulator::{simulate, simulate_with_stats, SimConfig, SimStats};
pub use sites::SiteSet;
