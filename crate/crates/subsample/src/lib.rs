//! Reparameterizable subset sampling via a continuous relaxation of top-k
//! selection over Gumbel-perturbed log-weights.
//!
//! The library covers the full pipeline: exact sequence/subset probabilities
//! with a brute-force enumeration oracle ([`dist`]), exact samplers based on
//! weighted reservoir keys and Gumbel keys ([`sampler`]), the successive
//! softmax top-k relaxation ([`relax`]), analytic Jacobians of the relaxation
//! with a finite-difference checker ([`grad`]), statistical verification
//! against the oracle ([`stats`]), and small end-to-end training demos that
//! exercise the reparameterized gradients ([`experiments`]).

pub mod dist;
pub mod error;
pub mod experiments;
pub mod grad;
pub mod relax;
pub mod sampler;
pub mod stats;
pub mod stream;

pub use dist::{DistributionTable, SubsetMask, Weights, WrsSample};
pub use error::Error;
pub use relax::{RelaxedKHot, Scores};
pub use stream::UniformStream;

pub type Result<T> = std::result::Result<T, Error>;
