//! Simulation and verification toolkit for Gaussian polytopes: convex hulls
//! of Poisson point processes whose intensity is a multiple of the standard
//! Gaussian measure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod cumulant;
pub mod error;
pub mod functionals;
pub mod harness;
pub mod hull;
pub mod points;
pub mod rescale;
pub mod sampler;

pub use error::{Error, Result};
pub use hull::{convex_hull, Polytope};
pub use points::PointSet;
pub use sampler::{coupled_path, extend_sample, sample_poisson_gaussian, CoupledSamplePath, GaussianSample, SeedPath};
