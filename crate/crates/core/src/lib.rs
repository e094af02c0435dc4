//! Network distances built on Laplacian flows.
//!
//! Two graphs on the same labelled node set are compared through the heat
//! kernels `exp(-t L)` of their Laplacians. The main quantity is the network
//! flow distance ([`flow::nld_distance`]): for every node `i` and every unit
//! initial condition `e_j` with `j != i`, the total variation in time of the
//! difference between the two flows at node `i`, summed over all nodes.
//!
//! Baselines (edge Hamming distance, Frobenius distance of Laplacians and the
//! max-over-time diffusion distance) live alongside it, together with seeded
//! stochastic block model generators and the clustering tools used to compare
//! the metrics on populations of graphs.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, plotting and
//! the command line live in the companion `netflow` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod clustering;
pub mod error;
pub mod flow;
pub mod generators;
pub mod graph;
pub mod linalg;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use flow::{DistanceMatrix, DistanceResult, Metric, TimeGrid};
pub use graph::{Graph, LaplacianMatrix};
pub use linalg::Matrix;
pub use spectral::{HeatKernel, Spectrum};
