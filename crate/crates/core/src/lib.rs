//! Large-deviation statistics of radial observables of the two-dimensional
//! one-component plasma (2D Coulomb gas) in a harmonic confinement.
//!
//! The crate covers
//! - analytic rate functions for the maximum modulus ([`edge_ldp`]) and for
//!   the radial moments `Δ^(p) = (1/N) Σ r_k^p` ([`radial_moments`]),
//! - exact finite-`N` formulas at coupling `β = 2` ([`exact_beta2`]),
//! - exact (Kostlan) and Metropolis samplers ([`sampler`]),
//! - verification pipelines that confront the two ([`harness`]).

pub mod edge_ldp;
pub mod error;
pub mod exact_beta2;
pub mod harness;

pub mod quad;
pub mod radial_moments;
pub mod sampler;

pub mod specfun;
pub mod stats;

pub use error::{OcpError, Result};
