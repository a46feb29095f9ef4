//! Concentration toolkit for isotropic sub-Gaussian random matrices.
//!
//! The library computes psi_alpha (Orlicz) norms, evaluates sharpened
//! Bernstein and Hanson-Wright tail bounds together with their classical
//! counterparts, and verifies the bounds empirically with seeded,
//! thread-count-independent Monte-Carlo batches. On top of the core sit
//! three application pipelines: Johnson-Lindenstrauss style embeddings,
//! sketch-and-solve least squares with optimality certificates, and
//! null-space-property certification of 0-1 measurement matrices.
//!
//! Start with the runnable examples (`cargo run --release --example ...`)
//! or the `subgauss` binary, which exposes each capability as a subcommand.

pub mod bounds;
pub mod cli;
pub mod constants;
pub mod ensembles;
pub mod geometry;
pub mod io;
pub mod mc;
pub mod nullspace;
pub mod orlicz;
pub mod rng;
pub mod sketch;

pub use bounds::{BoundReport, TailBound};
pub use ensembles::{EnsembleSpec, MultiplierSpec};
pub use geometry::SetSpec;
pub use orlicz::{DistributionSpec, PsiNorm};
