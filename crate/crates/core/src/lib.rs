//! Transfer-function realizations of Schur-class multipliers of the
//! Drury-Arveson space on the unit ball.
//!
//! The crate works entirely with finite-dimensional state, input and output
//! spaces. Its layers, bottom up:
//!
//! - [`numerics`]: dense complex linear algebra with explicit tolerances.
//! - [`colligation`]: ball points, operator tuples, output pairs, colligations
//!   and transfer-function evaluation.
//! - [`kernels`]: Szego, de Branges-Rovnyak and output-pair kernels, the
//!   defect identity and Gram positivity certificates.
//! - [`subspaces`]: the canonical domain subspace, the isometry `V` and the
//!   null space of the multiplier.
//! - [`completion`]: the constrained contractive completion that fills in the
//!   input operator `B`, and the classification of its solution family.
//! - [`realization`]: end-to-end workflows (Cholesky realizations, completion
//!   pipeline, representers, Gleason and observability checks).
//! - [`overlap`]: overlapping spaces of sampled pushforward kernels.
//! - [`report`]: check records shared by the workflows and the CLI.

pub mod colligation;
pub mod completion;
pub mod error;
pub mod kernels;
pub mod numerics;
pub mod overlap;
pub mod realization;
pub mod report;
pub mod sampling;
pub mod subspaces;

pub use error::{Error, Result};
pub use numerics::{ComplexMatrix, Tolerances};
