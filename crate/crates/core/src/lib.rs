//! MAP inference for discrete Markov random fields posed as quadratic
//! unconstrained binary optimisation (QUBO).
//!
//! * [`mrf`] — pairwise MRFs, energies, brute-force reference.
//! * [`onehot`] — one-hot QUBO encoding with granular rectifiers.
//! * [`pbo`] — binary label encoding, higher-order polynomial and its
//!   quadratization.
//! * [`solve`] — exhaustive, simulated annealing and chain DP solvers.
//! * [`stereo`], [`imaging`], [`eval`] — coarse-to-fine stereo matching.

pub mod error;
pub mod eval;
pub mod imaging;
pub mod mrf;
pub mod onehot;
pub mod par;
pub mod pbo;
pub mod qubo;
pub mod solve;
pub mod stereo;

pub use error::{Error, Result};
pub use mrf::{Labelling, MarkovRandomField};
pub use qubo::QuboInstance;
