//! Multiscale stochastic model of the Othmer-Aldridge glycolytic pathway.
//!
//! The crate has three layers:
//!
//! - [`network`] + [`ssa`]: the sixteen-reaction continuous-time Markov chain
//!   of molecule counts and its exact Gillespie simulation, including the
//!   frozen-slow fast subsystem used to validate stochastic averaging.
//! - [`reduced`]: the two-variable ODE that the scaled slow species follow in
//!   the large-`n` limit, with closed-form stationary means of the fast
//!   subsystem and the cross-checks tying the two model forms together.
//! - [`estimation`] + [`identifiability`]: trajectory-mismatch parameter
//!   estimation of the reduced model from slow-species data (Latin hypercube
//!   multi-start over a box-constrained Nelder-Mead), and the generalized
//!   Vandermonde diagnostic certifying that an orbit pins down the
//!   parameters.
//!
//! All randomness flows through seeded, counter-based generators
//! ([`rng`]), so every simulation and estimate is reproducible bit for bit
//! regardless of thread count.

pub mod error;
pub mod estimation;
pub mod export;
pub mod identifiability;
mod linalg;
pub mod network;
pub mod reduced;
pub mod rng;
pub mod ssa;

pub use error::{Error, Result};
pub use network::{
    conservation_totals, EffectiveParams, Network, RateConstants, Reaction, ScalingRegime, Species,
    State,
};
pub use reduced::{OdeSolution, SlowState};
pub use ssa::{FastState, Trajectory};
