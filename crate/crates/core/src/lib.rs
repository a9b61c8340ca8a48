//! Finite-horizon networked LQ control for the scalar plant
//! `x_{t+1} = a x_t + u_t + w_t` observed through a finite-rate channel.
//!
//! The crate computes certainty-equivalence gain schedules, exact two-step
//! posteriors for quantized observations, encoder designs that minimize the
//! weighted estimation distortion, event-trigger envelopes, and a seeded
//! closed-loop Monte Carlo simulator used to cross-check all of them.

pub mod coding;
pub mod design;
pub mod error;
pub mod estimation;
pub mod exec;
pub mod gauss;
pub mod lqcore;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
