//! Exact and simulated analysis of the maximum score in random round-robin
//! tournaments among equally strong players.
//!
//! Every player meets every other player once. A game hands one player
//! `a/k` points and the other `(k-a)/k`, where `a` is drawn from a
//! symmetric law on `{0, ..., k}` with every atom positive. Scores are kept
//! on the integer lattice `Y = k * score` throughout the crate.
//!
//! The crate is `no_std` and needs only `alloc`. IO, file formats and
//! thread pools live in the companion `uniqmax` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod asymptotics;
pub mod enumeration;
pub mod error;
pub mod exact_dist;
pub mod model;
pub mod monte_carlo;
pub mod rational;

pub use error::{Error, Result};
pub use model::{Moments, PayoffModel, ScoreVector, TournamentOutcome, Violation};
