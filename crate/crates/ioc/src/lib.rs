//! Options whose initiation sets are learned, not hand-drawn.
//!
//! An option here is a triple: an intra-option action policy, a termination
//! probability, and an *interest* function saying where the option wants to
//! be in charge. Interests reweight the policy over options,
//!
//! ```text
//! pi_I(w | s)  proportional to  I_w(s) * pi_Omega(w | s)
//! ```
//!
//! and are trained by gradient ascent on the same objective as everything
//! else, so options specialize to regions instead of being asked to cover
//! the whole state space. Freezing the interests at their uniform
//! initialization recovers the classic option-critic learner exactly, which
//! makes the baseline comparison a one-flag affair.
//!
//! The crate ships two desk-scale environments (a slippery four-rooms grid
//! and a continuous T-maze with a goal-removal transfer twist), a tabular /
//! linear critic, a finite-difference gradient checker, and a harness that
//! turns configs into CSV tables, SVG learning curves, heatmaps, and
//! checkpoints, all byte-reproducible per seed.
//!
//! # Start with the examples
//!
//! Each major capability has a runnable example:
//!
//! - `four_rooms` trains the interest-enabled agent against the frozen
//!   baseline on the grid and prints the learning-curve comparison.
//! - `tmaze_transfer` runs the two-goal maze, removes the favourite goal
//!   mid-training, and reports recovery.
//! - `gradient_check` fuzzes every analytic gradient against central
//!   differences.
//! - `interest_heatmap` trains briefly and renders where each option wants
//!   to initiate.
//! - `branching_threshold` sweeps the interest threshold `k` and shows how
//!   initiation sets shrink.
//! - `custom_map` builds a gridworld from an ASCII map string.
//!
//! Run one with `cargo run --release --example four_rooms`.
//!
//! The `ioc` binary wraps the same machinery as subcommands (`train`,
//! `gradcheck`, `heatmap`, `branching`) for scripted use.
//!
//! # Library sketch
//!
//! ```
//! use ioc::env::FourRooms;
//! use ioc::learner::{train, LearnerConfig};
//!
//! let mut env = FourRooms::standard();
//! let cfg = LearnerConfig { episodes: 5, seed: 7, ..LearnerConfig::default() };
//! let result = train(&mut env, &cfg).unwrap();
//! assert_eq!(result.metrics.episodes.len(), 5);
//! ```

pub mod checkpoint;
pub mod critic;
pub mod env;
pub mod error;
pub mod funcapprox;
pub mod gradcheck;
pub mod harness;
pub mod learner;
pub mod options;

pub use error::{Error, Result};
