//! Stochastic path-space toolkit: finite time grids, seeded path
//! transformations, Monte-Carlo classification of projection transforms as
//! super-/sub-/martingale projections, and numerical certification of
//! decoherence and information-gain inequalities on simulated weight
//! trajectories.

pub mod classifier;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod quantum;
pub mod report;
pub mod rng;
pub mod runner;
pub mod stats;
pub mod transforms;

pub use error::{Error, Result};
pub use grid::{make_grid, make_path, scalar_path, Path, StateKind, StateValue, TimeGrid, Window};
pub use rng::RandomSource;
