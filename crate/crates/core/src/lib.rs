//! Ishikawa iteration for Lipschitz pseudo-contractions on compact convex
//! subsets of ℝ^d, with exact effective moduli (liminf, approximate fixed
//! point, closedness, Fejér) and rates of metastability, plus numerical
//! verification of the inequalities behind them.

pub mod error;
pub mod iterate;
pub mod numkernel;
pub mod operators;
pub mod rates;
pub mod runner;
pub mod scenario;
pub mod schedule;
pub mod verify;

pub use error::{Error, Result};
pub use numkernel::{AmbientSet, Point};
pub use rates::{BoundNat, Counterfunction, Lipschitz, Saturation};
