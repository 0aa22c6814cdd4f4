//! Cohomogeneity-one gradient Ricci soliton trajectories.
//!
//! Launches the soliton ODEs of three ansätze from singular-orbit data,
//! integrates them with an adaptive embedded Runge–Kutta pair, and checks the
//! resulting trajectories against conservation laws, preserved loci and the
//! a priori bounds that govern completeness.

pub mod error;
pub mod geometry;
pub mod integrator;
pub mod launch;
pub mod monitors;
pub mod rescaled;
pub mod run;
pub mod solve;
pub mod systems;

pub use error::{Error, Result};
