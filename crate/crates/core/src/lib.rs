//! Terrain-aided navigation from side-scan sonar slant-range detections.
//!
//! The crate is organized bottom-up:
//!
//! - [`geometry`]: swath endpoints, oriented landmark rectangles, segment
//!   intersection and slant/horizontal range conversion.
//! - [`motion`]: coordinated-turn state transition with Gaussian driving noise.
//! - [`sonar`]: landmark, altitude and compass measurements, synthetic ping
//!   rasterization and edge extraction, and the measurement likelihoods.
//! - [`filter`]: sigma-point prediction on the noise-augmented state followed by
//!   a particle-based importance-sampling update.
//! - [`harness`]: scenarios, single trials, Monte Carlo RMSE studies and CSV output.

pub mod error;
pub mod filter;
pub mod geometry;
pub mod harness;
pub mod map;
pub mod motion;
pub mod sonar;

pub use error::{Error, Result};
