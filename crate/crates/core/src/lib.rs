//! Head pose estimation from depth images.
//!
//! A depth frame and a head-center annotation go through [`depth_prep`] to
//! become a normalized 64x64 input; [`posenet`] regresses pitch, roll and yaw
//! with a small convolutional network built on [`nn`]. [`dataset_io`] reads
//! Biwi-style datasets, [`synthetic`] renders labeled frames of a head proxy,
//! and [`eval`] produces the error report.

pub mod augment;
pub mod dataset_io;
pub mod depth_prep;
pub mod error;
pub mod eval;
mod grid;
pub mod nn;
pub mod pipeline;
pub mod posenet;
pub mod seeds;
pub mod synthetic;

pub use error::{Error, Result};
