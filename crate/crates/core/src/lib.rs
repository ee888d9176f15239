//! Categorical gesture theory over sampled curves.
//!
//! A gesture maps a skeleton digraph into the curves of a configuration
//! space. Gesture morphisms, potential operators and similarity checks are
//! all decided numerically: every diagram equality becomes a sup-norm
//! residual in normalized coordinates, compared against a tolerance.

pub mod check;
pub mod curvespace;
pub mod error;
pub mod gesture;
pub mod orchestra;
pub mod potential;
pub mod similarity;
pub mod skeleton;

pub use error::{Error, Result};
