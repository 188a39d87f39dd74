//! Exact construction and verification of polyhedral surrogate losses.

pub mod discrete;
pub mod embedding;
pub mod error;
pub mod geometry;
pub mod link;
pub mod plot;
pub mod polyhedral;
pub mod rational;
pub mod spec_io;
pub mod zoo;

pub use error::{Error, Result};
pub use rational::{q, qi, qs, Rational};
