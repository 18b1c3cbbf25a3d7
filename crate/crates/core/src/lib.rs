//! Simulation, regime classification and generator verification for a
//! two-type mutually enhancing continuous-state branching system driven by
//! Brownian noise and spectrally positive stable jumps.

// `!(a > b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod criteria;
pub mod error;
pub mod generator;
pub mod ineqlab;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod rng;
pub mod simulator;
pub mod stablejump;

pub use error::{Error, Result};
