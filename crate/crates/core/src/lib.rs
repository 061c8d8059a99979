//! Random linear network coding for wireless broadcast with circular-shift
//! coefficients: field and ring arithmetic, encoders, decoders, delay and
//! complexity analysis, and a Monte-Carlo simulator.

pub mod analysis;
pub mod bits;
pub mod circring;
pub mod decoders;
pub mod error;
pub mod gf2e;
pub mod linalg;
pub mod rng;
pub mod schemes;
pub mod sim;
pub mod verify;

pub use error::{Error, Result};
