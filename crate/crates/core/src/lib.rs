//! Secret-key capacity, error exponents and random-binning simulation for
//! sender-excited discrete memoryless broadcast channels.
//!
//! All information quantities are in bits.

pub mod capacity;
pub mod channel;
pub mod error;
pub mod exponents;
pub mod optimize;
pub mod par;
pub mod prob;
pub mod simulator;

pub use error::{Error, Result};
