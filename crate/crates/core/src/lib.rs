//! Self-orthogonal block codes for ISI channels with unknown taps, and a
//! priority-first decoder that estimates the channel and decodes jointly.

pub mod channel;
pub mod codebook;
pub mod decoder;
pub mod error;
pub mod harness;
pub mod layout;

pub use error::{Error, Result};
