//! Multi-armed bandits whose arms are stationary mixing processes.
//!
//! Each arm emits rewards from a stationary process with a known bound Φ on its mixing
//! coefficients. The C-Mix Improved UCB policy runs in epochs, pulling arms in round-robin
//! blocks spaced far enough apart that samples decorrelate, and eliminates arms whose
//! empirical means fall below the leader by twice a mixing-aware confidence width.

pub mod bounds;
pub mod concentration;
pub mod env;
pub mod experiment;
pub mod error;
pub mod policy;
pub mod process;
pub mod simulator;

pub use env::BanditEnv;
pub use error::{Error, Result};
pub use process::{ProcessSpec, RateDescriptor};
