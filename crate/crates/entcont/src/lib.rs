#![no_std]
#![cfg_attr(test, allow(unused_imports))]
extern crate alloc;

pub mod error;
pub mod linops;
pub mod statekit;
pub mod entropies;
pub mod remainders;
pub mod alaff;
pub mod applications;

pub use error::{Error, Result};

/// Version of this library, echoed into experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
