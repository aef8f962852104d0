//! Deterministic stabilizing consensus under benign faults: a full-information
//! simulator, exact distances on execution space, a universal decision
//! function over finite labeled execution families, and mechanized
//! impossibility witnesses.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line front end and anything touching the OS live in the `stabcon` crate.
//!
//! Layout:
//!
//! - [`model`]: processes, communication graphs, lasso-shaped communication
//!   patterns, input assignments, kernel computation.
//! - [`view`]: hash-consed full-information views.
//! - [`simulator`]: lock-step and asynchronous execution, traces, verdicts.
//! - [`algorithms`]: MinMax, safe MinMax, min-flooding, one-message keeper.
//! - [`topology`]: p-view, uniform and non-uniform distances, limits,
//!   diameters, fair/unfair detection, lossy-link prefix order.
//! - [`universal`]: the universal decision function over declared families.
//! - [`impossibility`]: conflicting-prefix attack and empty-kernel demo.
#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod algorithms;
pub mod error;
pub mod impossibility;
pub mod model;
pub mod simulator;
pub mod topology;
pub mod universal;
pub mod view;

pub use error::{Error, Result};
