//! State-vector simulation with circuit cutting.

pub mod circuit;
pub mod cost;
pub mod cutter;
pub mod deadline;
pub mod error;
pub mod harness;
pub mod merger;
pub mod pipeline;
pub mod statevec;
pub mod timing;

pub use error::{Error, Result};
