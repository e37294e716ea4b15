//! Exact computations with simplicial tropical fans.

pub mod balancing;
pub mod chow;
pub mod error;
pub mod fan;
pub mod io;
pub mod kahler;
pub mod linalg;
pub mod matroid;
pub mod lp;
pub mod piecewise;
pub mod pipeline;

pub use error::{Error, Result};
pub use fan::{Cone, Fan, StarFan};
