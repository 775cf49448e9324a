//! Random closed loops, filling areas and averaged Dehn functions for a
//! catalog of nilpotent groups.

pub mod acceptance;
pub mod error;
pub mod estimator;
pub mod filling;
pub mod group;
pub mod runner;
pub mod walk;

pub use error::{Error, Result};
pub use group::{GroupElement, GroupId, GroupSpec, LazyWord, Letter, PathTrace};
