//! Torus actions and multi-moment maps on the homogeneous nearly Kähler S³×S³.
//!
//! The crate computes the multi-moment map of the action of a maximal torus of
//! the isometry group, its image, the fibers over each point of the image and
//! a conformally rescaled variant, and cross-checks every closed form against
//! an independent numerical oracle.

pub mod cli;
pub mod conformal;
pub mod conventions;
pub mod differential;
pub mod error;
pub mod fiber;
pub mod frame;
pub mod image;
pub mod moment;
pub mod quaternion;
pub mod torus;

pub use error::GeomError;
