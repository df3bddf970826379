//! Closed-form solutions for the Ohmic coupling: source-free trajectories,
//! Green functions, reservoir reconstruction and condition maps.

mod kernel;

pub mod conditions;
pub mod green;
pub mod homogeneous;
pub mod reservoir;
pub mod residual;

pub use conditions::*;
pub use green::*;
pub use homogeneous::*;
pub use reservoir::*;
pub use residual::*;
