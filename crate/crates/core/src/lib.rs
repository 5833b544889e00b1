//! Motion planning for a car-like robot towing one trailer.
//!
//! The exact kinematics are steered with controls computed on their
//! nilpotent approximation, the Engel group:
//!
//! * [`elliptic`]: complete elliptic integrals and Jacobi functions (modulus convention).
//! * [`kinematics`]: trailer vector fields, brackets, the similarity symmetry, the Engel frame.
//! * [`integrate`]: fixed-step RK4 under time-varying control laws.
//! * [`engel`]: figure-eight reparking controls and extremal shooting on the Engel group.
//! * [`nilpotent`]: maps trailer boundary conditions to Engel targets.
//! * [`planner`]: reparking, iterative parking and the Dubins baseline.

pub mod elliptic;
pub mod engel;
pub mod error;
pub mod integrate;
pub mod kinematics;
pub mod nilpotent;
pub mod planner;

pub use error::{Error, Result};
