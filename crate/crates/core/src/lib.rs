//! Geometry-aware dynamic movement primitives.
//!
//! A dynamic movement primitive whose state lives on a Riemannian manifold:
//! Euclidean space, spheres, unit quaternions, rotation groups, symmetric
//! positive-definite matrices, and Cartesian products of these. Motions are
//! learned from a single demonstration, reproduced with guaranteed convergence
//! to the goal, and can be redirected to a new goal while they run.
//!
//! The crate is organised bottom-up:
//!
//! - [`manifold`]: exp/log maps, distances, geodesics, validation and
//!   projection for every supported manifold.
//! - [`dmp`]: canonical system, basis functions, weight fitting, rollout,
//!   goal switching and the Lyapunov diagnostic.
//! - [`datasets`]: planar handwriting fixtures lifted onto manifolds, plus
//!   designed stiffness and manipulability profiles.
//! - [`sim`]: planar-arm kinematics with null-space manipulability tracking,
//!   and a mass-spring-damper driven by a variable stiffness profile.
//! - [`io`]: CSV trajectory files, metadata sidecars and model documents.
//! - [`plot`]: dependency-free SVG line charts.

pub mod datasets;
pub mod dmp;
pub mod error;
pub mod io;
pub mod linalg;
pub mod manifold;
pub mod plot;
pub mod sim;

pub use dmp::{
    BasisSet, DmpGains, GaDmpModel, GoalSwitch, ManifoldTrajectory, Rollout, RolloutState,
    WeightSolver,
};
pub use error::{Error, ErrorKind, Result};
pub use manifold::{ManifoldDescriptor, ManifoldPoint, TangentVector, Validation};
