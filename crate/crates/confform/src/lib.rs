//! Conformal metrics of prescribed constant Gaussian curvature `k` and
//! constant boundary geodesic curvature `c` on triangulated surfaces with
//! one boundary loop, plus the weak uniformization of triple junction
//! surfaces by root-finding on the summed boundary-curvature map.
//!
//! The crate is generic over the scalar type through [`scalar::Real`]
//! (`f32` or `f64`); the aliases below fix `f64`, which every shipped
//! tolerance assumes.
//!
//! Library layout:
//! - [`mesh`]: triangle meshes with one boundary loop, OFF I/O, generators
//! - [`operators`]: cotangent stiffness, lumped masses, angle-defect
//!   curvature integrals (exact discrete Gauss-Bonnet)
//! - [`solver`]: Newton solves of the discrete curvature problem and its
//!   linearization, with continuation into positive boundary curvature
//! - [`atlas`]: monotone length/area maps, bisection inversion, scaling
//!   checks
//! - [`disk`]: the closed-form hyperbolic disk family
//! - [`junction`]: triple junction assembly, compatibility, matching
//! - [`cli`], [`report`], [`config`]: front end and artifact emission

pub mod atlas;
pub mod cli;
pub mod config;
pub mod disk;
pub mod error;
pub mod junction;
pub mod mesh;
pub mod operators;
pub mod report;
pub mod scalar;
pub mod solver;
pub mod sparse;
pub mod threads;

pub use error::{Error, Result};
pub use scalar::Real;

/// f64 instantiations of the core types.
pub type TriangleMesh64 = mesh::TriangleMesh<f64>;
pub type DiscreteOperators64 = operators::DiscreteOperators<f64>;
pub type ConformalState64 = operators::ConformalState<f64>;
pub type CurvatureTarget64 = solver::CurvatureTarget<f64>;
pub type SolveReport64 = solver::SolveReport<f64>;
pub type SolverOptions64 = solver::SolverOptions<f64>;
pub type AtlasRow64 = atlas::AtlasRow<f64>;
pub type MatchResult64 = junction::MatchResult<f64>;

/// f32 instantiations, for callers trading accuracy for memory. The default
/// tolerances assume f64; override them when solving in f32.
pub type TriangleMesh32 = mesh::TriangleMesh<f32>;
pub type DiscreteOperators32 = operators::DiscreteOperators<f32>;
pub type ConformalState32 = operators::ConformalState<f32>;
pub type CurvatureTarget32 = solver::CurvatureTarget<f32>;
