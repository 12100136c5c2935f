//! Numerical verification toolkit for the degree-0 homogeneous family
//!
//! ```text
//! u(x, y, z) = z^α (x^α + y^α) / (x^α y^α)    on  E = {x, y, z > 0}
//! ```
//!
//! `u` is quasi-convex on E, yet the Hessian of `F[u]` is indefinite at every
//! point for every smooth `F` with `F'[u] ≠ 0`. The modules check the closed
//! forms against finite differences ([`fd`]), sample the quasi-convexity
//! inequality ([`quasiconvexity`]), build indefiniteness certificates
//! ([`convexifiability`]), search for exponential convexifications
//! ([`lambda_search`]) and drive everything from a seeded batch runner
//! ([`report`]).

pub mod convexifiability;
pub mod eigen;
pub mod error;
pub mod fd;
pub mod field;
pub mod harness;
pub mod lambda_search;
pub mod monotone;
pub mod quasiconvexity;
pub mod report;
pub mod sampling;

pub use error::{Error, Result};
pub use field::{eval_u, eval_v, grad_u, hess_u, Alpha, PointE, Sym3, Vec3};
pub use monotone::{compose_hessian, MonotoneF};
