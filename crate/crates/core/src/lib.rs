//! Numerical core: weighted sum-space norms, min-of-monomials integrals and
//! their region decomposition, Orlicz functions, and finite-dimensional
//! operator-space norms.

pub mod error;
pub mod fit;
pub mod integrator;
pub mod kfunc;
pub mod logval;
pub mod matnorm;
pub mod oracle;
pub mod orlicz;
pub mod regions;
pub mod scenario;
pub mod steps;
pub mod sumsolve;
pub mod weights;

pub use error::{Error, Result};
