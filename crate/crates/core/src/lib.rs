//! Simultaneous Diophantine approximation over the field of formal Laurent series
//! F_q((x⁻¹)): polynomial lattices and their successive minima, best approximations,
//! the Farey-lattice description of Dirichlet improvability, and the self-similar
//! coverings used to bound Hausdorff dimensions of singular vectors.

pub mod bounds;
pub mod diophantine;
pub mod error;
pub mod ffpoly;
pub mod fractal_lower;
pub mod fractal_upper;
pub mod lattice;
pub mod laurent;
pub mod parse;
pub mod qexp;
pub mod sample;
pub mod suites;

pub use error::{Error, Result};
pub use ffpoly::{Fe, Field, FieldSpec, Poly};
pub use laurent::{LVec, Laurent, RatFn};
pub use qexp::QNorm;
