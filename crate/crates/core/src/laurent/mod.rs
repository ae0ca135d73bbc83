//! Truncated Laurent series in x⁻¹, exact rational functions and ultrametric balls.

pub mod ball;
pub mod ratfn;
pub mod series;

pub use ball::{ball_distance, Ball};
pub use ratfn::{vec_add, vec_norm, vec_scale, vec_sub, RatFn};
pub use series::{lvec_exact, lvec_from_ratfns, lvec_norm, lvec_norm_bound, LVec, Laurent, NormBound};
