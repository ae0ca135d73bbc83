//! Finite fields, polynomials over them, factorisation and arithmetic functions.

pub mod arith;
pub mod factor;
pub mod field;
pub mod poly;

pub use arith::{divisor_sum_d1, euler_phi, phi_degree_sum_closed};
pub use field::{Fe, Field, FieldSpec};
pub use poly::{gcd_all, Poly};
