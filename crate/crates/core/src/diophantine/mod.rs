//! Approximation pairs, best approximations, Farey lattices and Dirichlet improvability.

pub mod best;
pub mod di;
pub mod farey;
pub mod fiber;
pub mod pair;

pub use best::{best_approx_sequence, best_approx_sequence_exact, BestApproxEntry, BestApproxSeq};
pub use di::{di_test, DiReport, DiVerdict};
pub use farey::{farey_lattice, r_of_u, r_of_u_bruteforce, FareyLattice};
pub use fiber::{fiber, fiber_count, fiber_exhaustive, pi_preimage};
pub use pair::{approx_quality, approx_quality_exact, hat_distance, pi_u, wedge_exp, ApproxPair};
