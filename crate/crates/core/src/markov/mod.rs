//! Exact jump-process models of propagated errors in the hypercube code.
//!
//! The state of the network between layers is the pattern of level-1 MAJ
//! failures carried over from earlier steps; incipient MAJ3 failures drive
//! the transitions. Conditioning on no logical error gives a stationary
//! distribution and from it the per-phase logical failure probability.

mod chain;
mod poly;
mod steady;

pub use chain::{
    build_level2_chain, build_level3_chain, classify_level3, ChainAt, ErrorChain, Level3Class,
    Pattern, LEVEL3_LABELS,
};
pub use poly::{gate_outcome, Basis, Exponents, Poly};
pub use steady::{normalized_matrix, propagated_bit_error, steady_state, SteadyState};

/// Whether a level-1 MAJ fails given how many of its three inputs carry a
/// propagated error and how many fresh (incipient) errors hit the rest.
/// Accidental corrections are ignored, so any two bad inputs are a failure.
pub fn level1_fails(propagated: usize, incipient: usize) -> bool {
    propagated + incipient >= 2
}
