//! Group algebras of free products with their canonical trace.

mod element;
mod free_product;
mod involution;

pub use element::{
    ell_bar_from_trace, ell_from_trace, free_order_two_pair, verify_free_commutator_identity, AlgebraElement,
    CommutatorIdentityCheck, TermRecord, LENGTH_UNITARY_TOL,
};
pub use free_product::{Factor, FreeProductGroup, GroupWord, Syllable, DEFAULT_SUPPORT_CAP};
pub use involution::{free_involution_trace, InvolutionFactor, MAX_INVOLUTION_FACTORS};
