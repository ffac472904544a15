//! Words in free groups and in free products `ℤ ∗ G`, their normal forms,
//! and evaluation in concrete groups.

mod carrier;
mod finite_group;
mod free_word;
mod mixed;

pub use carrier::{Carrier, GroupCarrier};
pub use finite_group::{FiniteGroup, GroupElement};
pub use free_word::{reduce_free_word, w_sequence, FreeWord, Generator, X, Y};
pub use mixed::{
    asymptotic_freeness_witness, enumerate_mixed_words, is_mixed_identity, iterated_commutator,
    MixedIdentityVerdict, MixedWord,
};
