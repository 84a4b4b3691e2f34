//! Refined L-invariants of weight 2 and level `Γ₀(p)` modulo prime powers,
//! Manin-symbol homology with Hecke action, Eisenstein-ideal filtrations and
//! machine checks of the identities tying them together.

pub mod eisen;
pub mod error;
pub mod gfield;
pub mod modsym;
pub mod ssgraph;
pub mod theorems;
pub mod zmodlin;

pub use error::{Error, Result};
