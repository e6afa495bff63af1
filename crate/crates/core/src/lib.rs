//! Binary alternating algebras over F2, their automorphisms, and alternative
//! differential cryptanalysis of toy substitution-permutation networks.

pub mod algebra;
pub mod automorphism;
pub mod catalog;
pub mod differential;
pub mod error;
pub mod format;
pub mod gf2;
pub mod spn;

pub use error::{Error, Result};
pub use gf2::{BitMat, BitVec};
