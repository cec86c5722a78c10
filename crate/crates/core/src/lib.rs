//! Composition operators between finite-dimensional Haagerup `L^p` spaces.
//!
//! The algebras are direct sums of full matrix blocks, weights are trace-form
//! densities, and `L^p` elements are matrices carrying the Schatten `p`-norm.
//! The crate covers the spectral kernel ([`matcore`]), weights and modular
//! theory ([`vnops`]), the symmetric and Kosaki embeddings ([`haagerup`]),
//! Jordan *-morphisms in tile form ([`jordan`]), composition operators and
//! their analysis ([`compop`]), the commutative layer ([`classical`]) and a
//! batch front end ([`cli`]).

pub mod classical;
pub mod cli;
pub mod compop;
pub mod error;
pub mod exponent;
pub mod haagerup;
pub mod jordan;
pub mod matcore;
pub mod sample;
pub mod vnops;

pub use error::{Error, Result};
pub use exponent::Exponent;
pub use matcore::{BlockMatrix, BlockProfile, CMatrix, C64};
