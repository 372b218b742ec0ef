//! Runs every code example in the book as a documentation test, keeping the
//! guide and the library in lockstep: `cargo test -p guide --doc` executes
//! each `rust` code fence of each chapter. One module per chapter so a
//! failure points at its source file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/character-spaces.md")]
pub mod character_spaces {}

#[doc = include_str!("../../../book/src/polynomials.md")]
pub mod polynomials {}

#[doc = include_str!("../../../book/src/arens-hoffman.md")]
pub mod arens_hoffman {}

#[doc = include_str!("../../../book/src/fibrations.md")]
pub mod fibrations {}

#[doc = include_str!("../../../book/src/averaging.md")]
pub mod averaging {}

#[doc = include_str!("../../../book/src/cole-towers.md")]
pub mod cole_towers {}

#[doc = include_str!("../../../book/src/logarithms.md")]
pub mod logarithms {}

#[doc = include_str!("../../../book/src/dense-invertibles.md")]
pub mod dense_invertibles {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
