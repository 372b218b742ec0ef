//! Finite models of commutative Banach algebras and their algebraic
//! extensions.
//!
//! The base algebra is the algebra of complex functions on a finite
//! [`space::CharacterSpace`] under the sup norm. On top of it the crate
//! builds and analyses:
//!
//! - Arens-Hoffman extensions `A[x]/(alpha(x))` with the weighted norm and
//!   its minimal norm parameter ([`extension`]);
//! - resultants, Newton sums and polynomial rescaling ([`poly`]);
//! - the extension character space as a fibration over the base, with
//!   separations, local trivializations, fibre separators and loop
//!   components ([`fibration`]);
//! - the unital, base-linear averaging operator in both its coefficient and
//!   fibre-average forms ([`averaging`]);
//! - Cole extensions by finite polynomial sets, towers of extensions and
//!   sup-norm distances to subspaces ([`cole`], [`tower`]);
//! - logarithmic extensions: branch-enumerated fibrations, logarithm
//!   descent, winding numbers and finite log towers ([`logext`]);
//! - invertible approximation by perturbing the constant coefficient only
//!   ([`density`]);
//! - a scenario-driven command line front end ([`scenario`] and the
//!   `algext` binary).

pub mod algebra;
pub mod averaging;
pub mod cole;
pub mod density;
pub mod error;
pub mod extension;
pub mod fibration;
pub mod logext;
pub mod poly;
pub mod roots;
pub mod scenario;
pub mod space;
pub mod tower;

pub use algebra::Element;
pub use error::{Error, Result};
pub use extension::{AHElement, AHExtension};
pub use poly::{MonicPoly, PolyOverA};
pub use space::{CharacterSpace, Space};
