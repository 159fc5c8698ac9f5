//! Orthogonal series in discrete direct integrals of Hilbert spaces.
//!
//! The crate models `L2 = \int^\oplus H(x) d\mu(x)` over finite atomic
//! measure spaces with fibers of varying finite dimension, generates
//! orthonormal systems in it, evaluates the Weyl-multiplier conditions for
//! a.e. and unconditional convergence, computes majorants of partial sums
//! together with their dyadic chaining and Tandori block decompositions, and
//! checks every finite inequality those arguments rest on through a seeded
//! trial harness.

pub mod cli;
pub mod coefficients;
pub mod direct_integral;
pub mod error;
pub mod majorants;
pub mod scalar;
pub mod slack;
pub mod summation;
pub mod systems;
pub mod verify;

pub use direct_integral::io::AnySystem;
pub use direct_integral::{
    gram_matrix, inner_product, norm, validate_ons, Element, GramReport, HilbertCollection, MeasureSpace,
    OrthonormalSystem, System,
};
pub use error::{Error, Result};
pub use scalar::{Field, Scalar, C64};
pub use systems::{generate, generate_any, SystemKind, SystemSpec};
