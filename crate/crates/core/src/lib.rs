//! Analysis on quasiarcs and quasiconformal trees built from dyadic diameter
//! functions.
//!
//! A [`DiameterTree`] assigns a diameter to every dyadic subinterval of
//! `[0, 1]`; [`QuasiArc`] turns it into a chain metric on the grid `V_K`.
//! On top of that sit the filtration of dyadic atoms, the martingale
//! difference and integration operators between Lipschitz functions and
//! L∞ sequences, decompositions of glued trees, Lipschitz/light gluing and
//! the finite L¹ isomorphisms.
//!
//! Everything is exact: coordinates and distances are [`Dyadic`], function
//! values are [`Rational`] (or `f64` through the [`Scalar`] trait).

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod arc;
pub mod dyadic;
pub mod error;
pub mod filtration;
pub mod function;
pub mod glue;
pub mod l1;
pub mod martingale;
pub mod numeric;
pub mod tree;
mod union_find;

pub use arc::{ChainGraph, QuasiArc};
pub use dyadic::{DiameterTree, DyadicEdge, GeneratorKind};
pub use error::{Error, Result};
pub use filtration::Filtration;
pub use function::{SampledFunction, StepFunction};
pub use numeric::{Dyadic, Rational, Scalar};
pub use tree::{MetricTree, PieceDecomposition};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
