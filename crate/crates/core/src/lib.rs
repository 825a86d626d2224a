//! Executable closure of finite behaviour under bipointed SOS operations.
//!
//! A bipointed specification (see [`sosdsl`]) defines operations on systems
//! whose conclusions only ever produce flat terms. Applying such an operation to
//! finite systems therefore yields a finite system again ([`synthesis`]); the
//! result is checked with bisimulation ([`bisim`]), lasso detection for streams
//! ([`streams`]) and language equivalence for automata ([`langops`]).
//!
//! The core is generic over an exact [`Scalar`]; [`Rational`] is the default.

pub mod behaviors;
pub mod bisim;
pub mod error;
pub mod langops;
pub mod scalar;
pub mod sosdsl;
pub mod streams;
pub mod synthesis;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Arbitrary-precision rationals, the default scalar.
pub type Rational = num_rational::BigRational;
/// Machine-word rationals; faster, but arithmetic overflow panics.
pub type Rational64 = num_rational::Rational64;

pub type Coalgebra = behaviors::FiniteCoalgebra<Rational>;
pub type Pointed = behaviors::PointedCoalgebra<Rational>;
pub type Spec = sosdsl::SpecDoc<Rational>;
pub type RationalLasso = streams::Lasso<Rational>;
pub type Coalgebra64 = behaviors::FiniteCoalgebra<Rational64>;
pub type Pointed64 = behaviors::PointedCoalgebra<Rational64>;
pub type Spec64 = sosdsl::SpecDoc<Rational64>;
