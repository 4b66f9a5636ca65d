//! Partial Euler products `p₁`, `p₂` of a quadratic field's Dedekind zeta
//! function, evaluated through the dyadic series
//! `log pᵢ(s) = -Σ_n log qᵢ(2ⁿ s) / 2^{n+1}`, with exact special values at even
//! integers and truncated Euler products as an independent reference.

pub mod bernoulli;
pub mod cli;
pub mod dyadic;
pub mod error;
pub mod euler;
pub mod lfunc;
pub mod numkernel;
pub mod quadchar;

pub use bernoulli::{BernoulliTable, GenBernoulliTable};
pub use dyadic::{QRepresentation, TermPath, TruncationResult};
pub use error::{Error, Result};
pub use euler::{Half, PrimeClass, ProductTruncation, Splitting};
pub use lfunc::ExactSpecialValue;
pub use numkernel::{BigRational, PrecReal};
pub use quadchar::{Discriminant, QuadraticCharacter};
