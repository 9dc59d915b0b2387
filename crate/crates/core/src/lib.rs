//! Exact elimination engine for derivation-closed polynomial systems.

pub mod cache;
pub mod cascade;
pub mod certificate;
pub mod check;
pub mod cli;
pub mod derivation;
pub mod error;
pub mod limits;
pub mod modular;
pub mod poly;
pub mod rational;
pub mod resultant;
pub mod scenario;

pub use error::{Error, PolyError};
pub use limits::Limits;
pub use poly::{Monomial, Poly, VarId, VarRole, VarSet};
pub use rational::BigRat;
