//! Certified brackets for spectral radius, operator norm, and joint spectral
//! radius of finite sets of nonnegative matrices, and a verifier for chains of
//! Hadamard-product inequalities built on top of them.

pub mod bracket;
pub mod catalog;
pub mod error;
pub mod instance;
pub mod kerngen;
pub mod numat;
pub mod radius;
pub mod setalg;
pub mod verify;

pub use bracket::Bracket;
pub use catalog::{CatalogEntry, Expr};
pub use error::{Error, Result};
pub use instance::InstanceSpec;
pub use numat::NonNegMatrix;
pub use setalg::{OperatorSet, Permutation, Word};
