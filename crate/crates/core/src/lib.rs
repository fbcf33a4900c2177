//! Finite-dimensional partial C*-dynamical systems.
//!
//! A finite group acting partially on a multi-matrix algebra `⊕ M_{n_i}(ℂ)`,
//! the reduced partial crossed product it generates, and certification of
//! the maps that move the Haagerup property between the algebra, the partial
//! action and the crossed product: positive-definite functions relative to
//! the action, induced UCP maps, compressions through the conditional
//! expectation, finite-rank approximation on GNS spaces, and trace-compatible
//! inductive chains.
//!
//! Every object is a dense, exact-shape model; every property is checked
//! numerically against an explicit tolerance and reported with a certificate
//! (usually a minimal eigenvalue or a maximal deviation).

pub mod algebra;
pub mod cli;
pub mod crossed_product;
pub mod gns;
pub mod group;
pub mod haagerup;
pub mod inductive_limit;
pub mod linalg;
pub mod partial_action;
pub mod random;

mod error;

pub use error::{Error, Result};

pub use algebra::{AlgebraElement, BlockShape, Ideal, TracialState};
pub use crossed_product::{CrossedElement, CrossedProduct, RegularRepresentation};
pub use group::{FiniteGroup, ScalarPDFunction};
pub use linalg::{C64, CMatrix, CVector, DEFAULT_TOL};
pub use partial_action::PartialAction;
