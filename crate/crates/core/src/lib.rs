//! Exact symbolic calculus on graded manifolds in the polynomial model.
//!
//! The coefficient ring is the Laurent polynomial algebra over exact
//! rationals tensored with a Grassmann algebra, so every identity the
//! library checks is decided by exact symbolic equality. On top of the
//! kernel sit superderivations, the bigraded exterior algebra with its
//! Cartan calculus, Lie superalgebras and Lie-superalgebra-valued forms,
//! graded Lie groups presented as Hopf superalgebras, and product graded
//! principal bundles with connection and curvature machinery.

#![allow(clippy::manual_is_multiple_of, clippy::needless_range_loop)]

pub type Q = num::BigRational;

pub mod error;

pub mod chart;
pub mod element;
pub mod morphism;
pub mod tensor;

pub mod derivation;
pub mod form;

pub mod lie;
pub mod gform;

pub mod solve;

pub mod group;

pub mod bundle;

pub mod report;

pub mod fuzz;
pub mod parse;

pub use chart::{Chart, Parity, ParityClass, Point};
pub use element::{Monomial, SuperElement};
pub use error::{Error, Result};
pub use morphism::AlgebraMorphism;
pub use tensor::{tensor_chart, PointDerivation, TensorSplit};

pub use derivation::Derivation;
pub use form::Form;

pub use gform::GForm;
pub use lie::{GVector, LieSuperalgebra};

pub use group::{Action, HopfGroup, TangentVector};

pub use bundle::{Bundle, Connection};

pub use report::{Check, Report};
