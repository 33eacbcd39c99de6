//! Exact-arithmetic toolkit for K3 orbisurfaces realised as weighted
//! hypersurfaces, their partial resolutions, and the numeric data that feeds
//! the Fu–Yau construction of Hull–Strominger solutions.
//!
//! Everything here is exact: integers are arbitrary precision where they can
//! grow, and every fractional quantity is a [`Rational`].

pub mod bundles;
pub mod catalog;
pub mod cyclotomic;
mod error;
pub mod graded;
pub mod lattice;
pub mod orbchar;
pub mod pipeline;
pub mod rational;
pub mod seifert;
pub mod wps;

pub use error::{Error, Result};
pub use rational::Rational;
