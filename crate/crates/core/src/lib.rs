//! Computation, estimation and verification of QSVT phase angles for matrix
//! inversion.
//!
//! The pipeline runs in two stages. High-precision angle sets are solved for
//! moderate condition numbers ([`phase_solver`]), compressed into a handful
//! of metaparameters ([`meta_fit`]), and then expanded again into estimated
//! sets for much larger condition numbers ([`angle_estimator`]). The
//! [`verifier`] measures how well any set approximates the scaled inverse.

pub mod angle_estimator;
pub mod cheb;
pub mod error;
pub mod io;
pub mod lbfgs;
pub mod lstsq;
pub mod meta_fit;
pub mod phase_solver;
pub mod qsp_eval;
pub mod scalar;
pub mod target_fn;
pub mod verifier;

pub use error::{Error, Result};
pub use scalar::Real;

pub type AngleSet64 = qsp_eval::AngleSet<f64>;
pub type AngleSet32 = qsp_eval::AngleSet<f32>;
pub type ChebSeries64 = cheb::ChebSeries<f64>;
pub type ChebSeries32 = cheb::ChebSeries<f32>;
pub type TargetSpec64 = target_fn::TargetSpec<f64>;
pub type TargetSpec32 = target_fn::TargetSpec<f32>;
pub type SymmetricQsp64 = qsp_eval::SymmetricQsp<f64>;
pub type SymmetricQsp32 = qsp_eval::SymmetricQsp<f32>;
