//! Numerical toolkit for the achievable rate regions of a two-user
//! multiple-access channel with rate-limited feedback.
//!
//! The crate evaluates the rate region of a two-block coding scheme on two
//! substrates: arbitrary finite-alphabet channels with user-supplied
//! auxiliary kernels ([`discrete`]), and a closed-form Gaussian
//! parameterization cross-checked against a covariance oracle ([`gaussian`]).
//! [`region`] turns bounds into rate polygons, sweeps the Gaussian parameter
//! space and optimizes the sum rate; [`baselines`] supplies the classical
//! comparison points.

pub mod baselines;
pub mod diagnostics;
pub mod discrete;
pub mod gaussian;
pub mod info;
pub mod region;
pub mod terms;

pub use info::{InfoError, JointPmf, LinearGaussianSystem, VarSet};
pub use terms::{MacMiTerms, RegionBounds};
