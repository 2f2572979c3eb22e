//! Computational symbolic dynamics over `Z^d` with box subgroup chains.
//!
//! The crate works with configurations in `A^G` for `G = Z^d` and computes
//! quantities that are defined through Følner averages: upper and lower
//! Banach densities, the Weyl / Besicovitch family of pseudometrics,
//! pattern-counting entropy and empirical measures. It also builds Toeplitz
//! configurations over a nested chain of subgroups `H_n = (q_n Z)^d`:
//! regular ones, the monotone `Psi(t)` path between `0^G` and `1^G`,
//! interpolations between two Toeplitz tables and a Krieger-style
//! positive-entropy construction.
//!
//! Every quantity that is exactly computable (anything built from unions of
//! cosets) is reported as an exact [`Rational`]. Quantities that need a sup
//! over the whole group are reported as brackets carrying an exactness flag;
//! nothing is silently rounded.
//!
//! Modules:
//! - [`groups`]: group elements, finite subsets, balls and validated chains.
//! - [`configs`]: configurations, the shift action and `Per` sets.
//! - [`densities`]: exact and windowed Banach densities.
//! - [`metrics`]: `D*`, Weyl, Besicovitch and `D_W'` distances, Shearer checks.
//! - [`measures`]: empirical measures, Prokhorov and Hausdorff distances.
//! - [`entropy`]: pattern counting, binary entropy bounds, separated and
//!   spanning sets.
//! - [`toeplitz`]: skeletons, regularity, the `Psi` path and the Krieger
//!   construction.
//! - [`harness`]: experiment specs, reports and the bundled verification
//!   suites used by the `symdyn` CLI.

pub mod configs;
pub mod densities;
pub mod entropy;
pub mod error;
pub mod groups;
pub mod harness;
pub mod measures;
pub mod metrics;
pub mod rational;
pub mod toeplitz;

pub use error::{Error, Result};
pub use rational::Rational;
