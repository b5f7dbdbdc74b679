//! Empirical checks of interior regularity, pointwise evaluation of the
//! fractional Laplacian and the boundary counterexample.

pub mod counterexample;
pub mod pv;
pub mod regularity;

pub use counterexample::{counterexample_suite, default_epsilons, lower_bound, truncated_energy, CounterexampleReport};
pub use pv::{half_plane_frac_laplacian, pointwise_frac_laplacian, varpi_constant};
pub use regularity::{caccioppoli_check, fit_regularity_exponent, linear_fit, CaccioppoliReport, ExponentFit};
