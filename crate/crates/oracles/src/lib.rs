//! Independent reference computations for cross-checking `pmcal`.
//!
//! Nothing here shares code with the main crate. Each routine takes a
//! deliberately different numerical route from the implementation it
//! checks: regression through an explicit Gram-matrix solve, quantiles
//! through direct quadrature of the density, Mie coefficients through
//! spherical Bessel functions and Legendre polynomials.

pub mod mie;
pub mod quadrature;
pub mod regression;
