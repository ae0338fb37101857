//! Weighted-graph exponent calculus for functionals of fractional Brownian
//! motion, with numerical oracles that verify the predicted orders, exact
//! fBm simulation, and the Edgeworth-type expansion of the quadratic
//! variation of a fractional Ornstein-Uhlenbeck process.
//!
//! The crate is organized around the objects it computes with:
//!
//! - [`graph`]: edge-vertex-weighted graphs, their structural operations and
//!   component taxonomies;
//! - [`exponent`]: symbolic piecewise-affine exponents in the Hurst
//!   parameter, with the first and second exponent of a weighted graph;
//! - [`rewrite`]: the constructive rewrites tracking how derivatives and
//!   dualities transform graph-sum functionals, and the chaos product
//!   expansion;
//! - [`oracle`]: numerical evaluation of beta-sums, cycle sums, slope fits
//!   and Gaussian moments, used to certify the symbolic layer;
//! - [`fbm`]: exact-in-law fractional Brownian motion sampling, fractional
//!   SDE path solving and quadratic variation;
//! - [`expansion`]: random-symbol coefficients, the expansion density and
//!   distributional distance diagnostics.

pub mod cli;
pub mod expansion;
pub mod exponent;
pub mod fbm;
pub mod graph;
pub mod oracle;
pub mod regression;
pub mod rewrite;
