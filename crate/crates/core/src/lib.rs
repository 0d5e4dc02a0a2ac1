//! dinilab: a desk-scale numerical laboratory for quantitative unique
//! continuation at the boundary of planar C1-Dini domains.
//!
//! The crate computes weighted Almgren-type frequency functions
//! N(r) = I(r)/H(r) with degenerate weights (r^2 - |x - z0|^2)^alpha,
//! verifies their adjusted monotonicity, derives three-sphere inequalities,
//! runs the dyadic growth iteration, and estimates vanishing orders of
//! solutions to div(A Du) = V u that vanish on a boundary portion.
//!
//! Modules follow the pipeline:
//! geometry (Dini charts, Lambda(r), star-shapedness) ->
//! coefficients (A(x), V, normalization frames, mu, Z) ->
//! quadrature (weighted polar rules over clipped balls) ->
//! fields (closed-form solution catalog, Bessel machinery, FD solver) ->
//! functionals (H, I, N, variation identities) ->
//! analysis (monotonicity fits, three-sphere reports, growth iteration,
//! constants ledger).

pub mod analysis;
pub mod catalog;
pub mod coefficients;
pub mod error;
pub mod fields;
pub mod functionals;
pub mod geometry;
pub mod num;
pub mod quadrature;
pub mod report;

pub use error::{Error, Result};
