//! Exact symbolic tensor calculus for Walker metrics on cotangent bundles.
//!
//! Everything is computed over the rationals: polynomial coefficients,
//! curvature components, characteristic polynomials.  No floating point is
//! used anywhere.
//!
//! Module layout, bottom to top:
//! - [`expr`]: multivariate rational-coefficient polynomials, parsing,
//!   evaluation, matrices.
//! - [`geometry`]: charts, Walker metrics, affine data on the base
//!   (connections, symmetric 2-tensors, endomorphisms, vector fields).
//! - [`extension`]: the cotangent-bundle metric constructions (classical,
//!   modified, one-parameter, four-dimensional with vector-field and
//!   endomorphism terms) and complete lifts.
//! - [`curvature`]: Christoffel symbols and curvature by two independent
//!   paths, Ricci/scalar/trace-free summaries, covariant derivatives,
//!   Einstein test.

pub mod curvature;
pub mod expr;
pub mod extension;
pub mod fourdim;
pub mod geometry;
pub mod parakaehler;
pub mod spectral;
