//! Computational toolkit for separable constant-mean-curvature surfaces.
//!
//! A separable surface is the zero set of f(x) + g(y) + h(z) with f, g, h
//! one-variable functions. This crate evaluates the mean curvature of such
//! surfaces through third-order jets, generates Delaunay profiles from the
//! rotational first integral (with a rolling-conic oracle), verifies the
//! algebraic elimination chain behind the classification of separable CMC
//! surfaces as exact identities, and searches for separable CMC surfaces
//! numerically to confirm that solutions are rotational.

pub mod delaunay;
pub mod gallery;
pub mod identities;
pub mod jets;
pub mod mesh;
pub mod solver;
pub mod spline;
pub mod surface;
