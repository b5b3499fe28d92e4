//! Product integration on desk-scale Lie groups.
//!
//! The library evaluates the evolution map (product integral) of
//! piecewise-continuous Lie-algebra-valued curves, its right logarithmic
//! derivative, and the seminorm bounds that control both. On top of that
//! sits an experiment harness that measures the Trotter limit
//! `μ(τ/n)^n → exp(τ·μ̇(0))` uniformly on compact τ-intervals.
//!
//! Modules:
//! - [`model`]: model-space vectors and the seminorm calculus.
//! - [`group`]: the concrete group roster (GL(n), SO(3), SE(3), Heisenberg,
//!   upper-triangular, additive, diagonal-operator) behind one interface.
//! - [`curve`]: group-valued C¹ curves and piecewise algebra-valued curves.
//! - [`engine`]: the product-integral stepper and the elementary identities.
//! - [`estimates`]: numerical probes for the convexity and domination bounds.
//! - [`trotter`]: the Trotter-family construction and convergence sweeps.
//! - [`runner`]: the batch experiment runner behind the `prodint` CLI.

pub mod config;
pub mod curve;
pub mod engine;
pub mod error;
pub mod estimates;
pub mod group;
pub mod linalg;
pub mod model;
pub mod registry;
pub mod runner;
pub mod trotter;

pub use error::{Error, Result};
