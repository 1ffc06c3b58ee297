//! Numerics for first-order Sobolev calculus on weighted Euclidean spaces.
//!
//! The library works with structured Radon measures on ℝ^d (mixtures of
//! Lebesgue pieces, rectifiable patches, Cantor-type measures and atoms),
//! assigns the decomposability bundle V(μ,x) per structured component, and
//! turns the associated energy functionals into executable experiments:
//!
//! * `grassmann` — subspaces of ℝ^d, orthogonal projection, Grassmannian
//!   distance between unit balls;
//! * `measure` — structured measures and their quadrature rules;
//! * `bundle` — the bundle field x ↦ V(μ,x) and differentiability residuals;
//! * `fields` — scalar fields with analytic value/gradient oracles, cutoffs,
//!   and the local Lipschitz constant under pluggable ℓ^p norms;
//! * `energy` — the Lipschitz and projected-gradient energies, parallelogram
//!   defects, and the Sobolev norm;
//! * `testplan` — finitely supported curve ensembles: compression, tangency,
//!   weak-upper-gradient checks, and a duality lower bound;
//! * `relax` — explicit relaxing sequences and two-sided bounds on the
//!   relaxed (Cheeger) energy;
//! * `closability` — counterexample certificates for closability of the
//!   Sobolev norm on smooth compactly supported functions.
//!
//! The `config`, `catalog`, `report` and `experiment` modules back the
//! `wsobolev` CLI: JSON experiment configs in, JSON/CSV reports out.

pub mod bundle;
pub mod catalog;
pub mod closability;
pub mod config;
pub mod energy;
pub mod error;
pub mod experiment;
pub mod fields;
pub mod grassmann;
pub mod linalg;
pub mod measure;
pub mod relax;
pub mod report;
pub mod testplan;
pub mod tol;

pub use error::{Error, Result};
