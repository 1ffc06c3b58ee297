//! Centralized numeric tolerances.
//!
//! Every threshold used by the library's checks lives here, named by the
//! contract it enforces, so experiment code carries no ad-hoc magic numbers.

/// Orthonormality drift allowed in a `Subspace` basis (unit norms and
/// pairwise dot products).
pub const ORTHONORMALITY: f64 = 1e-12;

/// Gram–Schmidt drop tolerance: a residual shorter than this is treated as
/// linearly dependent and discarded.
pub const GRAM_SCHMIDT_DROP: f64 = 1e-10;

/// Smallest singular value accepted for a patch Jacobian before the
/// parametrization is declared degenerate.
pub const JACOBIAN_RANK: f64 = 1e-8;

/// Exactness required of closed-form masses (Cantor stage masses, declared
/// component masses) against summed quadrature weights.
pub const MASS_EXACTNESS: f64 = 1e-9;

/// Node-wise exactness for algebraic identities (projection linearity,
/// parallelogram of the projected-gradient energy).
pub const ALGEBRAIC: f64 = 1e-12;

/// Slack for quadratic-form defects of the projected-gradient energy.
pub const QUADRATIC_FORM: f64 = 1e-10;

/// Tangency residual allowed for curve ensembles, relative to 1 + |γ̇|.
pub const TANGENCY: f64 = 1e-9;

/// Per-pair violation slack in the weak-upper-gradient check.
pub const WUG_VIOLATION: f64 = 1e-9;

/// Fraction of (curve, time) pairs that must satisfy the weak-upper-gradient
/// inequality outright.
pub const WUG_PASS_FRACTION: f64 = 0.99;

/// Multiplicative headroom allowed over a declared compression certificate.
pub const COMPRESSION_HEADROOM: f64 = 0.1;

/// Margin for the identity-gap closability refutation: the refutation fires
/// when the upper Cheeger bound is below half of the Lipschitz energy.
pub const IDENTITY_GAP_MARGIN: f64 = 0.5;

/// Last-stage L²(μ) smallness required of a vanishing-sequence certificate.
pub const SEQUENCE_L2_VANISH: f64 = 1e-6;

/// Last-stage gradient-convergence residual required of a vanishing-sequence
/// certificate.
pub const SEQUENCE_GRAD_RESIDUAL: f64 = 1e-9;

/// Minimal limit-field norm for a vanishing-sequence certificate to count as
/// a refutation.
pub const SEQUENCE_LIMIT_NORM: f64 = 0.1;

/// Support membership tolerance used when resolving mixture overlaps and
/// checking that curves stay on the support.
pub const MEMBERSHIP: f64 = 1e-7;
