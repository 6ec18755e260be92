use std::fmt;

use num_complex::Complex64;

/// Which parameter invariant a rejected [`crate::ModelParams`] violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Violation {
    AlphaNotPositive,
    BetaNotPositive,
    AlphaGeBeta,
    KappaGtNu,
    SizeNotPositive,
    SizeNotEven,
    NotFinite,
}

impl Violation {
    pub fn name(self) -> &'static str {
        match self {
            Violation::AlphaNotPositive => "alpha_not_positive",
            Violation::BetaNotPositive => "beta_not_positive",
            Violation::AlphaGeBeta => "alpha_ge_beta",
            Violation::KappaGtNu => "kappa_gt_nu",
            Violation::SizeNotPositive => "n_not_positive",
            Violation::SizeNotEven => "n_not_even",
            Violation::NotFinite => "not_finite",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("rejected parameters: {0}")]
    RejectedParams(Violation),

    #[error("consistency check `{check}` failed: residual {residual:e} exceeds {bound:e}")]
    ConsistencyFailure {
        check: &'static str,
        residual: f64,
        bound: f64,
    },

    #[error("z = {z} is too close to a branch point (root gap {gap:e})")]
    NearBranchPoint { z: Complex64, gap: f64 },

    #[error("t = {t} maps to the point at infinity")]
    PoleAtInfinitySheet { t: Complex64 },

    #[error("Newton iteration did not converge: {context}")]
    NoConvergence { context: String },

    #[error("contour trace crossed the real t-axis at x = {x}")]
    SideFlip { x: f64 },

    #[error("x = {x} lies outside the support of {measure}")]
    OutsideSupport { measure: &'static str, x: f64 },

    #[error("quadrature failed: {context} (error estimate {estimate:e})")]
    QuadratureFailure { context: String, estimate: f64 },

    #[error("variational condition `{condition}` violated at x = {x} (value {value:e})")]
    ViolationDetected {
        condition: &'static str,
        x: f64,
        value: f64,
    },

    #[error("{function}({x}) overflows")]
    Overflow { function: &'static str, x: f64 },

    #[error("{function}({x}) underflows")]
    Underflow { function: &'static str, x: f64 },

    #[error("Gamma pole at s = {s}")]
    PoleHit { s: Complex64 },

    #[error("Mellin-Barnes integrand does not decay on the contour: {context}")]
    ContourQuadratureDivergence { context: String },

    #[error("Gram matrix is ill-conditioned (estimate {estimate:e}, n = {n})")]
    IllConditioned { estimate: f64, n: usize },

    #[error("eigenvalue solver failed: {0}")]
    EigenFailure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short stable name of the failed check, for diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::RejectedParams(v) => v.name(),
            Error::ConsistencyFailure { check, .. } => check,
            Error::ViolationDetected { condition, .. } => condition,
            Error::NearBranchPoint { .. } => "near_branch_point",
            Error::PoleAtInfinitySheet { .. } => "pole_at_infinity_sheet",
            Error::NoConvergence { .. } => "no_convergence",
            Error::SideFlip { .. } => "side_flip",
            Error::OutsideSupport { .. } => "outside_support",
            Error::QuadratureFailure { .. } => "quadrature_failure",
            Error::Overflow { .. } => "overflow",
            Error::Underflow { .. } => "underflow",
            Error::PoleHit { .. } => "pole_hit",
            Error::ContourQuadratureDivergence { .. } => "contour_quadrature_divergence",
            Error::IllConditioned { .. } => "ill_conditioned",
            Error::EigenFailure(_) => "eigen_failure",
            Error::InvalidArgument(_) => "invalid_argument",
        }
    }
}
