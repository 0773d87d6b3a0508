//! Good primes, local conjugates and per-class interpolation of orbits.
//!
//! At a prime `p` where some orbit point `c_m` returns to itself modulo
//! `p^2` after `a` steps with `(h^a)'(c_m) ≡ 1 (mod p)`, the map
//! `f(x) = (h^a(c_m + p x) - c_m) / p` is an integral Tate series congruent
//! to `x` mod `p`, and each subsequence `n -> c_{a n + i}` is a p-adic
//! analytic function of `n`. Those functions are recovered here as Mahler
//! series fitted to the orbit modulo `p^N`.

mod bundle;
mod conjugate;
mod modular;
mod search;

use thiserror::Error;

use crate::padic::PadicError;

pub use bundle::{
    composition_cross_check, default_holdout, interpolate_orbit, progression_compatibility, validate_bundle,
    BundleParams, ClassSeries, CompatibilityReport, InterpolationBundle, ResidualReport,
};
pub use conjugate::{check_congruent_to_identity, local_conjugate};
pub use modular::ModPoint;
pub use search::{
    find_good_prime, orbit_residues, search_good_primes, verify_certificate, CertificateChecks,
    GoodPrimeCertificate, PrimeAttempt, PrimeOutcome, PrimeSearch, SearchCaps, MAX_SEARCH_PRIME,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UniformizeError {
    #[error(
        "no good prime in [{p_min}, {p_max}] ({tried} primes tried); widen the range or \
         supply a conjugated map whose fixed points are rational"
    )]
    NoPrimeFound { p_min: u64, p_max: u64, tried: usize },
    #[error("orbit meets a pole residue mod {p} at index {index}")]
    PoleCollision { p: u64, index: usize },
    #[error("certificate re-verification failed: {0}")]
    CertificateInvalid(String),
    #[error("Mahler coefficients of class {class} do not decay (head {head_min}, tail {tail_min})")]
    DecayFailure { class: u64, head_min: i64, tail_min: i64 },
    #[error("held-out residual valuation {min_valuation} is below {threshold}")]
    ValidationFailed { min_valuation: i64, threshold: i64 },
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

impl UniformizeError {
    pub fn name(&self) -> &'static str {
        match self {
            UniformizeError::NoPrimeFound { .. } => "NoPrimeFound",
            UniformizeError::PoleCollision { .. } => "PoleCollision",
            UniformizeError::CertificateInvalid(_) => "CertificateInvalid",
            UniformizeError::DecayFailure { .. } => "DecayFailure",
            UniformizeError::ValidationFailed { .. } => "ValidationFailed",
            UniformizeError::InvalidParameters(_) => "InvalidParameters",
            UniformizeError::Padic(e) => e.name(),
        }
    }
}
